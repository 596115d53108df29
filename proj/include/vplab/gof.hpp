#pragma once

#include "vplab/simulate.hpp"

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace vplab {

double normal_cdf(double x);
double normal_pdf(double x);

/// sup_x |F_emp(x) - Phi(x)|; ties allowed. Requires at least 2 samples.
double ks_to_normal(std::span<const double> samples);

struct BinSpec {
    std::size_t bins = 50;
    double lo = -6.0;
    double hi = 6.0;

    double width() const { return (hi - lo) / static_cast<double>(bins); }
};

/// Masses of bins [lo, hi) split into `bins` cells, preceded by the lower
/// tail (-inf, lo) and followed by the upper tail [hi, inf): bins + 2 values.
std::vector<double> empirical_masses(std::span<const double> samples, const BinSpec& spec);
std::vector<double> normal_masses(const BinSpec& spec);

/// Half L1 distance between two mass vectors laid out as above.
double tv_from_masses(std::span<const double> emp, const BinSpec& spec);

/// Binned total-variation surrogate; tail masses outside the range count.
/// Requires bins >= 10.
double tv_binned_to_normal(std::span<const double> samples, const BinSpec& spec = {});

/// W1 between the empirical law and N(0,1) by quantile coupling, integrated
/// exactly cell by cell.
double w1_to_normal(std::span<const double> samples);

struct NoiseFloor {
    double ks = 0.0;
    double tv_binned = 0.0;
    double w1 = 0.0;
};

/// Mean of each metric over `reps` exact N(0,1) samples of size R.
NoiseFloor noise_floor(std::size_t sample_size, const BinSpec& spec = {}, std::size_t reps = 200,
                       std::uint64_t seed = 0x5eed);

struct GofReport {
    double ks = 0.0;
    double tv_binned = 0.0;
    double w1 = 0.0;
    std::size_t sample_size = 0;
    BinSpec bins;
    NoiseFloor floor;
};

GofReport gof_suite(std::span<const double> z_samples, const BinSpec& spec = {});
GofReport gof_suite(const SampleBatch& batch, const BinSpec& spec = {});

std::string gof_json(const GofReport& r);
/// "bin_left,bin_right,emp_mass,normal_mass" over the finite bins.
void write_histogram_csv(std::ostream& out, std::span<const double> samples, const BinSpec& spec = {});

}  // namespace vplab
