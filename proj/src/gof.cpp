#include "vplab/gof.hpp"

#include "vplab/errors.hpp"
#include "vplab/rng.hpp"

#include "json.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

namespace vplab {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

double ks_to_normal(std::span<const double> samples) {
    if (samples.size() < 2) throw DomainError("KS statistic needs at least 2 samples");
    std::vector<double> s(samples.begin(), samples.end());
    std::sort(s.begin(), s.end());
    const double r = static_cast<double>(s.size());
    double d = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double f = normal_cdf(s[i]);
        d = std::max({d, static_cast<double>(i + 1) / r - f, f - static_cast<double>(i) / r});
    }
    return d;
}

namespace {

void check_spec(const BinSpec& spec) {
    if (spec.bins < 10) throw DomainError("binned TV needs at least 10 bins");
    if (!(spec.hi > spec.lo)) throw DomainError("bin range must be non-empty");
}

}  // namespace

std::vector<double> empirical_masses(std::span<const double> samples, const BinSpec& spec) {
    check_spec(spec);
    if (samples.empty()) throw DomainError("no samples");
    std::vector<double> m(spec.bins + 2, 0.0);
    const double w = 1.0 / static_cast<double>(samples.size());
    for (double x : samples) {
        if (x < spec.lo) {
            m.front() += w;
        } else if (x >= spec.hi) {
            m.back() += w;
        } else {
            auto b = static_cast<std::size_t>((x - spec.lo) / spec.width());
            m[1 + std::min(b, spec.bins - 1)] += w;
        }
    }
    return m;
}

std::vector<double> normal_masses(const BinSpec& spec) {
    check_spec(spec);
    std::vector<double> m(spec.bins + 2);
    m.front() = normal_cdf(spec.lo);
    for (std::size_t b = 0; b < spec.bins; ++b) {
        const double left = spec.lo + static_cast<double>(b) * spec.width();
        const double right = b + 1 == spec.bins ? spec.hi : left + spec.width();
        m[b + 1] = normal_cdf(right) - normal_cdf(left);
    }
    m.back() = normal_cdf(-spec.hi);
    return m;
}

double tv_from_masses(std::span<const double> emp, const BinSpec& spec) {
    const auto ref = normal_masses(spec);
    if (emp.size() != ref.size()) throw SizeError("mass vector does not match the bin spec");
    double acc = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) acc += std::abs(emp[i] - ref[i]);
    return std::min(1.0, 0.5 * acc);
}

double tv_binned_to_normal(std::span<const double> samples, const BinSpec& spec) {
    return tv_from_masses(empirical_masses(samples, spec), spec);
}

double w1_to_normal(std::span<const double> samples) {
    if (samples.empty()) throw DomainError("no samples");
    std::vector<double> s(samples.begin(), samples.end());
    std::sort(s.begin(), s.end());
    const double r = static_cast<double>(s.size());
    const double inf = std::numeric_limits<double>::infinity();

    const boost::math::normal_distribution<double> std_normal;
    auto qnorm = [&](double u) { return boost::math::quantile(std_normal, u); };
    auto phi = [](double z) { return std::isinf(z) ? 0.0 : normal_pdf(z); };
    auto cdf = [](double z) { return std::isinf(z) ? (z > 0 ? 1.0 : 0.0) : normal_cdf(z); };
    // Integral over z in [z1, z2] of (x - z) phi(z) dz.
    auto signed_part = [&](double x, double z1, double z2) {
        return x * (cdf(z2) - cdf(z1)) + (phi(z2) - phi(z1));
    };

    double total = 0.0;
    double z_left = -inf;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double z_right = i + 1 == s.size() ? inf : qnorm(static_cast<double>(i + 1) / r);
        const double x = s[i];
        if (x <= z_left) {
            total += -signed_part(x, z_left, z_right);
        } else if (x >= z_right) {
            total += signed_part(x, z_left, z_right);
        } else {
            total += signed_part(x, z_left, x) - signed_part(x, x, z_right);
        }
        z_left = z_right;
    }
    return total;
}

NoiseFloor noise_floor(std::size_t sample_size, const BinSpec& spec, std::size_t reps, std::uint64_t seed) {
    if (sample_size < 2 || reps == 0) throw DomainError("noise floor needs R >= 2 and reps >= 1");
    const CounterRng rng(seed);
    NoiseFloor f;
    std::vector<double> x(sample_size);
    for (std::size_t rep = 0; rep < reps; ++rep) {
        for (std::size_t i = 0; i < sample_size; ++i)
            x[i] = rng.gaussian(static_cast<std::uint32_t>(rep), static_cast<std::uint32_t>(i),
                                static_cast<std::uint32_t>(sample_size), Stream::gof_floor);
        f.ks += ks_to_normal(x);
        f.tv_binned += tv_binned_to_normal(x, spec);
        f.w1 += w1_to_normal(x);
    }
    const double d = static_cast<double>(reps);
    f.ks /= d;
    f.tv_binned /= d;
    f.w1 /= d;
    return f;
}

GofReport gof_suite(std::span<const double> z, const BinSpec& spec) {
    if (z.size() < 2) throw DomainError("goodness of fit needs at least 2 samples");
    GofReport r;
    r.ks = ks_to_normal(z);
    r.tv_binned = tv_binned_to_normal(z, spec);
    r.w1 = w1_to_normal(z);
    r.sample_size = z.size();
    r.bins = spec;
    r.floor = noise_floor(z.size(), spec);
    return r;
}

GofReport gof_suite(const SampleBatch& batch, const BinSpec& spec) {
    if (batch.z_samples.size() != batch.replicas || batch.replicas < 2)
        throw DomainError("batch is not standardised");
    return gof_suite(std::span<const double>(batch.z_samples), spec);
}

std::string gof_json(const GofReport& r) {
    nlohmann::ordered_json j;
    j["ks"] = r.ks;
    j["tv_binned"] = r.tv_binned;
    j["w1"] = r.w1;
    j["sample_size"] = r.sample_size;
    j["bins"] = {{"count", r.bins.bins}, {"lo", r.bins.lo}, {"hi", r.bins.hi}};
    j["noise_floor"] = {{"ks", r.floor.ks}, {"tv_binned", r.floor.tv_binned}, {"w1", r.floor.w1}};
    return j.dump(2);
}

void write_histogram_csv(std::ostream& out, std::span<const double> samples, const BinSpec& spec) {
    const auto emp = empirical_masses(samples, spec);
    const auto ref = normal_masses(spec);
    out << "bin_left,bin_right,emp_mass,normal_mass\n";
    for (std::size_t b = 0; b < spec.bins; ++b) {
        const double left = spec.lo + static_cast<double>(b) * spec.width();
        const double right = b + 1 == spec.bins ? spec.hi : left + spec.width();
        out << format_double(left) << ',' << format_double(right) << ',' << format_double(emp[b + 1]) << ','
            << format_double(ref[b + 1]) << '\n';
    }
}

}  // namespace vplab
