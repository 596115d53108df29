#include "vplab/errors.hpp"
#include "vplab/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace vplab {

namespace {

Preset clt_preset(std::string name, std::string description, std::string profile, std::string extra = {}) {
    std::string ini = "[experiment]\nkind = clt\nname = " + name +
                      "\nseed = 1\nreplicas = 1000\n\n[profile]\n" + profile +
                      "\n[ensemble]\nkind = symmetric\nlaw = gaussian\n\n[sweep]\nk = 2\n" + extra;
    return {std::move(name), std::move(description), std::move(ini)};
}

std::vector<Preset> build_presets() {
    std::vector<Preset> p;
    p.push_back(clt_preset("corollary-3.1-separable", "separable profile a_ij^2 = v_i v_j, Z_2 histogram",
                           "family = separable\nn = 200\nc = 0.5\n"));
    p.push_back(clt_preset("corollary-3.2-sampled", "sampled profile a_ij^2 = f(i/n, j/n), Z_2 histogram",
                           "family = sampled\nn = 200\nfunction = cosine\n"));
    p.push_back(clt_preset("corollary-3.3-bounded-below", "entries bounded below by n^-0.2, Z_2 histogram",
                           "family = bounded-below\nn = 200\nfloor_exponent = 0.2\ngraph_seed = 7\n"));
    p.push_back(clt_preset("corollary-3.4-band", "periodic band n=400, band=80, Z_2 goodness of fit",
                           "family = band-periodic\nn = 400\nband = 80\n", "\n[gof]\nks_max = 0.08\n"));
    p.push_back(clt_preset("corollary-3.5-band-nonperiodic", "non-periodic band n=400, band=80",
                           "family = band-nonperiodic\nn = 400\nband = 80\n"));
    p.push_back({"corollary-3.6-covariance", "sample covariance XX^t via the symmetric block embedding",
                 "[experiment]\nkind = embedding\nname = corollary-3.6-covariance\nseed = 1\nreplicas = 1000\n\n"
                 "[embedding]\nkind = covariance\ndims = 100, 150\ntrials = 100\n\n"
                 "[ensemble]\nlaw = gaussian\n\n[sweep]\nk = 2\n\n[gof]\nks_max = 0.08\n"});
    p.push_back({"corollary-3.7-product", "product of two iid matrices via the cyclic block embedding",
                 "[experiment]\nkind = embedding\nname = corollary-3.7-product\nseed = 1\nreplicas = 1000\n\n"
                 "[embedding]\nkind = product\ndims = 80, 80\ntrials = 100\n\n"
                 "[ensemble]\nlaw = gaussian\n\n[sweep]\nk = 2\n\n[gof]\nks_max = 0.1\n"});
    p.push_back(clt_preset("corollary-3.8-erdos-renyi", "Erdos-Renyi adjacency profile, Z_2 histogram",
                           "family = erdos-renyi\nn = 500\np = 0.3\ngamma = 0.25\nalpha = 0.35\ngraph_seed = 1\n"));
    p.push_back(clt_preset("corollary-3.11-block-sparse", "ones on a leading cn x cn block, zeros elsewhere",
                           "family = block-sparse\nn = 400\nc = 0.25\n"));
    p.push_back({"lemma-3.9-concentration", "Erdos-Renyi cycle sums and row sums over 100 graphs",
                 "[experiment]\nkind = er-concentration\nname = lemma-3.9-concentration\n\n"
                 "[profile]\nfamily = erdos-renyi\nn = 500\np = 0.3\ngamma = 0.25\nalpha = 0.35\ngraph_seed = 1\n\n"
                 "[sweep]\nk = 3\n\n[erdos_renyi]\nseeds = 100\nband = 0.1\nmin_within = 0.99\n"});
    p.push_back({"lemma-5.1-variance", "Var Tr((A o X)^k) >= S_k(A), all-ones n=20",
                 "[experiment]\nkind = variance-check\nname = lemma-5.1-variance\nseed = 1\nreplicas = 5000\n\n"
                 "[profile]\nfamily = all-ones\nn = 20\n\n[ensemble]\nkind = symmetric\nlaw = gaussian\n\n"
                 "[sweep]\nk = 2, 3\n"});
    p.push_back({"lemma-5.2-norm", "operator norm of A o X against sqrt(b_n), all-ones n=500",
                 "[experiment]\nkind = norm-check\nname = lemma-5.2-norm\nseed = 1\n\n"
                 "[profile]\nfamily = all-ones\nn = 500\n\n[ensemble]\nkind = symmetric\nlaw = gaussian\n\n"
                 "[norm]\ntrials = 100\nt = 2\nratio_max = 3\n"});
    p.push_back({"theorem-2.1-sweep", "bound rhs for all-ones profiles, n = 100, 400, 1600",
                 "[experiment]\nkind = bound-sweep\nname = theorem-2.1-sweep\n\n"
                 "[profile]\nfamily = all-ones\n\n[sweep]\nk = 2\nn = 100, 400, 1600\n"});
    p.push_back({"theorem-2.1-band-sweep", "bound rhs for periodic bands of half-width ceil(n^0.8)",
                 "[experiment]\nkind = bound-sweep\nname = theorem-2.1-band-sweep\n\n"
                 "[profile]\nfamily = band-periodic\nband_exponent = 0.8\n\n[sweep]\nk = 2\nn = 100, 400, 1600\n"});
    p.push_back(clt_preset("theorem-2.1-clt", "all-ones Gaussian n=200, Z_2 goodness of fit",
                           "family = all-ones\nn = 200\n", "\n[gof]\nks_max = 0.06\n"));
    p.push_back({"theorem-2.1-clt-smooth", "all-ones n=200 with the smooth symmetric law, eps = 0.5",
                 "[experiment]\nkind = clt\nname = theorem-2.1-clt-smooth\nseed = 1\nreplicas = 1000\n\n"
                 "[profile]\nfamily = all-ones\nn = 200\n\n[ensemble]\nkind = symmetric\n"
                 "law = smooth-symmetric:eps=0.5\n\n[sweep]\nk = 2\n\n[gof]\nks_max = 0.08\n"});
    p.push_back({"remark-4.2-i", "two-step cyclic block profile: traces constant for k = 1, 2",
                 "[experiment]\nkind = structural-zero\nname = remark-4.2-i\nseed = 1\n\n"
                 "[profile]\nfamily = remark42-i\nn = 50\n\n[sweep]\nk = 1, 2, 3, 4, 5, 6, 7\n\n"
                 "[structural]\ntrials = 20\nexpect_constant = 1, 2\nexpect_varying = 3, 4, 5, 6, 7\n"});
    p.push_back({"remark-4.2-ii", "cyclic five-block profile: traces constant unless 5 | k",
                 "[experiment]\nkind = structural-zero\nname = remark-4.2-ii\nseed = 1\n\n"
                 "[profile]\nfamily = remark42-ii\nn = 50\n\n[sweep]\nk = 1, 2, 3, 4, 5, 6, 7\n\n"
                 "[structural]\ntrials = 20\nexpect_constant = 1, 2, 3, 4, 6, 7\nexpect_varying = 5\n"});
    p.push_back(clt_preset("remark-4.2-iii", "[[1, 1], [1, 0]] block profile, not broadly connected",
                           "family = remark42-iii\nn = 200\n"));
    p.push_back(clt_preset("remark-4.3", "anti-diagonal band of half-width n/4",
                           "family = anti-diagonal\nn = 400\nband = 100\n"));
    p.push_back({"cycle-oracle", "DFS cycle sums against brute force on random sparse profiles",
                 "[experiment]\nkind = cycle-oracle\nname = cycle-oracle\nseed = 1\n\n"
                 "[sweep]\nk = 2, 3, 4\n\n[oracle]\ncases = 50\nmax_n = 8\ndensity = 0.4\n"});
    return p;
}

std::size_t rescale(std::size_t value, std::size_t from, std::size_t to) {
    const double v = std::round(static_cast<double>(value) * static_cast<double>(to) / static_cast<double>(from));
    return std::max<std::size_t>(1, static_cast<std::size_t>(v));
}

std::string join(const std::vector<std::size_t>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + std::to_string(v[i]);
    return s;
}

}  // namespace

const std::vector<Preset>& presets() {
    static const std::vector<Preset> all = build_presets();
    return all;
}

RawConfig preset_config(std::string_view name, std::optional<std::size_t> n, std::optional<std::uint64_t> seed,
                        std::optional<std::string> out) {
    const Preset* found = nullptr;
    std::vector<std::string> matches;
    for (const auto& p : presets()) {
        if (p.name == name) {
            found = &p;
            matches = {p.name};
            break;
        }
        if (p.name.size() > name.size() && p.name.starts_with(name) && p.name[name.size()] == '-')
            matches.push_back(p.name);
    }
    if (!found && matches.size() == 1)
        for (const auto& p : presets())
            if (p.name == matches[0]) found = &p;
    if (!found) {
        std::string msg = "unknown preset '" + std::string(name) + "'";
        if (matches.size() > 1) {
            msg = "ambiguous preset '" + std::string(name) + "':";
            for (const auto& m : matches) msg += " " + m;
        }
        throw ConfigError(msg, "preset");
    }

    std::istringstream in(found->ini);
    RawConfig cfg = RawConfig::parse(in);
    cfg.set("experiment.out", out.value_or("out/" + found->name));
    if (seed) cfg.set("experiment.seed", std::to_string(*seed));
    if (n) {
        if (*n == 0) throw ConfigError("--n must be positive", "n");
        const std::string kind = cfg.get("experiment.kind");
        if (kind == "bound-sweep") {
            cfg.set("sweep.n", std::to_string(*n));
        } else if (kind == "embedding") {
            std::vector<std::size_t> dims;
            std::istringstream ds(cfg.get("embedding.dims"));
            for (std::string d; std::getline(ds, d, ',');) dims.push_back(std::stoul(d));
            const std::size_t base = dims.front();
            for (auto& d : dims) d = rescale(d, base, *n);
            cfg.set("embedding.dims", join(dims));
        } else if (kind == "cycle-oracle") {
            cfg.set("oracle.max_n", std::to_string(*n));
        } else {
            const std::size_t old = cfg.has("profile.n") ? std::stoul(cfg.get("profile.n")) : 100;
            if (cfg.has("profile.band"))
                cfg.set("profile.band", std::to_string(rescale(std::stoul(cfg.get("profile.band")), old, *n)));
            cfg.set("profile.n", std::to_string(*n));
        }
    }
    return cfg;
}

}  // namespace vplab
