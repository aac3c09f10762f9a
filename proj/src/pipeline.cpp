#include "rkpod/pipeline.hpp"

#include "rkpod/parallel.hpp"

#include <limits>
#include <stdexcept>

namespace rkpod {

namespace {

// Stream tags for derive_seed.
constexpr std::uint64_t kTagRestart = 0x52;
constexpr std::uint64_t kTagPilot = 0x50;

// Lowest final loss wins; ties go to the lowest restart index.
int pick_winner_index(const std::vector<FitResult>& fits) {
    double best = std::numeric_limits<double>::infinity();
    int index = -1;
    for (std::size_t r = 0; r < fits.size(); ++r) {
        double loss = fits[r].final_loss();
        if (loss < best) {
            best = loss;
            index = static_cast<int>(r);
        }
    }
    if (index < 0) throw std::runtime_error("fit_method: no restart produced a result");
    return index;
}

InitPair make_init(const MaskedMatrix& m, int k, InitKind kind, Rng& rng) {
    if (kind == InitKind::Comp) return init_comp(m, k, rng);
    return init_impt(m, k, rng);
}

std::vector<double> fractions_for(const FitConfig& cfg, Index p) {
    if (!cfg.sparse_fractions.empty()) return cfg.sparse_fractions;
    return p <= 20 ? sparse_fractions_low_dim() : sparse_fractions_default();
}

FitResult run_kmeans(const MaskedMatrix& m, int k, const FitConfig& cfg, std::uint64_t seed) {
    // Complete data: multi-restart k-means++ plus Lloyd. With missing entries
    // this becomes complete-case analysis; the final membership for all rows
    // uses observed-feature distances to the winning centers.
    const bool full = m.fully_observed();
    Matrix data;
    if (full) {
        data = m.values();
    } else {
        std::vector<int> rows = m.complete_rows();
        if (static_cast<int>(rows.size()) < k) {
            throw std::invalid_argument("method kmeans: fewer than k complete rows; use kpod");
        }
        data.resize(static_cast<Index>(rows.size()), m.cols());
        for (std::size_t t = 0; t < rows.size(); ++t) data.row(static_cast<Index>(t)) = m.values().row(rows[t]);
    }

    std::vector<FitResult> fits(static_cast<std::size_t>(cfg.restarts));
    parallel_for(cfg.restarts, cfg.workers, [&](int r) {
        std::uint64_t stream = derive_seed(seed, {kTagRestart, static_cast<std::uint64_t>(r)});
        Rng rng(stream);
        Centers c0 = kmeanspp_seed(data, k, rng);
        fits[static_cast<std::size_t>(r)] = lloyd(data, c0, cfg.outer.inner);
        fits[static_cast<std::size_t>(r)].seed = stream;
    });
    int best = pick_winner_index(fits);
    FitResult res = fits[static_cast<std::size_t>(best)];
    if (!full) res.membership = assign_rows_masked(m, res.centers);
    return res;
}

FitResult run_kpod(const MaskedMatrix& m, int k, const FitConfig& cfg, std::uint64_t seed) {
    std::vector<FitResult> fits(static_cast<std::size_t>(cfg.restarts));
    parallel_for(cfg.restarts, cfg.workers, [&](int r) {
        std::uint64_t stream = derive_seed(seed, {kTagRestart, static_cast<std::uint64_t>(r)});
        Rng rng(stream);
        InitPair start = make_init(m, k, cfg.init == InitKind::Sparse ? InitKind::Impt : cfg.init, rng);
        fits[static_cast<std::size_t>(r)] = kpod_fit(m, k, start.membership, start.centers, cfg.outer);
        fits[static_cast<std::size_t>(r)].seed = stream;
    });
    int best = pick_winner_index(fits);
    return fits[static_cast<std::size_t>(best)];
}

FitResult run_regularized(const MaskedMatrix& m, int k, const FitConfig& cfg, std::uint64_t seed,
                          const PenaltySpec& spec, const FitResult* pilot) {
    if (cfg.init == InitKind::Sparse) {
        if (!pilot) throw std::invalid_argument("sparse initialization requires a pilot fit");
        std::vector<Centers> starts = init_sparse(pilot->centers, fractions_for(cfg, m.cols()));
        std::vector<FitResult> fits(starts.size());
        parallel_for(static_cast<int>(starts.size()), cfg.workers, [&](int r) {
            Membership u0 = assign_rows_masked(m, starts[static_cast<std::size_t>(r)]);
            fits[static_cast<std::size_t>(r)] =
                reg_kpod_fit(m, k, spec, u0, starts[static_cast<std::size_t>(r)], cfg.outer);
            fits[static_cast<std::size_t>(r)].seed = derive_seed(seed, {kTagRestart, static_cast<std::uint64_t>(r)});
        });
        int best = pick_winner_index(fits);
        return fits[static_cast<std::size_t>(best)];
    }

    std::vector<FitResult> fits(static_cast<std::size_t>(cfg.restarts));
    parallel_for(cfg.restarts, cfg.workers, [&](int r) {
        std::uint64_t stream = derive_seed(seed, {kTagRestart, static_cast<std::uint64_t>(r)});
        Rng rng(stream);
        InitPair start = make_init(m, k, cfg.init, rng);
        fits[static_cast<std::size_t>(r)] = reg_kpod_fit(m, k, spec, start.membership, start.centers, cfg.outer);
        fits[static_cast<std::size_t>(r)].seed = stream;
    });
    int best = pick_winner_index(fits);
    return fits[static_cast<std::size_t>(best)];
}

}  // namespace

Method method_from_string(const std::string& name) {
    if (name == "kmeans") return Method::KMeans;
    if (name == "kpod") return Method::KPod;
    if (name == "rkpod-gl") return Method::RegGl;
    if (name == "rkpod-l0") return Method::RegL0;
    throw std::invalid_argument("unknown method: " + name);
}

std::string to_string(Method method) {
    switch (method) {
        case Method::KMeans: return "kmeans";
        case Method::KPod: return "kpod";
        case Method::RegGl: return "rkpod-gl";
        case Method::RegL0: return "rkpod-l0";
    }
    return "?";
}

FitResult kpod_pilot(const MaskedMatrix& m, int k, const FitConfig& cfg, std::uint64_t seed) {
    FitConfig pilot_cfg = cfg;
    pilot_cfg.method = Method::KPod;
    if (pilot_cfg.init == InitKind::Sparse) pilot_cfg.init = InitKind::Impt;
    return run_kpod(m, k, pilot_cfg, seed);
}

MethodFit fit_method(const MaskedMatrix& m, int k, const FitConfig& cfg, std::uint64_t seed,
                     const FitResult* shared_pilot) {
    MethodFit out;
    switch (cfg.method) {
        case Method::KMeans:
            out.fit = run_kmeans(m, k, cfg, seed);
            return out;
        case Method::KPod:
            out.fit = run_kpod(m, k, cfg, seed);
            return out;
        case Method::RegL0:
        case Method::RegGl:
            break;
    }

    const bool needs_adaptive = cfg.method == Method::RegGl &&
                                cfg.weights == WeightScheme::Adaptive && cfg.fixed_weights.size() == 0;
    const bool needs_pilot = cfg.init == InitKind::Sparse || needs_adaptive;
    const FitResult* pilot = shared_pilot;
    if (needs_pilot && pilot == nullptr) {
        out.pilot = kpod_pilot(m, k, cfg, derive_seed(seed, {kTagPilot}));
        out.used_pilot = true;
        pilot = &out.pilot;
    } else if (needs_pilot) {
        out.used_pilot = true;
    }

    PenaltySpec spec;
    if (cfg.method == Method::RegL0) {
        spec = PenaltySpec::l0(cfg.lambda);
    } else {
        Vector w;
        if (cfg.fixed_weights.size() > 0) {
            w = cfg.fixed_weights;
        } else if (cfg.weights == WeightScheme::Adaptive) {
            w = default_weights(pilot->centers);
        } else {
            w = uniform_weights(m.cols(), k);
        }
        spec = PenaltySpec::group_lasso(cfg.lambda, w, cfg.gl_variant);
        out.weights_used = spec.weights;
    }
    out.fit = run_regularized(m, k, cfg, seed, spec, pilot);
    return out;
}

}  // namespace rkpod
