#include "rkpod/tuning.hpp"

#include "rkpod/metrics.hpp"
#include "rkpod/parallel.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace rkpod {

namespace {

constexpr std::uint64_t kTagSplit = 0x1;
constexpr std::uint64_t kTagArm = 0x2;
constexpr std::uint64_t kTagFullFit = 0x3;
constexpr std::uint64_t kTagStage = 0x4;
constexpr std::uint64_t kTagLambda = 0x5;

}  // namespace

double bic(const MaskedMatrix& m, const FitResult& fit) {
    double loss = kpod_loss(m, fit.membership, fit.centers);
    double d = static_cast<double>(fit.active.size());
    return loss + std::log(static_cast<double>(m.rows())) * static_cast<double>(fit.k()) * d;
}

double clustering_distance(const Membership& a, const Membership& b) {
    if (a.size() < 2) throw std::invalid_argument("clustering_distance: needs at least two points");
    // Pairwise-disagreement probability; same counting as the classification
    // error rate between the two partitions.
    return cer(a, b);
}

double instability(const MaskedMatrix& m, const ArmFitter& fitter, int B, SplitScheme scheme,
                   std::uint64_t seed, int workers) {
    const int n = static_cast<int>(m.rows());
    if (B < 1) throw std::invalid_argument("instability: B must be positive");
    if (n < 6) throw std::invalid_argument("instability: needs at least six rows");
    const int train_size = n / 3;
    if (train_size < 2 || n - 2 * train_size < 2) {
        throw std::invalid_argument("instability: degenerate split sizes");
    }

    std::vector<double> distances(static_cast<std::size_t>(B));
    parallel_for(B, workers, [&](int b) {
        Rng split_rng(derive_seed(seed, {kTagSplit, static_cast<std::uint64_t>(b)}));
        std::vector<int> train1, train2, validation;
        if (scheme == SplitScheme::Tripartition) {
            std::vector<int> perm = split_rng.permutation(n);
            train1.assign(perm.begin(), perm.begin() + train_size);
            train2.assign(perm.begin() + train_size, perm.begin() + 2 * train_size);
            validation.assign(perm.begin() + 2 * train_size, perm.end());
        } else {
            train1.resize(static_cast<std::size_t>(train_size));
            train2.resize(static_cast<std::size_t>(train_size));
            for (int t = 0; t < train_size; ++t) train1[static_cast<std::size_t>(t)] = split_rng.uniform_int(n);
            for (int t = 0; t < train_size; ++t) train2[static_cast<std::size_t>(t)] = split_rng.uniform_int(n);
            validation.resize(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i) validation[static_cast<std::size_t>(i)] = i;
        }
        MaskedMatrix vrows = m.subset_rows(validation);
        Predictor p1 = fitter(m.subset_rows(train1),
                              derive_seed(seed, {kTagArm, static_cast<std::uint64_t>(b), 0}));
        Predictor p2 = fitter(m.subset_rows(train2),
                              derive_seed(seed, {kTagArm, static_cast<std::uint64_t>(b), 1}));
        distances[static_cast<std::size_t>(b)] = clustering_distance(p1(vrows), p2(vrows));
    });

    double total = 0.0;
    for (double d : distances) total += d;
    return total / static_cast<double>(B);
}

ArmFitter make_arm_fitter(int k, const FitConfig& cfg) {
    FitConfig arm_cfg = cfg;
    arm_cfg.workers = 1;  // arms are already parallel across repetitions
    return [k, arm_cfg](const MaskedMatrix& train, std::uint64_t seed) -> Predictor {
        MethodFit fit = fit_method(train, k, arm_cfg, seed);
        Centers centers = fit.fit.centers;
        return [centers](const MaskedMatrix& rows) { return assign_rows_masked(rows, centers); };
    };
}

std::vector<double> default_lambda_grid() {
    std::vector<double> grid(20);
    for (int s = 0; s < 20; ++s) {
        grid[static_cast<std::size_t>(s)] = std::pow(10.0, -3.0 + 4.0 * static_cast<double>(s) / 19.0);
    }
    return grid;
}

TuningResult select_lambda(const MaskedMatrix& m, int k, const FitConfig& base,
                           const std::vector<double>& grid, Criterion criterion,
                           const TuneOpts& opts) {
    if (grid.empty()) throw std::invalid_argument("select_lambda: empty grid");
    if (base.method != Method::RegGl && base.method != Method::RegL0) {
        throw std::invalid_argument("select_lambda: method must be rkpod-gl or rkpod-l0");
    }
    for (std::size_t s = 1; s < grid.size(); ++s) {
        if (!(grid[s] > grid[s - 1])) throw std::invalid_argument("select_lambda: grid must be ascending");
    }

    TuningResult result;
    result.grid = grid;
    result.criterion = criterion;
    const int count = static_cast<int>(grid.size());
    result.criterion_values.assign(grid.size(), std::numeric_limits<double>::quiet_NaN());
    result.active_counts.assign(grid.size(), 0);

    // Pilot stage shared by all full-data fits; lambda does not enter it.
    const bool needs_pilot = base.init == InitKind::Sparse ||
                             (base.method == Method::RegGl && base.weights == WeightScheme::Adaptive);
    FitResult pilot;
    if (needs_pilot) {
        pilot = kpod_pilot(m, k, base, derive_seed(opts.seed, {kTagStage}));
    }

    std::vector<MethodFit> full_fits(grid.size());
    for (int s = 0; s < count; ++s) {
        FitConfig cfg = base;
        cfg.lambda = grid[static_cast<std::size_t>(s)];
        cfg.workers = opts.workers;
        full_fits[static_cast<std::size_t>(s)] =
            fit_method(m, k, cfg, derive_seed(opts.seed, {kTagFullFit, static_cast<std::uint64_t>(s)}),
                       needs_pilot ? &pilot : nullptr);
        result.active_counts[static_cast<std::size_t>(s)] =
            static_cast<int>(full_fits[static_cast<std::size_t>(s)].fit.active.size());
        if (criterion == Criterion::Bic) {
            result.criterion_values[static_cast<std::size_t>(s)] =
                bic(m, full_fits[static_cast<std::size_t>(s)].fit);
        }
    }

    if (criterion == Criterion::Instability) {
        for (int s = 0; s < count; ++s) {
            FitConfig cfg = base;
            cfg.lambda = grid[static_cast<std::size_t>(s)];
            if (opts.share_pilot_weights && base.method == Method::RegGl &&
                base.weights == WeightScheme::Adaptive && needs_pilot) {
                cfg.fixed_weights = default_weights(pilot.centers);
            }
            result.criterion_values[static_cast<std::size_t>(s)] =
                instability(m, make_arm_fitter(k, cfg), opts.B, opts.scheme,
                            derive_seed(opts.seed, {kTagLambda, static_cast<std::uint64_t>(s)}),
                            opts.workers);
        }
    }

    double best = std::numeric_limits<double>::infinity();
    for (int s = 0; s < count; ++s) {
        double v = result.criterion_values[static_cast<std::size_t>(s)];
        if (std::isfinite(v) && v < best) {
            best = v;
            result.chosen_index = s;
        }
    }
    if (result.chosen_index < 0) {
        throw std::runtime_error("select_lambda: no finite criterion value on the grid");
    }
    result.chosen_lambda = grid[static_cast<std::size_t>(result.chosen_index)];
    result.chosen_fit = full_fits[static_cast<std::size_t>(result.chosen_index)];
    if (needs_pilot && !result.chosen_fit.used_pilot) {
        result.chosen_fit.pilot = pilot;
        result.chosen_fit.used_pilot = true;
    }
    return result;
}

}  // namespace rkpod
