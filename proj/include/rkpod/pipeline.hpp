#pragma once

#include "rkpod/init.hpp"
#include "rkpod/regularized.hpp"

#include <string>
#include <vector>

namespace rkpod {

enum class Method { KMeans, KPod, RegGl, RegL0 };
enum class InitKind { Comp, Impt, Sparse };
enum class WeightScheme { Adaptive, Uniform };

Method method_from_string(const std::string& name);
std::string to_string(Method method);

// Everything needed to run one method end to end: restarts, initialization,
// penalty configuration and convergence budgets.
struct FitConfig {
    Method method = Method::KPod;
    double lambda = 0.0;
    PenaltySpec::GlVariant gl_variant = PenaltySpec::GlVariant::RidgeMM;
    WeightScheme weights = WeightScheme::Adaptive;
    Vector fixed_weights;  // overrides the weight scheme when nonempty (group lasso)
    InitKind init = InitKind::Impt;
    int restarts = 100;
    std::vector<double> sparse_fractions;  // empty picks a preset by dimension
    OuterOpts outer;
    int workers = 1;
};

struct MethodFit {
    FitResult fit;
    Vector weights_used;  // group lasso only
    bool used_pilot = false;
    FitResult pilot;      // the k-POD stage behind adaptive weights / sparse starts
};

// Multi-restart k-POD used as the pilot stage for adaptive weights and sparse
// initialization.
FitResult kpod_pilot(const MaskedMatrix& m, int k, const FitConfig& cfg, std::uint64_t seed);

// Runs the configured method with one PRNG stream per restart derived from
// (seed, restart index). Restarts may execute in parallel; the winner is the
// lowest final loss, ties to the lowest restart index, so results do not
// depend on the worker count. A caller that already has a pilot fit (e.g. a
// tuning loop sweeping lambda) can pass it to avoid recomputation.
MethodFit fit_method(const MaskedMatrix& m, int k, const FitConfig& cfg, std::uint64_t seed,
                     const FitResult* shared_pilot = nullptr);

}  // namespace rkpod
