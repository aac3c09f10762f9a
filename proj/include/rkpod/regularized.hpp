#pragma once

#include "rkpod/kmeans.hpp"

#include <vector>

namespace rkpod {

// Feature-wise penalty on the center matrix. L0 counts nonzero columns;
// GroupLasso charges a weighted l2 norm per column and zeroes whole features.
struct PenaltySpec {
    enum class Kind { L0, GroupLasso };
    enum class GlVariant { RidgeMM, Quadratic };

    Kind kind = Kind::L0;
    double lambda = 0.0;
    Vector weights;  // per feature, GroupLasso only
    GlVariant gl_variant = GlVariant::RidgeMM;

    static PenaltySpec l0(double lambda);
    static PenaltySpec group_lasso(double lambda, Vector weights,
                                   GlVariant variant = GlVariant::RidgeMM);
};

// Cap applied to adaptive weights so features the pilot fit zeroed out do not
// produce infinite weights.
inline constexpr double kWeightCap = 1e6;

// Columns whose MM anchor norm falls below this stay zero for the rest of the
// ridge inner solve (infinite-ridge limit). The quadratic variant can revive
// zero columns because its gradient step does not divide by the anchor norm;
// that asymmetry is why both variants ship.
inline constexpr double kZeroAnchorEps = 1e-10;

double penalty_value(const Centers& c, const PenaltySpec& spec);

// kpod_loss + lambda * penalty_value.
double reg_loss(const MaskedMatrix& m, const Membership& u, const Centers& c,
                const PenaltySpec& spec);

// Adaptive weights w_j = 1 / ||column j of the pilot centers||, capped.
Vector default_weights(const Centers& pilot_centers, double cap = kWeightCap);

// Uniform alternative: sqrt(k) for every feature.
Vector uniform_weights(Index p, int k);

// Nearest-center assignment on a complete matrix; ties go to the lowest index.
Membership assign_step(const Matrix& xhat, const Centers& c);

// Per-column keep-or-kill update: the cluster means survive only when they
// beat the all-zero column by more than lambda in SSE (strictly; ties zero
// the column). Memberless clusters get a zero coordinate, the penalty-optimal
// value for a row no residual depends on.
Centers center_update_l0(const Matrix& xhat, const Membership& u, int k, double lambda);

// One MM step on the group-lasso objective: ridge-shrunk cluster means with
// per-column ridge lambda*w_j / (2 ||prev column||). Columns whose anchor norm
// is below kZeroAnchorEps stay zero; with lambda*w_j == 0 the penalty is
// absent and the update is the plain cluster means.
Centers center_update_gl_ridge(const Matrix& xhat, const Membership& u, int k,
                               const Centers& prev, double lambda, const Vector& w);

// Quadratic-majorization alternative: gradient step with step size 2/gamma
// (gamma = twice the largest cluster size) followed by a group soft-threshold.
Centers center_update_gl_quadratic(const Matrix& xhat, const Membership& u, int k,
                                   const Centers& prev, double lambda, const Vector& w);

// Alternating assignment / penalized center updates on a complete matrix.
// loss_trace holds SSE + lambda*J per iteration and is non-increasing.
FitResult regularized_kmeans(const Matrix& xhat, int k, const PenaltySpec& spec,
                             const Centers& init, const LloydOpts& opts = {});

// Outer loop: impute missing entries from the current model, then run the
// regularized k-means inner solve on the completed matrix. loss_trace holds
// reg_loss evaluated on the masked data (first entry is the initial state)
// and is non-increasing.
FitResult reg_kpod_fit(const MaskedMatrix& m, int k, const PenaltySpec& spec,
                       const Membership& u0, const Centers& c0, const OuterOpts& opts = {});

// Per-feature audit of a converged fit against the closed-form optimality
// conditions. Zero columns are gated on the threshold inequality
// (L0: q_hat*sigma_bar_sq - WCSS <= lambda/n, GroupLasso:
// sqrt(q_hat*sigma_bar_sq - Qmin) <= lambda*w_j/(2n)); active columns are
// gated on the value identity (L0: observed cluster means; GroupLasso: the
// fixed-point shrinkage of the observed means). Threshold numbers are
// reported for active columns as well.
struct FixedPointRecord {
    int feature = 0;
    bool is_zero = false;
    double threshold_lhs = 0.0;
    double threshold_rhs = 0.0;
    bool condition_holds = false;
    double value_check_maxerr = 0.0;  // active columns only
};

struct FixedPointReport {
    std::vector<FixedPointRecord> records;
    bool all_hold = true;
};

struct FixedPointTolerances {
    double value_l0 = 1e-9;
    double value_gl = 1e-6;
    double threshold_rel = 1e-9;
    double threshold_abs = 1e-12;
};

FixedPointReport fixed_point_check(const MaskedMatrix& m, const FitResult& fit,
                                   const PenaltySpec& spec,
                                   const FixedPointTolerances& tol = {});

}  // namespace rkpod
