#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace rkpod {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using IntVector = Eigen::VectorXi;
using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;
using Index = Eigen::Index;

// Cluster assignment, one index in [0, k) per data row.
using Membership = IntVector;

// Cluster centers, one center per row (k x p).
using Centers = Matrix;

// Features whose center column has nonzero norm.
std::vector<int> active_features(const Centers& centers);

struct LloydOpts {
    int max_iter = 100;
    double tol = 1e-6;
};

struct OuterOpts {
    int max_outer = 200;
    double tol = 1e-6;
    // When positive, convergence additionally requires the largest absolute
    // center change per outer iteration to fall below this. Loss changes are
    // quadratic in the distance to a fixed point, so loss-only stopping can
    // leave the centers several orders of magnitude less converged; fits that
    // feed the per-feature optimality audit need this extra criterion.
    double center_tol = 0.0;
    LloydOpts inner;
};

struct FitResult {
    Membership membership;
    Centers centers;
    std::vector<double> loss_trace;  // objective per outer iteration, first entry is the initial state
    int outer_iters = 0;
    long inner_iters_total = 0;
    std::vector<int> active;
    std::uint64_t seed = 0;
    bool converged = false;

    int k() const { return static_cast<int>(centers.rows()); }
    double final_loss() const { return loss_trace.empty() ? 0.0 : loss_trace.back(); }
};

}  // namespace rkpod
