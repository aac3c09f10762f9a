#pragma once

#include "rkpod/masked_matrix.hpp"
#include "rkpod/rng.hpp"
#include "rkpod/types.hpp"

#include <utility>
#include <vector>

namespace rkpod {

// Relative change used by every convergence test in the library.
inline double relative_change(double prev, double cur) {
    return std::abs(prev - cur) / std::max(std::abs(prev), 1e-300);
}

// Nearest-center assignment on complete data; ties go to the lowest cluster
// index. When dist2_out is given it receives each row's squared distance to
// its assigned center.
Membership assign_rows(const Matrix& data, const Centers& c, Vector* dist2_out = nullptr);

// Nearest-center assignment using only each row's observed features. Rows
// with nothing observed tie at distance zero and land in cluster 0.
Membership assign_rows_masked(const MaskedMatrix& m, const Centers& c);

// Per-cluster means and sizes; empty clusters get a zero row.
std::pair<Matrix, IntVector> cluster_means(const Matrix& data, const Membership& u, int k);

// Re-seats empty clusters: the point farthest from its current center becomes
// a singleton cluster. Modifies u, centers, counts and dist2 in place.
void repair_empty_clusters(const Matrix& data, Membership& u, Centers& centers,
                           IntVector& counts, Vector& dist2);

// k-means++ D^2 seeding. Deterministic given the generator state. If the data
// has fewer than k distinct rows, Gaussian jitter at 1e-6 of the data scale is
// added first so k distinct centers exist.
Centers kmeanspp_seed(const Matrix& data, int k, Rng& rng);

// Plain Lloyd iterations from the given centers. loss_trace holds the SSE
// after each assignment/update round and is non-increasing.
FitResult lloyd(const Matrix& data, const Centers& init, const LloydOpts& opts = {});

// Sum of squared residuals over observed entries only.
double kpod_loss(const MaskedMatrix& m, const Membership& u, const Centers& c);

// k-POD: alternate model-based imputation with Lloyd's update on the
// completed matrix. loss_trace holds kpod_loss per outer iteration (the first
// entry is the initial state) and is non-increasing.
FitResult kpod_fit(const MaskedMatrix& m, int k, const Membership& u0, const Centers& c0,
                   const OuterOpts& opts = {});

// One term of the missing-pattern decomposition of the k-POD loss.
struct PatternLoss {
    std::vector<bool> pattern;  // observed-feature indicator
    double weight;              // n_pattern / n
    double loss;                // mean per-point k-means loss on the observed features
};

// Splits (1/n) * kpod_loss with per-point optimal assignment into one term
// per missing pattern present in the data. Test oracle; requires p <= 20.
std::vector<PatternLoss> loss_decomposition(const MaskedMatrix& m, const Centers& c);

}  // namespace rkpod
