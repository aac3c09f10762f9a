#pragma once

#include "rkpod/rng.hpp"
#include "rkpod/synthetic.hpp"
#include "rkpod/types.hpp"

namespace rkpod {

// Sum over estimated centers of the squared distance to the NEAREST true
// center. Deliberately each-to-nearest, not a bijective matching, and
// therefore not symmetric in its arguments.
double mse_centers(const Centers& est, const Centers& truth);

// Sensitivity variant: optimal one-to-one matching (exhaustive over
// permutations, k <= 10).
double mse_centers_matched(const Centers& est, const Centers& truth);

// Large-sample stand-in for the population centers: multi-restart k-means on
// a fresh complete draw of size N from the same mixture.
Centers surrogate_truth(const MixtureSpec& spec, int N, Rng& rng, int restarts = 10);

// Classification error rate: fraction of unordered pairs whose co-assignment
// indicators differ between the two partitions. Counting is done through the
// contingency table, O(n + k1*k2).
double cer(const Membership& a, const Membership& b);

// Assign each validation row to the nearest estimated center (full Euclidean,
// ties to the lowest index) and score against the true labels.
double predictive_cer(const Centers& est, const Matrix& validation, const Membership& truth);

struct EvalReport {
    double mse = 0.0;
    double cer = 0.0;
    double predictive_cer = -1.0;  // negative when not evaluated
    int active_features = 0;
    double wall_time_sec = 0.0;
};

}  // namespace rkpod
