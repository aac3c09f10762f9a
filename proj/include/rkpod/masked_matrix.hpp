#pragma once

#include "rkpod/types.hpp"

#include <vector>

namespace rkpod {

// Partially observed data matrix: values plus an observation mask
// (true = observed). Values at unobserved positions are stored as zero; the
// projection is applied on construction so behaviour never depends on what a
// caller left in masked cells. Immutable after construction and safe to share
// across threads.
class MaskedMatrix {
public:
    MaskedMatrix() = default;
    MaskedMatrix(const Matrix& values, const BoolMatrix& mask);

    Index rows() const { return values_.rows(); }
    Index cols() const { return values_.cols(); }
    const Matrix& values() const { return values_; }
    const BoolMatrix& mask() const { return mask_; }
    bool observed(Index i, Index j) const { return mask_(i, j); }

    Index observed_count() const;
    bool fully_observed() const;

    // Row indices with every feature observed.
    std::vector<int> complete_rows() const;

    MaskedMatrix subset_rows(const std::vector<int>& idx) const;

private:
    Matrix values_;
    BoolMatrix mask_;
};

// Zero out unobserved entries.
MaskedMatrix project(const Matrix& values, const BoolMatrix& mask);

// Complete matrix: observed positions keep the data, missing positions take
// the assigned cluster's center coordinate.
Matrix impute_with_model(const MaskedMatrix& m, const Membership& u, const Centers& c);

// Per-feature observed-data statistics for one column j under a given
// partition. All quantities are normalized by the full row count n where the
// definitions call for it. A fully missing column is flagged and reports all
// statistics as zero; clusters with no observed entry in the column get a
// zero mean and are listed in empty_clusters.
struct ColumnStats {
    double q_hat = 0.0;          // observed fraction in the column
    double sigma_bar_sq = 0.0;   // raw second moment of observed values (not mean-centered)
    double wcss = 0.0;           // within-cluster sum of squares over observed entries / n
    double q_min = 0.0;          // exact minimum of the masked 1-d k-means objective / n
    Vector cluster_means;        // observed per-cluster means, zero where undefined
    IntVector cluster_observed;  // observed entries per cluster in this column
    bool fully_missing = false;
    std::vector<int> empty_clusters;
};

ColumnStats column_stats(const MaskedMatrix& m, const Membership& u, int k, Index j);

// Exact 1-d k-means: minimum SSE over all partitions into at most k clusters,
// by dynamic programming over contiguous groups of the sorted values.
// O(k n^2); certifies the minimum rather than approximating it.
double kmeans1d_min_sse(std::vector<double> values, int k);

}  // namespace rkpod
