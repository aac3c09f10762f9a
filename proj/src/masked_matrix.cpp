#include "rkpod/masked_matrix.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace rkpod {

std::vector<int> active_features(const Centers& centers) {
    std::vector<int> out;
    for (Index j = 0; j < centers.cols(); ++j) {
        if (centers.col(j).norm() > 0.0) out.push_back(static_cast<int>(j));
    }
    return out;
}

MaskedMatrix::MaskedMatrix(const Matrix& values, const BoolMatrix& mask) {
    if (values.rows() != mask.rows() || values.cols() != mask.cols()) {
        throw std::invalid_argument("MaskedMatrix: values and mask dimensions differ");
    }
    if (values.rows() < 1 || values.cols() < 1) {
        throw std::invalid_argument("MaskedMatrix: matrix must be nonempty");
    }
    values_ = mask.array().select(values, Matrix::Zero(values.rows(), values.cols()));
    mask_ = mask;
}

Index MaskedMatrix::observed_count() const {
    return mask_.cast<Index>().sum();
}

bool MaskedMatrix::fully_observed() const {
    return observed_count() == rows() * cols();
}

std::vector<int> MaskedMatrix::complete_rows() const {
    std::vector<int> out;
    for (Index i = 0; i < rows(); ++i) {
        if (mask_.row(i).all()) out.push_back(static_cast<int>(i));
    }
    return out;
}

MaskedMatrix MaskedMatrix::subset_rows(const std::vector<int>& idx) const {
    Matrix v(static_cast<Index>(idx.size()), cols());
    BoolMatrix r(static_cast<Index>(idx.size()), cols());
    for (std::size_t t = 0; t < idx.size(); ++t) {
        if (idx[t] < 0 || idx[t] >= rows()) {
            throw std::invalid_argument("subset_rows: index out of range");
        }
        v.row(static_cast<Index>(t)) = values_.row(idx[t]);
        r.row(static_cast<Index>(t)) = mask_.row(idx[t]);
    }
    return MaskedMatrix(v, r);
}

MaskedMatrix project(const Matrix& values, const BoolMatrix& mask) {
    return MaskedMatrix(values, mask);
}

Matrix impute_with_model(const MaskedMatrix& m, const Membership& u, const Centers& c) {
    if (u.size() != m.rows()) {
        throw std::invalid_argument("impute_with_model: membership length mismatch");
    }
    if (c.cols() != m.cols()) {
        throw std::invalid_argument("impute_with_model: centers column mismatch");
    }
    Matrix out = m.values();
    const int k = static_cast<int>(c.rows());
    for (Index i = 0; i < m.rows(); ++i) {
        int l = u(i);
        if (l < 0 || l >= k) throw std::invalid_argument("impute_with_model: cluster index out of range");
        for (Index j = 0; j < m.cols(); ++j) {
            if (!m.observed(i, j)) out(i, j) = c(l, j);
        }
    }
    return out;
}

ColumnStats column_stats(const MaskedMatrix& m, const Membership& u, int k, Index j) {
    if (j < 0 || j >= m.cols()) throw std::invalid_argument("column_stats: feature index out of range");
    if (u.size() != m.rows()) throw std::invalid_argument("column_stats: membership length mismatch");
    if (k < 1) throw std::invalid_argument("column_stats: k must be positive");

    const Index n = m.rows();
    ColumnStats stats;
    stats.cluster_means = Vector::Zero(k);
    stats.cluster_observed = IntVector::Zero(k);

    std::vector<double> observed;
    observed.reserve(static_cast<std::size_t>(n));
    Vector sums = Vector::Zero(k);
    double sumsq = 0.0;
    for (Index i = 0; i < n; ++i) {
        int l = u(i);
        if (l < 0 || l >= k) throw std::invalid_argument("column_stats: cluster index out of range");
        if (!m.observed(i, j)) continue;
        double x = m.values()(i, j);
        observed.push_back(x);
        sums(l) += x;
        stats.cluster_observed(l) += 1;
        sumsq += x * x;
    }

    const Index n_obs = static_cast<Index>(observed.size());
    stats.q_hat = static_cast<double>(n_obs) / static_cast<double>(n);
    if (n_obs == 0) {
        stats.fully_missing = true;
        for (int l = 0; l < k; ++l) stats.empty_clusters.push_back(l);
        return stats;
    }

    stats.sigma_bar_sq = sumsq / static_cast<double>(n_obs);
    for (int l = 0; l < k; ++l) {
        if (stats.cluster_observed(l) > 0) {
            stats.cluster_means(l) = sums(l) / static_cast<double>(stats.cluster_observed(l));
        } else {
            stats.empty_clusters.push_back(l);
        }
    }

    double wcss = 0.0;
    for (Index i = 0; i < n; ++i) {
        if (!m.observed(i, j)) continue;
        double d = m.values()(i, j) - stats.cluster_means(u(i));
        wcss += d * d;
    }
    stats.wcss = wcss / static_cast<double>(n);
    stats.q_min = kmeans1d_min_sse(observed, k) / static_cast<double>(n);
    return stats;
}

double kmeans1d_min_sse(std::vector<double> values, int k) {
    if (k < 1) throw std::invalid_argument("kmeans1d_min_sse: k must be positive");
    const int n = static_cast<int>(values.size());
    if (n == 0) return 0.0;
    if (k >= n) return 0.0;
    std::sort(values.begin(), values.end());

    // Prefix sums for O(1) SSE of contiguous groups.
    std::vector<double> s1(n + 1, 0.0), s2(n + 1, 0.0);
    for (int i = 0; i < n; ++i) {
        s1[i + 1] = s1[i] + values[i];
        s2[i + 1] = s2[i] + values[i] * values[i];
    }
    auto group_sse = [&](int a, int b) {  // values[a..b], inclusive
        double cnt = static_cast<double>(b - a + 1);
        double sum = s1[b + 1] - s1[a];
        double sq = s2[b + 1] - s2[a];
        double sse = sq - sum * sum / cnt;
        return sse > 0.0 ? sse : 0.0;
    };

    const double inf = std::numeric_limits<double>::infinity();
    // dp[i] = min SSE of the first i sorted values using the current number of groups.
    std::vector<double> prev(n + 1, inf), cur(n + 1, inf);
    prev[0] = 0.0;
    for (int i = 1; i <= n; ++i) prev[i] = group_sse(0, i - 1);
    for (int c = 2; c <= k; ++c) {
        cur.assign(n + 1, inf);
        cur[0] = 0.0;
        for (int i = 1; i <= n; ++i) {
            double best = inf;
            for (int t = 1; t <= i; ++t) {
                double cand = prev[t - 1] + group_sse(t - 1, i - 1);
                if (cand < best) best = cand;
            }
            // Fewer nonempty groups than c is admissible too.
            if (prev[i] < best) best = prev[i];
            cur[i] = best;
        }
        prev.swap(cur);
    }
    return prev[n];
}

}  // namespace rkpod
