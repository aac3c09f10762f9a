#include "rkpod/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

namespace rkpod {

Membership assign_rows(const Matrix& data, const Centers& c, Vector* dist2_out) {
    const Index n = data.rows();
    const int k = static_cast<int>(c.rows());
    if (c.cols() != data.cols()) throw std::invalid_argument("assign_rows: dimension mismatch");
    if (k < 1) throw std::invalid_argument("assign_rows: no centers");
    Membership u(n);
    if (dist2_out) dist2_out->resize(n);
    for (Index i = 0; i < n; ++i) {
        int best = 0;
        double best_d = (data.row(i) - c.row(0)).squaredNorm();
        for (int l = 1; l < k; ++l) {
            double d = (data.row(i) - c.row(l)).squaredNorm();
            if (d < best_d) {
                best_d = d;
                best = l;
            }
        }
        u(i) = best;
        if (dist2_out) (*dist2_out)(i) = best_d;
    }
    return u;
}

Membership assign_rows_masked(const MaskedMatrix& m, const Centers& c) {
    const Index n = m.rows();
    const Index p = m.cols();
    const int k = static_cast<int>(c.rows());
    if (c.cols() != p) throw std::invalid_argument("assign_rows_masked: dimension mismatch");
    Membership u(n);
    for (Index i = 0; i < n; ++i) {
        int best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (int l = 0; l < k; ++l) {
            double d = 0.0;
            for (Index j = 0; j < p; ++j) {
                if (!m.observed(i, j)) continue;
                double r = m.values()(i, j) - c(l, j);
                d += r * r;
            }
            if (d < best_d) {
                best_d = d;
                best = l;
            }
        }
        u(i) = best;
    }
    return u;
}

std::pair<Matrix, IntVector> cluster_means(const Matrix& data, const Membership& u, int k) {
    if (u.size() != data.rows()) throw std::invalid_argument("cluster_means: membership length mismatch");
    Matrix sums = Matrix::Zero(k, data.cols());
    IntVector counts = IntVector::Zero(k);
    for (Index i = 0; i < data.rows(); ++i) {
        int l = u(i);
        if (l < 0 || l >= k) throw std::invalid_argument("cluster_means: cluster index out of range");
        sums.row(l) += data.row(i);
        counts(l) += 1;
    }
    for (int l = 0; l < k; ++l) {
        if (counts(l) > 0) sums.row(l) /= static_cast<double>(counts(l));
    }
    return {sums, counts};
}

void repair_empty_clusters(const Matrix& data, Membership& u, Centers& centers,
                           IntVector& counts, Vector& dist2) {
    const int k = static_cast<int>(centers.rows());
    for (int l = 0; l < k; ++l) {
        if (counts(l) > 0) continue;
        // Farthest point whose departure leaves its cluster nonempty; ties go
        // to the lowest row index.
        Index pick = -1;
        double best = -1.0;
        for (Index i = 0; i < data.rows(); ++i) {
            if (counts(u(i)) <= 1) continue;
            if (dist2(i) > best) {
                best = dist2(i);
                pick = i;
            }
        }
        if (pick < 0) continue;  // fewer distinct points than clusters
        counts(u(pick)) -= 1;
        u(pick) = l;
        counts(l) = 1;
        centers.row(l) = data.row(pick);
        dist2(pick) = 0.0;
    }
}

Centers kmeanspp_seed(const Matrix& data, int k, Rng& rng) {
    const Index n = data.rows();
    if (k < 1) throw std::invalid_argument("kmeanspp_seed: k must be positive");
    if (n < k) {
        throw std::invalid_argument(
            "kmeanspp_seed: fewer rows than clusters; fall back to the imputation-based initialization");
    }

    // Count distinct rows; jitter when there are not enough for k centers.
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    auto row_less = [&](int a, int b) {
        for (Index j = 0; j < data.cols(); ++j) {
            if (data(a, j) != data(b, j)) return data(a, j) < data(b, j);
        }
        return false;
    };
    std::sort(order.begin(), order.end(), row_less);
    Index distinct = 1;
    for (std::size_t t = 1; t < order.size(); ++t) {
        if (row_less(order[t - 1], order[t])) ++distinct;
    }

    Matrix pool = data;
    if (distinct < k) {
        double mean = data.mean();
        double scale = std::sqrt((data.array() - mean).square().mean());
        if (scale <= 0.0) scale = 1.0;
        for (Index i = 0; i < pool.rows(); ++i) {
            for (Index j = 0; j < pool.cols(); ++j) {
                pool(i, j) += 1e-6 * scale * rng.normal();
            }
        }
    }

    Centers centers(k, pool.cols());
    std::vector<double> d2(static_cast<std::size_t>(n), 0.0);
    int first = rng.uniform_int(static_cast<int>(n));
    centers.row(0) = pool.row(first);
    for (Index i = 0; i < n; ++i) d2[static_cast<std::size_t>(i)] = (pool.row(i) - centers.row(0)).squaredNorm();
    for (int l = 1; l < k; ++l) {
        int pick = rng.sample_weighted(d2);
        centers.row(l) = pool.row(pick);
        for (Index i = 0; i < n; ++i) {
            double d = (pool.row(i) - centers.row(l)).squaredNorm();
            std::size_t t = static_cast<std::size_t>(i);
            if (d < d2[t]) d2[t] = d;
        }
    }
    return centers;
}

FitResult lloyd(const Matrix& data, const Centers& init, const LloydOpts& opts) {
    const int k = static_cast<int>(init.rows());
    if (k < 1) throw std::invalid_argument("lloyd: k must be positive");
    if (init.cols() != data.cols()) throw std::invalid_argument("lloyd: dimension mismatch");

    FitResult res;
    Centers centers = init;
    Membership u;
    Vector dist2;
    for (int t = 0; t < opts.max_iter; ++t) {
        u = assign_rows(data, centers, &dist2);
        auto [means, counts] = cluster_means(data, u, k);
        if ((counts.array() == 0).any()) {
            repair_empty_clusters(data, u, centers, counts, dist2);
            std::tie(means, counts) = cluster_means(data, u, k);
        }
        centers = means;
        double sse = 0.0;
        for (Index i = 0; i < data.rows(); ++i) {
            sse += (data.row(i) - centers.row(u(i))).squaredNorm();
        }
        res.loss_trace.push_back(sse);
        res.outer_iters = t + 1;
        if (t > 0 && relative_change(res.loss_trace[static_cast<std::size_t>(t) - 1], sse) < opts.tol) {
            res.converged = true;
            break;
        }
    }
    res.membership = u;
    res.centers = centers;
    res.inner_iters_total = res.outer_iters;
    res.active = active_features(centers);
    return res;
}

double kpod_loss(const MaskedMatrix& m, const Membership& u, const Centers& c) {
    if (u.size() != m.rows()) throw std::invalid_argument("kpod_loss: membership length mismatch");
    if (c.cols() != m.cols()) throw std::invalid_argument("kpod_loss: centers column mismatch");
    const int k = static_cast<int>(c.rows());
    double total = 0.0;
    for (Index i = 0; i < m.rows(); ++i) {
        int l = u(i);
        if (l < 0 || l >= k) throw std::invalid_argument("kpod_loss: cluster index out of range");
        for (Index j = 0; j < m.cols(); ++j) {
            if (!m.observed(i, j)) continue;
            double d = m.values()(i, j) - c(l, j);
            total += d * d;
        }
    }
    return total;
}

FitResult kpod_fit(const MaskedMatrix& m, int k, const Membership& u0, const Centers& c0,
                   const OuterOpts& opts) {
    if (c0.rows() != k) throw std::invalid_argument("kpod_fit: init centers do not match k");
    FitResult res;
    Membership u = u0;
    Centers c = c0;
    res.loss_trace.push_back(kpod_loss(m, u, c));
    for (int t = 0; t < opts.max_outer; ++t) {
        Matrix xhat = impute_with_model(m, u, c);
        FitResult inner = lloyd(xhat, c, opts.inner);
        u = inner.membership;
        double center_delta = (inner.centers - c).cwiseAbs().maxCoeff();
        c = inner.centers;
        res.inner_iters_total += inner.outer_iters;
        double loss = kpod_loss(m, u, c);
        res.loss_trace.push_back(loss);
        res.outer_iters = t + 1;
        if (relative_change(res.loss_trace[res.loss_trace.size() - 2], loss) < opts.tol &&
            (opts.center_tol <= 0.0 || center_delta < opts.center_tol)) {
            res.converged = true;
            break;
        }
    }
    res.membership = u;
    res.centers = c;
    res.active = active_features(c);
    return res;
}

std::vector<PatternLoss> loss_decomposition(const MaskedMatrix& m, const Centers& c) {
    const Index n = m.rows();
    const Index p = m.cols();
    if (p > 20) throw std::invalid_argument("loss_decomposition: p must be at most 20");
    const int k = static_cast<int>(c.rows());

    std::map<std::vector<bool>, std::vector<Index>> groups;
    for (Index i = 0; i < n; ++i) {
        std::vector<bool> pattern(static_cast<std::size_t>(p));
        for (Index j = 0; j < p; ++j) pattern[static_cast<std::size_t>(j)] = m.observed(i, j);
        groups[pattern].push_back(i);
    }

    std::vector<PatternLoss> out;
    out.reserve(groups.size());
    for (const auto& [pattern, rows] : groups) {
        double total = 0.0;
        for (Index i : rows) {
            double best = std::numeric_limits<double>::infinity();
            for (int l = 0; l < k; ++l) {
                double d = 0.0;
                for (Index j = 0; j < p; ++j) {
                    if (!pattern[static_cast<std::size_t>(j)]) continue;
                    double r = m.values()(i, j) - c(l, j);
                    d += r * r;
                }
                best = std::min(best, d);
            }
            total += best;
        }
        PatternLoss term;
        term.pattern = pattern;
        term.weight = static_cast<double>(rows.size()) / static_cast<double>(n);
        term.loss = total / static_cast<double>(rows.size());
        out.push_back(std::move(term));
    }
    return out;
}

}  // namespace rkpod
