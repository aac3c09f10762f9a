#include "rkpod/init.hpp"

#include "rkpod/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace rkpod {

InitPair init_comp(const MaskedMatrix& m, int k, Rng& rng) {
    std::vector<int> complete = m.complete_rows();
    if (static_cast<int>(complete.size()) < k) {
        throw std::invalid_argument(
            "init_comp: fewer than k complete rows; use the imputation-based initialization");
    }
    Matrix sub(static_cast<Index>(complete.size()), m.cols());
    for (std::size_t t = 0; t < complete.size(); ++t) {
        sub.row(static_cast<Index>(t)) = m.values().row(complete[t]);
    }
    InitPair out;
    out.centers = kmeanspp_seed(sub, k, rng);
    out.membership = assign_rows_masked(m, out.centers);
    return out;
}

InitPair init_impt(const MaskedMatrix& m, int k, Rng& rng) {
    const Index n = m.rows();
    const Index p = m.cols();
    if (n < k) throw std::invalid_argument("init_impt: fewer rows than clusters");

    // Column means over observed entries; fully missing columns impute zero.
    Vector col_mean = Vector::Zero(p);
    for (Index j = 0; j < p; ++j) {
        double sum = 0.0;
        Index cnt = 0;
        for (Index i = 0; i < n; ++i) {
            if (!m.observed(i, j)) continue;
            sum += m.values()(i, j);
            ++cnt;
        }
        if (cnt > 0) col_mean(j) = sum / static_cast<double>(cnt);
    }
    Matrix imputed = m.values();
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < p; ++j) {
            if (!m.observed(i, j)) imputed(i, j) = col_mean(j);
        }
    }

    std::vector<int> picks = rng.sample_without_replacement(static_cast<int>(n), k);
    Centers centers(k, p);
    for (int l = 0; l < k; ++l) centers.row(l) = imputed.row(picks[static_cast<std::size_t>(l)]);

    // Jitter duplicated rows until the k centers are pairwise distinct.
    Vector col_sd(p);
    for (Index j = 0; j < p; ++j) {
        double mean = imputed.col(j).mean();
        col_sd(j) = std::sqrt((imputed.col(j).array() - mean).square().mean());
    }
    auto has_duplicate = [&]() {
        for (int a = 0; a < k; ++a) {
            for (int b = a + 1; b < k; ++b) {
                if (centers.row(a) == centers.row(b)) return std::pair<int, int>{a, b};
            }
        }
        return std::pair<int, int>{-1, -1};
    };
    for (auto dup = has_duplicate(); dup.first >= 0; dup = has_duplicate()) {
        for (Index j = 0; j < p; ++j) {
            double scale = col_sd(j) > 0.0 ? col_sd(j) : 1.0;
            centers(dup.second, j) += 1e-6 * scale * rng.normal();
        }
    }

    InitPair out;
    out.centers = centers;
    out.membership = assign_rows(imputed, centers);
    return out;
}

std::vector<Centers> init_sparse(const Centers& pilot_centers, const std::vector<double>& fractions) {
    const Index p = pilot_centers.cols();
    std::vector<int> order(static_cast<std::size_t>(p));
    std::iota(order.begin(), order.end(), 0);
    Vector norms(p);
    for (Index j = 0; j < p; ++j) norms(j) = pilot_centers.col(j).norm();
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return norms(a) > norms(b); });

    std::vector<Centers> out;
    out.reserve(fractions.size());
    for (double f : fractions) {
        if (!(f > 0.0) || f > 1.0) throw std::invalid_argument("init_sparse: fractions must lie in (0, 1]");
        Index keep = static_cast<Index>(std::ceil(f * static_cast<double>(p)));
        Centers c = Centers::Zero(pilot_centers.rows(), p);
        for (Index t = 0; t < keep; ++t) {
            int j = order[static_cast<std::size_t>(t)];
            c.col(j) = pilot_centers.col(j);
        }
        out.push_back(std::move(c));
    }
    return out;
}

std::vector<double> sparse_fractions_default() {
    return {0.01, 0.02, 0.05, 0.10, 0.15, 0.20, 0.30, 0.40, 0.50, 1.0};
}

std::vector<double> sparse_fractions_low_dim() {
    return {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
}

}  // namespace rkpod
