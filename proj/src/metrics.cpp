#include "rkpod/metrics.hpp"

#include "rkpod/kmeans.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace rkpod {

double mse_centers(const Centers& est, const Centers& truth) {
    if (est.cols() != truth.cols()) throw std::invalid_argument("mse_centers: dimension mismatch");
    double total = 0.0;
    for (Index l = 0; l < est.rows(); ++l) {
        double best = std::numeric_limits<double>::infinity();
        for (Index t = 0; t < truth.rows(); ++t) {
            best = std::min(best, (est.row(l) - truth.row(t)).squaredNorm());
        }
        total += best;
    }
    return total;
}

double mse_centers_matched(const Centers& est, const Centers& truth) {
    if (est.rows() != truth.rows() || est.cols() != truth.cols()) {
        throw std::invalid_argument("mse_centers_matched: shapes must agree");
    }
    const int k = static_cast<int>(est.rows());
    if (k > 10) throw std::invalid_argument("mse_centers_matched: exhaustive matching limited to k <= 10");
    std::vector<int> perm(static_cast<std::size_t>(k));
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double total = 0.0;
        for (int l = 0; l < k; ++l) {
            total += (est.row(l) - truth.row(perm[static_cast<std::size_t>(l)])).squaredNorm();
        }
        best = std::min(best, total);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

Centers surrogate_truth(const MixtureSpec& spec, int N, Rng& rng, int restarts) {
    MixtureSpec big = spec;
    big.n = N;
    MixtureSample sample = gen_mixture(big, rng);
    Centers best_centers;
    double best_loss = std::numeric_limits<double>::infinity();
    for (int r = 0; r < restarts; ++r) {
        Centers seed = kmeanspp_seed(sample.values, spec.k, rng);
        FitResult fit = lloyd(sample.values, seed);
        if (fit.final_loss() < best_loss) {
            best_loss = fit.final_loss();
            best_centers = fit.centers;
        }
    }
    return best_centers;
}

double cer(const Membership& a, const Membership& b) {
    const Index n = a.size();
    if (b.size() != n) throw std::invalid_argument("cer: partitions must have equal length");
    if (n < 2) throw std::invalid_argument("cer: needs at least two points");
    int ka = a.size() ? a.maxCoeff() + 1 : 0;
    int kb = b.size() ? b.maxCoeff() + 1 : 0;
    if (a.minCoeff() < 0 || b.minCoeff() < 0) throw std::invalid_argument("cer: negative labels");

    Matrix table = Matrix::Zero(ka, kb);
    Vector row = Vector::Zero(ka), col = Vector::Zero(kb);
    for (Index i = 0; i < n; ++i) {
        table(a(i), b(i)) += 1.0;
        row(a(i)) += 1.0;
        col(b(i)) += 1.0;
    }
    auto pairs2 = [](double c) { return 0.5 * c * (c - 1.0); };
    double same_a = 0.0, same_b = 0.0, same_both = 0.0;
    for (int l = 0; l < ka; ++l) same_a += pairs2(row(l));
    for (int l = 0; l < kb; ++l) same_b += pairs2(col(l));
    for (int la = 0; la < ka; ++la) {
        for (int lb = 0; lb < kb; ++lb) same_both += pairs2(table(la, lb));
    }
    double disagree = same_a + same_b - 2.0 * same_both;
    double total = pairs2(static_cast<double>(n));
    return disagree / total;
}

double predictive_cer(const Centers& est, const Matrix& validation, const Membership& truth) {
    if (validation.rows() != truth.size()) {
        throw std::invalid_argument("predictive_cer: validation labels length mismatch");
    }
    Membership pred = assign_rows(validation, est);
    return cer(pred, truth);
}

}  // namespace rkpod
