#include "rkpod/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace rkpod {

namespace {

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

MixtureSpec MixtureSpec::low_dim(int n) {
    MixtureSpec spec;
    spec.n = n;
    spec.p = 10;
    spec.k = 4;
    spec.d = 2;
    spec.a = 2.0;
    spec.sigma_diag = Vector::Constant(10, 4.0);
    spec.sigma_diag(0) = 1.0;
    spec.sigma_diag(1) = 1.0;
    return spec;
}

MixtureSpec MixtureSpec::high_dim(int n, double a) {
    MixtureSpec spec;
    spec.n = n;
    spec.p = 100;
    spec.k = 4;
    spec.d = 10;
    spec.a = a;
    spec.sigma_diag = Vector::Constant(100, 2.0);
    spec.sigma_diag.head(10).setConstant(1.0);
    return spec;
}

void MixtureSpec::validate() const {
    if (n < 1 || p < 1) throw std::invalid_argument("MixtureSpec: n and p must be positive");
    if (sigma_diag.size() != p) throw std::invalid_argument("MixtureSpec: sigma_diag length must equal p");
    if ((sigma_diag.array() <= 0.0).any()) throw std::invalid_argument("MixtureSpec: variances must be positive");
    if (centers.size() > 0) {
        if (centers.rows() != k || centers.cols() != p) {
            throw std::invalid_argument("MixtureSpec: centers must be k x p");
        }
        return;
    }
    if (k != 4) throw std::invalid_argument("MixtureSpec: block layout requires k = 4; supply centers");
    if (d % 2 != 0 || d < 2 || d > p) throw std::invalid_argument("MixtureSpec: d must be even and in [2, p]");
}

Matrix MixtureSpec::true_centers() const {
    validate();
    if (centers.size() > 0) return centers;
    Matrix out = Matrix::Zero(k, p);
    const int half = d / 2;
    const double signs[4][2] = {{1.0, 1.0}, {1.0, -1.0}, {-1.0, 1.0}, {-1.0, -1.0}};
    for (int l = 0; l < 4; ++l) {
        out.row(l).segment(0, half).setConstant(signs[l][0] * a);
        out.row(l).segment(half, half).setConstant(signs[l][1] * a);
    }
    return out;
}

MixtureSample gen_mixture(const MixtureSpec& spec, Rng& rng) {
    spec.validate();
    MixtureSample sample;
    sample.true_centers = spec.true_centers();
    sample.values.resize(spec.n, spec.p);
    sample.labels.resize(spec.n);
    Vector sd = spec.sigma_diag.array().sqrt();
    for (int i = 0; i < spec.n; ++i) {
        int z = rng.uniform_int(spec.k);
        sample.labels(i) = z;
        for (int j = 0; j < spec.p; ++j) {
            sample.values(i, j) = sample.true_centers(z, j) + sd(j) * rng.normal();
        }
    }
    return sample;
}

MaskedMatrix apply_mcar(const Matrix& values, double tau, Rng& rng) {
    if (tau < 0.0 || tau > 1.0) throw std::invalid_argument("apply_mcar: tau must be in [0, 1]");
    BoolMatrix mask(values.rows(), values.cols());
    for (Index i = 0; i < values.rows(); ++i) {
        for (Index j = 0; j < values.cols(); ++j) {
            mask(i, j) = rng.uniform() >= tau;
        }
    }
    return MaskedMatrix(values, mask);
}

MaskedMatrix apply_mar(const Matrix& values, double psi1, double psi2, Rng& rng) {
    if (values.cols() < 2) throw std::invalid_argument("apply_mar: needs at least two columns");
    BoolMatrix mask(values.rows(), values.cols());
    for (Index i = 0; i < values.rows(); ++i) {
        mask(i, 0) = true;
        double prob = logistic(psi1 * (values(i, 0) - psi2));
        for (Index j = 1; j < values.cols(); ++j) {
            mask(i, j) = rng.uniform() >= prob;
        }
    }
    return MaskedMatrix(values, mask);
}

MaskedMatrix apply_mnar1(const Matrix& values, double phi1, double phi2, Rng& rng) {
    BoolMatrix mask(values.rows(), values.cols());
    for (Index i = 0; i < values.rows(); ++i) {
        for (Index j = 0; j < values.cols(); ++j) {
            double prob = logistic(phi1 * (values(i, j) - phi2));
            mask(i, j) = rng.uniform() >= prob;
        }
    }
    return MaskedMatrix(values, mask);
}

MaskedMatrix apply_mnar2(const Matrix& values, double q) {
    if (q < 0.0 || q >= 1.0) throw std::invalid_argument("apply_mnar2: q must be in [0, 1)");
    const Index n = values.rows();
    BoolMatrix mask = BoolMatrix::Constant(n, values.cols(), true);
    const Index cut = static_cast<Index>(std::floor(q * static_cast<double>(n)));
    if (cut == 0) return MaskedMatrix(values, mask);
    std::vector<Index> order(static_cast<std::size_t>(n));
    for (Index j = 0; j < values.cols(); ++j) {
        std::iota(order.begin(), order.end(), Index{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](Index a, Index b) { return values(a, j) < values(b, j); });
        for (Index t = 0; t < cut; ++t) mask(order[static_cast<std::size_t>(t)], j) = false;
    }
    return MaskedMatrix(values, mask);
}

double expected_missing_fraction(const Matrix& values, LogisticMechanism mechanism,
                                 double slope, double offset) {
    const Index n = values.rows();
    const Index p = values.cols();
    double total = 0.0;
    if (mechanism == LogisticMechanism::Mar) {
        if (p < 2) throw std::invalid_argument("expected_missing_fraction: MAR needs p >= 2");
        for (Index i = 0; i < n; ++i) {
            total += static_cast<double>(p - 1) * logistic(slope * (values(i, 0) - offset));
        }
    } else {
        for (Index i = 0; i < n; ++i) {
            for (Index j = 0; j < p; ++j) {
                total += logistic(slope * (values(i, j) - offset));
            }
        }
    }
    return total / static_cast<double>(n * p);
}

double calibrate_logistic(const Matrix& values, LogisticMechanism mechanism,
                          double offset, double target, double tol) {
    if (!(target > 0.0) || !(target < 1.0)) {
        throw std::invalid_argument("calibrate_logistic: target must be in (0, 1)");
    }
    const double lo_bound = 1e-4;
    const double hi_bound = 1e3;
    auto gap = [&](double slope) {
        return expected_missing_fraction(values, mechanism, slope, offset) - target;
    };

    // The expectation is not globally monotone in the slope, so locate a sign
    // change on a log-spaced scan and bisect inside it.
    double lo = lo_bound, hi = hi_bound;
    double g_lo = gap(lo);
    if (std::abs(g_lo) <= tol) return lo;
    bool found = false;
    const int scan_points = 200;
    double prev = lo, g_prev = g_lo;
    for (int s = 1; s <= scan_points; ++s) {
        double x = lo_bound * std::pow(hi_bound / lo_bound, static_cast<double>(s) / scan_points);
        double g = gap(x);
        if (std::abs(g) <= tol) return x;
        if ((g_prev < 0.0) != (g < 0.0)) {
            lo = prev;
            hi = x;
            g_lo = g_prev;
            found = true;
            break;
        }
        prev = x;
        g_prev = g;
    }
    if (!found) {
        throw std::runtime_error("calibrate_logistic: target proportion unreachable within slope bracket");
    }
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        double g = gap(mid);
        if (std::abs(g) <= tol) return mid;
        if ((g < 0.0) == (g_lo < 0.0)) {
            lo = mid;
            g_lo = g;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace rkpod
