#pragma once

#include "rkpod/masked_matrix.hpp"
#include "rkpod/rng.hpp"

namespace rkpod {

// Gaussian mixture with equal component weights, diagonal covariance and the
// signed-block center layout: d informative features (d even) split into two
// halves with entries +-a, the remaining p-d features centered at zero. The
// built-in layout requires k = 4; other k need explicit centers.
struct MixtureSpec {
    int n = 3000;
    int p = 10;
    int k = 4;
    int d = 2;
    double a = 2.0;
    Vector sigma_diag;  // per-feature variances
    Matrix centers;     // optional override (k x p); empty selects the block layout

    static MixtureSpec low_dim(int n = 3000);                    // p=10, d=2, a=2, var (1,1,4,...,4)
    static MixtureSpec high_dim(int n = 3000, double a = 0.8);   // p=100, d=10, var (1,...,1,2,...,2)

    Matrix true_centers() const;
    void validate() const;
};

struct MixtureSample {
    Matrix values;
    Membership labels;
    Centers true_centers;
};

MixtureSample gen_mixture(const MixtureSpec& spec, Rng& rng);

// Each entry missing independently with probability tau.
MaskedMatrix apply_mcar(const Matrix& values, double tau, Rng& rng);

// First column always observed; the rest missing with logistic probability
// driven by the first column: P = 1 / (1 + exp(-psi1 * (x_i1 - psi2))).
MaskedMatrix apply_mar(const Matrix& values, double psi1, double psi2, Rng& rng);

// Self-masked: each entry missing with P = 1 / (1 + exp(-phi1 * (x_ij - phi2))).
MaskedMatrix apply_mnar1(const Matrix& values, double phi1, double phi2, Rng& rng);

// Deterministic: per column, the floor(q*n) smallest entries go missing,
// ties broken by row index.
MaskedMatrix apply_mnar2(const Matrix& values, double q);

enum class LogisticMechanism { Mar, Mnar1 };

// Analytic expected fraction of missing entries over the whole matrix for the
// given slope (first parameter) with the offset fixed.
double expected_missing_fraction(const Matrix& values, LogisticMechanism mechanism,
                                 double slope, double offset);

// Solves for the slope whose expected total missing proportion matches the
// target, by bisection over [1e-4, 1e3]. Works on the analytic expectation so
// the result carries no Monte Carlo noise.
double calibrate_logistic(const Matrix& values, LogisticMechanism mechanism,
                          double offset, double target, double tol = 1e-4);

}  // namespace rkpod
