#include "rkpod/regularized.hpp"

#include "helpers.hpp"
#include "rkpod/synthetic.hpp"

#include <doctest.h>

#include <cmath>

using namespace rkpod;
using test::random_mask;
using test::random_matrix;
using test::random_membership_all_nonempty;

namespace {

bool trace_non_increasing(const std::vector<double>& trace, double slack = 1e-9) {
    for (std::size_t t = 1; t < trace.size(); ++t) {
        if (trace[t] > trace[t - 1] + slack) return false;
    }
    return true;
}

double gl_objective(const Matrix& xhat, const Membership& u, const Centers& c, double lambda,
                    const Vector& w) {
    double total = 0.0;
    for (Index i = 0; i < xhat.rows(); ++i) total += (xhat.row(i) - c.row(u(i))).squaredNorm();
    for (Index j = 0; j < c.cols(); ++j) total += lambda * w(j) * c.col(j).norm();
    return total;
}

// Two relevant features with +-3 centers, the rest noise; MCAR-style mask.
struct SmallInstance {
    MaskedMatrix data;
    Membership labels;
};

SmallInstance make_instance(int n, int p, double observe_prob, Rng& rng) {
    MixtureSpec spec;
    spec.n = n;
    spec.p = p;
    spec.k = 2;
    spec.sigma_diag = Vector::Constant(p, 1.0);
    spec.centers = Matrix::Zero(2, p);
    spec.centers(0, 0) = 3.0;
    spec.centers(0, 1) = -3.0;
    spec.centers(1, 0) = -3.0;
    spec.centers(1, 1) = 3.0;
    MixtureSample sample = gen_mixture(spec, rng);
    BoolMatrix mask = random_mask(n, p, observe_prob, rng);
    return {MaskedMatrix(sample.values, mask), sample.labels};
}

}  // namespace

TEST_CASE("penalty_value for both penalty types") {
    Centers m(3, 2);
    m << 1, 0, 0, 0, 2, 0;  // col0 = (1,0,2), col1 = 0
    CHECK(penalty_value(Centers::Zero(3, 2), PenaltySpec::l0(1.0)) == 0.0);
    CHECK(penalty_value(m, PenaltySpec::l0(1.0)) == 1.0);
    Vector w(2);
    w << 1, 2;
    CHECK(penalty_value(Centers::Zero(3, 2), PenaltySpec::group_lasso(1.0, w)) == 0.0);
    CHECK(penalty_value(m, PenaltySpec::group_lasso(1.0, w)) == doctest::Approx(std::sqrt(5.0)));
}

TEST_CASE("reg_loss composes the masked loss and the penalty") {
    Matrix v(2, 2);
    v << 1, 9, 3, 4;
    BoolMatrix mask(2, 2);
    mask << true, false, true, true;
    MaskedMatrix m(v, mask);
    Membership u = Membership::Zero(2);
    Centers c(1, 2);
    c << 2, 4;  // kpod_loss = 2

    CHECK(reg_loss(m, u, c, PenaltySpec::l0(0.0)) == doctest::Approx(kpod_loss(m, u, c)));

    Centers one_active(1, 2);
    one_active << 2, 0;
    // kpod_loss with this center: (1-2)^2 + (3-2)^2 + (4-0)^2 = 18; one active column
    CHECK(reg_loss(m, u, one_active, PenaltySpec::l0(3.0)) == doctest::Approx(18.0 + 3.0));

    // group lasso with the verified sqrt(5) penalty at lambda 1
    Centers gl(3, 2);
    gl << 1, 0, 0, 0, 2, 0;
    Membership u3 = Membership::Zero(2);
    Vector w(2);
    w << 1, 2;
    CHECK(reg_loss(m, u3, gl, PenaltySpec::group_lasso(1.0, w)) ==
          doctest::Approx(kpod_loss(m, u3, gl) + std::sqrt(5.0)));
}

TEST_CASE("default and uniform weights") {
    Centers c(2, 3);
    c << 2, 0, 1, 0, 0, 1;  // column norms 2, 0, sqrt(2)
    Vector w = default_weights(c);
    CHECK(w(0) == doctest::Approx(0.5));
    CHECK(w(1) == doctest::Approx(kWeightCap));
    CHECK(w(2) == doctest::Approx(1.0 / std::sqrt(2.0)));
    Vector uw = uniform_weights(3, 4);
    CHECK(uw(0) == doctest::Approx(2.0));
    CHECK(uw.size() == 3);
}

TEST_CASE("assign_step matches the tie and nearest rules") {
    Matrix x(3, 1);
    x << 5, 0, 8;
    Centers c(2, 1);
    c << 0, 8;
    Membership u = assign_step(x, c);
    CHECK(u(0) == 1);  // 25 vs 9
    CHECK(u(1) == 0);
    CHECK(u(2) == 1);

    Matrix tie(1, 1);
    tie << 4;
    CHECK(assign_step(tie, c)(0) == 0);
}

TEST_CASE("center_update_l0 keep-or-kill on the hand example") {
    Matrix x(4, 1);
    x << 1, 3, 10, 12;
    Membership u(4);
    u << 0, 0, 1, 1;
    // ||x||^2 = 254, residual at means (2,11) is 4.
    Centers kept = center_update_l0(x, u, 2, 100.0);
    CHECK(kept(0, 0) == doctest::Approx(2.0));
    CHECK(kept(1, 0) == doctest::Approx(11.0));
    Centers killed = center_update_l0(x, u, 2, 300.0);
    CHECK(killed.col(0).norm() == 0.0);
}

TEST_CASE("center_update_l0 boundary rules") {
    SUBCASE("all-zero column dies for any lambda including zero") {
        Matrix x = Matrix::Zero(4, 1);
        Membership u(4);
        u << 0, 0, 1, 1;
        CHECK(center_update_l0(x, u, 2, 0.0).col(0).norm() == 0.0);
        CHECK(center_update_l0(x, u, 2, 5.0).col(0).norm() == 0.0);
    }
    SUBCASE("lambda zero with signal gives exact cluster means") {
        Matrix x(4, 2);
        x << 1, 5, 3, 5, 10, 5, 12, 5;
        Membership u(4);
        u << 0, 0, 1, 1;
        Centers c = center_update_l0(x, u, 2, 0.0);
        CHECK(c(0, 0) == doctest::Approx(2.0));
        CHECK(c(1, 0) == doctest::Approx(11.0));
        CHECK(c(0, 1) == doctest::Approx(5.0));
    }
    SUBCASE("memberless cluster gets a zero coordinate") {
        Matrix x(2, 1);
        x << 1, 2;
        Membership u = Membership::Zero(2);
        Centers c = center_update_l0(x, u, 2, 0.0);
        CHECK(c(0, 0) == doctest::Approx(1.5));
        CHECK(c(1, 0) == 0.0);
    }
}

TEST_CASE("center_update_l0 attains the exact column minimum over zero and means") {
    Rng rng(41);
    for (int rep = 0; rep < 200; ++rep) {
        int n = 2 + rng.uniform_int(5);  // up to 6
        int k = 1 + rng.uniform_int(2);
        if (n < k) continue;
        Matrix x = random_matrix(n, 1, rng, 3.0);
        Membership u = random_membership_all_nonempty(n, k, rng);
        double lambda = rng.uniform() * 30.0;
        Centers got = center_update_l0(x, u, k, lambda);

        auto [means, counts] = cluster_means(x, u, k);
        double obj_zero = x.col(0).squaredNorm();
        double obj_means = lambda;
        for (int i = 0; i < n; ++i) {
            double d = x(i, 0) - means(u(i), 0);
            obj_means += d * d;
        }
        double got_obj = got.col(0).norm() > 0.0 ? obj_means : obj_zero;
        CHECK(got_obj <= std::min(obj_zero, obj_means) + 1e-9);
        if (obj_means >= obj_zero) CHECK(got.col(0).norm() == 0.0);  // ties zero the column
    }
}

TEST_CASE("center_update_gl_ridge on the hand example") {
    Matrix x(4, 1);
    x << 1, 3, 10, 12;
    Membership u(4);
    u << 0, 0, 1, 1;
    Centers prev(2, 1);
    prev << 0.6, 0.8;  // anchor norm 1
    Vector w = Vector::Ones(1);
    Centers c = center_update_gl_ridge(x, u, 2, prev, 4.0, w);
    CHECK(c(0, 0) == doctest::Approx(1.0));
    CHECK(c(1, 0) == doctest::Approx(5.5));
}

TEST_CASE("center_update_gl_ridge boundary rules") {
    Matrix x(4, 1);
    x << 1, 3, 10, 12;
    Membership u(4);
    u << 0, 0, 1, 1;
    Vector w = Vector::Ones(1);
    SUBCASE("lambda zero gives exact cluster means regardless of the anchor") {
        Centers prev = Centers::Zero(2, 1);
        Centers c = center_update_gl_ridge(x, u, 2, prev, 0.0, w);
        CHECK(c(0, 0) == doctest::Approx(2.0));
        CHECK(c(1, 0) == doctest::Approx(11.0));
    }
    SUBCASE("tiny anchor norm keeps the column at zero") {
        Centers prev = Centers::Constant(2, 1, 1e-12);
        Centers c = center_update_gl_ridge(x, u, 2, prev, 4.0, w);
        CHECK(c.col(0).norm() == 0.0);
    }
}

TEST_CASE("center_update_gl_quadratic on the hand example") {
    Matrix x(4, 1);
    x << 1, 3, 10, 12;
    Membership u(4);
    u << 0, 0, 1, 1;
    Centers prev(2, 1);
    prev << 2, 11;  // at the cluster means: zero gradient step
    Vector w = Vector::Ones(1);
    Centers c = center_update_gl_quadratic(x, u, 2, prev, 4.0, w);
    double factor = 1.0 - 1.0 / std::sqrt(125.0);
    CHECK(c(0, 0) == doctest::Approx(2.0 * factor).epsilon(1e-12));
    CHECK(c(1, 0) == doctest::Approx(11.0 * factor).epsilon(1e-12));
}

TEST_CASE("center_update_gl_quadratic boundary rules") {
    Matrix x(4, 1);
    x << 1, 3, 10, 12;
    Membership u(4);
    u << 0, 0, 1, 1;
    Vector w = Vector::Ones(1);
    SUBCASE("lambda zero from the means stays at the means") {
        Centers prev(2, 1);
        prev << 2, 11;
        Centers c = center_update_gl_quadratic(x, u, 2, prev, 0.0, w);
        CHECK(c(0, 0) == doctest::Approx(2.0));
        CHECK(c(1, 0) == doctest::Approx(11.0));
    }
    SUBCASE("large threshold kills the column") {
        Centers prev(2, 1);
        prev << 2, 11;
        Centers c = center_update_gl_quadratic(x, u, 2, prev, 1e6, w);
        CHECK(c.col(0).norm() == 0.0);
    }
    SUBCASE("quadratic step can revive a zero column") {
        Centers prev = Centers::Zero(2, 1);
        Centers c = center_update_gl_quadratic(x, u, 2, prev, 1.0, w);
        CHECK(c.col(0).norm() > 0.0);
    }
}

TEST_CASE("group-lasso updates never increase the fixed-membership objective") {
    Rng rng(43);
    for (int rep = 0; rep < 60; ++rep) {
        int n = 4 + rng.uniform_int(12);
        int p = 1 + rng.uniform_int(4);
        int k = 1 + rng.uniform_int(3);
        if (n < k) continue;
        Matrix x = random_matrix(n, p, rng, 2.0);
        Membership u = random_membership_all_nonempty(n, k, rng);
        Centers prev = random_matrix(k, p, rng, 2.0);
        Vector w(p);
        for (Index j = 0; j < p; ++j) w(j) = 0.1 + rng.uniform() * 3.0;
        double lambda = rng.uniform() * 20.0;

        double before = gl_objective(x, u, prev, lambda, w);
        Centers ridge = center_update_gl_ridge(x, u, k, prev, lambda, w);
        CHECK(gl_objective(x, u, ridge, lambda, w) <= before + 1e-9);
        Centers quad = center_update_gl_quadratic(x, u, k, prev, lambda, w);
        CHECK(gl_objective(x, u, quad, lambda, w) <= before + 1e-9);
    }
}

TEST_CASE("all three updates coincide with cluster means at lambda zero") {
    Rng rng(47);
    Matrix x = random_matrix(15, 3, rng, 2.0);
    Membership u = random_membership_all_nonempty(15, 2, rng);
    auto [means, counts] = cluster_means(x, u, 2);
    Vector w = Vector::Ones(3);
    Centers l0 = center_update_l0(x, u, 2, 0.0);
    Centers ridge = center_update_gl_ridge(x, u, 2, means, 0.0, w);
    Centers quad = center_update_gl_quadratic(x, u, 2, means, 0.0, w);
    CHECK((l0 - means).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((ridge - means).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((quad - means).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("regularized_kmeans with lambda zero reproduces lloyd exactly") {
    Rng rng(53);
    for (int rep = 0; rep < 5; ++rep) {
        Matrix x = random_matrix(40, 4, rng, 2.0);
        Centers init = x.topRows(3);
        FitResult ref = lloyd(x, init);
        FitResult l0 = regularized_kmeans(x, 3, PenaltySpec::l0(0.0), init);
        FitResult gl = regularized_kmeans(x, 3, PenaltySpec::group_lasso(0.0, Vector::Ones(4)), init);
        CHECK(l0.final_loss() == doctest::Approx(ref.final_loss()).epsilon(1e-12));
        CHECK(gl.final_loss() == doctest::Approx(ref.final_loss()).epsilon(1e-12));
        CHECK(l0.membership == ref.membership);
        CHECK(gl.membership == ref.membership);
        CHECK(l0.centers.isApprox(ref.centers, 1e-12));
        CHECK(gl.centers.isApprox(ref.centers, 1e-12));
        REQUIRE(l0.loss_trace.size() == ref.loss_trace.size());
        for (std::size_t t = 0; t < ref.loss_trace.size(); ++t) {
            CHECK(l0.loss_trace[t] == doctest::Approx(ref.loss_trace[t]).epsilon(1e-12));
        }
    }
}

TEST_CASE("huge lambda zeroes every column and the objective is the data norm") {
    Rng rng(59);
    Matrix x = random_matrix(20, 3, rng);
    Centers init = x.topRows(2);
    FitResult l0 = regularized_kmeans(x, 2, PenaltySpec::l0(1e12), init);
    CHECK(l0.centers.isZero(0.0));
    CHECK(l0.final_loss() == doctest::Approx(x.squaredNorm()));
    FitResult gl = regularized_kmeans(x, 2, PenaltySpec::group_lasso(1e12, Vector::Ones(3)), init);
    CHECK(gl.centers.isZero(0.0));
    CHECK(gl.final_loss() == doctest::Approx(x.squaredNorm()));
}

TEST_CASE("inner solver objective never rises above any visited state") {
    Rng rng(61);
    Matrix x = random_matrix(12, 3, rng, 2.0);
    Centers init = random_matrix(2, 3, rng, 2.0);
    Vector w = Vector::Ones(3);
    for (double lambda : {0.5, 3.0, 12.0}) {
        FitResult l0 = regularized_kmeans(x, 2, PenaltySpec::l0(lambda), init);
        CHECK(trace_non_increasing(l0.loss_trace));
        CHECK(l0.final_loss() <= l0.loss_trace.front() + 1e-9);
        FitResult gl = regularized_kmeans(x, 2, PenaltySpec::group_lasso(lambda, w), init);
        CHECK(trace_non_increasing(gl.loss_trace));
        FitResult quad = regularized_kmeans(
            x, 2, PenaltySpec::group_lasso(lambda, w, PenaltySpec::GlVariant::Quadratic), init);
        CHECK(trace_non_increasing(quad.loss_trace));
    }
}

TEST_CASE("reg_kpod_fit reductions and monotonicity") {
    Rng rng(67);
    SUBCASE("fully observed input matches regularized_kmeans") {
        Matrix x = random_matrix(30, 3, rng, 2.0);
        MaskedMatrix m(x, BoolMatrix::Constant(30, 3, true));
        Centers init = x.topRows(2);
        Membership u0 = assign_rows(x, init);
        FitResult outer = reg_kpod_fit(m, 2, PenaltySpec::l0(2.0), u0, init);
        FitResult inner = regularized_kmeans(x, 2, PenaltySpec::l0(2.0), init);
        CHECK(outer.final_loss() == doctest::Approx(inner.final_loss()).epsilon(1e-12));
        CHECK(outer.membership == inner.membership);
    }
    SUBCASE("lambda zero matches kpod_fit exactly") {
        Matrix x = random_matrix(30, 3, rng, 2.0);
        BoolMatrix mask = random_mask(30, 3, 0.7, rng);
        MaskedMatrix m(x, mask);
        Centers init = x.topRows(2);
        Membership u0 = assign_rows_masked(m, init);
        FitResult reg = reg_kpod_fit(m, 2, PenaltySpec::l0(0.0), u0, init);
        FitResult pod = kpod_fit(m, 2, u0, init);
        REQUIRE(reg.loss_trace.size() == pod.loss_trace.size());
        for (std::size_t t = 0; t < pod.loss_trace.size(); ++t) {
            CHECK(reg.loss_trace[t] == doctest::Approx(pod.loss_trace[t]).epsilon(1e-12));
        }
        CHECK(reg.membership == pod.membership);
    }
    SUBCASE("masked-objective trace is non-increasing under missingness") {
        Rng local(71);
        for (int rep = 0; rep < 10; ++rep) {
            SmallInstance inst = make_instance(40, 5, 0.75, local);
            Centers init = random_matrix(2, 5, local, 2.0);
            Membership u0 = assign_rows_masked(inst.data, init);
            Vector w = default_weights(init);
            FitResult l0 = reg_kpod_fit(inst.data, 2, PenaltySpec::l0(8.0), u0, init);
            CHECK(trace_non_increasing(l0.loss_trace));
            FitResult gl = reg_kpod_fit(inst.data, 2, PenaltySpec::group_lasso(8.0, w), u0, init);
            CHECK(trace_non_increasing(gl.loss_trace));
        }
    }
}

TEST_CASE("ridge and quadratic variants land on nearby objectives") {
    Rng rng(73);
    SmallInstance inst = make_instance(120, 10, 0.85, rng);
    Centers init = random_matrix(2, 10, rng, 2.0);
    Membership u0 = assign_rows_masked(inst.data, init);
    Vector w = uniform_weights(10, 2);
    OuterOpts opts;
    opts.tol = 1e-10;
    opts.max_outer = 300;
    opts.inner.max_iter = 200;
    FitResult ridge = reg_kpod_fit(inst.data, 2, PenaltySpec::group_lasso(20.0, w), u0, init, opts);
    FitResult quad = reg_kpod_fit(
        inst.data, 2, PenaltySpec::group_lasso(20.0, w, PenaltySpec::GlVariant::Quadratic), u0, init, opts);
    CHECK(std::abs(ridge.final_loss() - quad.final_loss()) /
              std::max(1.0, std::abs(ridge.final_loss())) < 0.01);
}

TEST_CASE("fixed_point_check on converged fits") {
    Rng rng(79);
    OuterOpts tight;
    tight.tol = 1e-14;
    tight.center_tol = 1e-12;
    tight.max_outer = 500;
    tight.inner.max_iter = 200;
    tight.inner.tol = 1e-14;

    SUBCASE("lambda zero: every column active with exact observed means") {
        SmallInstance inst = make_instance(50, 4, 0.8, rng);
        Centers init = random_matrix(2, 4, rng, 2.0);
        Membership u0 = assign_rows_masked(inst.data, init);
        FitResult fit = reg_kpod_fit(inst.data, 2, PenaltySpec::l0(0.0), u0, init, tight);
        FixedPointReport report = fixed_point_check(inst.data, fit, PenaltySpec::l0(0.0));
        CHECK(report.all_hold);
        for (const auto& rec : report.records) CHECK_FALSE(rec.is_zero);
    }
    SUBCASE("lambda beyond the largest column mass zeroes everything") {
        SmallInstance inst = make_instance(50, 4, 0.8, rng);
        const double n = 50.0;
        double lambda = 0.0;
        Membership trivial = Membership::Zero(50);
        for (Index j = 0; j < 4; ++j) {
            ColumnStats stats = column_stats(inst.data, trivial, 1, j);
            lambda = std::max(lambda, n * stats.q_hat * stats.sigma_bar_sq);
        }
        lambda *= 1.5;
        Centers init = random_matrix(2, 4, rng, 2.0);
        Membership u0 = assign_rows_masked(inst.data, init);
        PenaltySpec spec = PenaltySpec::l0(lambda);
        FitResult fit = reg_kpod_fit(inst.data, 2, spec, u0, init, tight);
        FixedPointReport report = fixed_point_check(inst.data, fit, spec);
        CHECK(report.all_hold);
        for (const auto& rec : report.records) CHECK(rec.is_zero);
    }
    SUBCASE("group-lasso shrinkage identity at the converged fixed point") {
        SmallInstance inst = make_instance(60, 6, 0.8, rng);
        Centers pilot_init = random_matrix(2, 6, rng, 2.0);
        Membership pilot_u0 = assign_rows_masked(inst.data, pilot_init);
        FitResult pilot = kpod_fit(inst.data, 2, pilot_u0, pilot_init, tight);
        Vector w = default_weights(pilot.centers);
        PenaltySpec spec = PenaltySpec::group_lasso(60.0, w);
        FitResult fit = reg_kpod_fit(inst.data, 2, spec, pilot.membership, pilot.centers, tight);
        FixedPointReport report = fixed_point_check(inst.data, fit, spec);
        for (const auto& rec : report.records) {
            INFO("feature ", rec.feature, " zero=", rec.is_zero, " lhs=", rec.threshold_lhs,
                 " rhs=", rec.threshold_rhs, " err=", rec.value_check_maxerr);
            CHECK(rec.condition_holds);
        }
    }
}
