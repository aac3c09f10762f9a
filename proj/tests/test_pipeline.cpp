#include "rkpod/pipeline.hpp"

#include "helpers.hpp"
#include "rkpod/synthetic.hpp"

#include <doctest.h>

using namespace rkpod;
using test::random_mask;

namespace {

MaskedMatrix demo_instance(int n, double observe_prob, Rng& rng, Membership* labels = nullptr) {
    MixtureSpec spec;
    spec.n = n;
    spec.p = 5;
    spec.k = 2;
    spec.sigma_diag = Vector::Constant(5, 1.0);
    spec.centers = Matrix::Zero(2, 5);
    spec.centers(0, 0) = 3.0;
    spec.centers(0, 1) = -3.0;
    spec.centers(1, 0) = -3.0;
    spec.centers(1, 1) = 3.0;
    MixtureSample sample = gen_mixture(spec, rng);
    if (labels) *labels = sample.labels;
    BoolMatrix mask = random_mask(n, 5, observe_prob, rng);
    return MaskedMatrix(sample.values, mask);
}

}  // namespace

TEST_CASE("method names round-trip") {
    for (const char* name : {"kmeans", "kpod", "rkpod-gl", "rkpod-l0"}) {
        CHECK(to_string(method_from_string(name)) == name);
    }
    CHECK_THROWS_AS(method_from_string("bogus"), std::invalid_argument);
}

TEST_CASE("fit_method is deterministic and worker-count independent") {
    Rng rng(227);
    MaskedMatrix m = demo_instance(60, 0.8, rng);
    FitConfig cfg;
    cfg.method = Method::KPod;
    cfg.restarts = 6;

    cfg.workers = 1;
    MethodFit serial = fit_method(m, 2, cfg, 17);
    cfg.workers = 4;
    MethodFit parallel = fit_method(m, 2, cfg, 17);
    CHECK(serial.fit.final_loss() == parallel.fit.final_loss());
    CHECK(serial.fit.membership == parallel.fit.membership);
    CHECK(serial.fit.centers == parallel.fit.centers);
    CHECK(serial.fit.seed == parallel.fit.seed);
}

TEST_CASE("regularized methods ride on a pilot when they need one") {
    Rng rng(229);
    MaskedMatrix m = demo_instance(60, 0.8, rng);
    FitConfig cfg;
    cfg.method = Method::RegGl;
    cfg.lambda = 10.0;
    cfg.restarts = 3;

    SUBCASE("adaptive weights build a pilot internally") {
        MethodFit fit = fit_method(m, 2, cfg, 23);
        CHECK(fit.used_pilot);
        CHECK(fit.weights_used.size() == 5);
        CHECK((fit.weights_used.array() > 0.0).all());
    }
    SUBCASE("uniform weights skip the pilot") {
        cfg.weights = WeightScheme::Uniform;
        MethodFit fit = fit_method(m, 2, cfg, 23);
        CHECK_FALSE(fit.used_pilot);
        CHECK(fit.weights_used(0) == doctest::Approx(std::sqrt(2.0)));
    }
    SUBCASE("a shared pilot is honored") {
        FitResult pilot = kpod_pilot(m, 2, cfg, 31);
        MethodFit fit = fit_method(m, 2, cfg, 23, &pilot);
        CHECK(fit.used_pilot);
        // weights must come from the shared pilot
        Vector expected = default_weights(pilot.centers);
        CHECK(fit.weights_used == expected);
    }
}

TEST_CASE("sparse initialization runs one restart per fraction") {
    Rng rng(233);
    MaskedMatrix m = demo_instance(60, 0.8, rng);
    FitConfig cfg;
    cfg.method = Method::RegL0;
    cfg.lambda = 25.0;
    cfg.init = InitKind::Sparse;
    cfg.sparse_fractions = {0.2, 0.6, 1.0};
    MethodFit fit = fit_method(m, 2, cfg, 37);
    CHECK(fit.used_pilot);
    CHECK(fit.fit.centers.rows() == 2);
    CHECK(fit.fit.loss_trace.size() > 0);
}

TEST_CASE("kmeans on complete data and complete-case fallback") {
    Rng rng(239);
    Membership labels;
    SUBCASE("fully observed") {
        MixtureSpec spec;
        spec.n = 50;
        spec.p = 4;
        spec.k = 2;
        spec.sigma_diag = Vector::Constant(4, 1.0);
        spec.centers = Matrix::Zero(2, 4);
        spec.centers(0, 0) = 4.0;
        spec.centers(1, 0) = -4.0;
        MixtureSample sample = gen_mixture(spec, rng);
        MaskedMatrix m(sample.values, BoolMatrix::Constant(50, 4, true));
        FitConfig cfg;
        cfg.method = Method::KMeans;
        cfg.restarts = 4;
        MethodFit fit = fit_method(m, 2, cfg, 41);
        CHECK(fit.fit.membership.size() == 50);
        CHECK(fit.fit.final_loss() > 0.0);
    }
    SUBCASE("missing data clusters the complete rows and labels everyone") {
        MaskedMatrix m = demo_instance(80, 0.9, rng);
        FitConfig cfg;
        cfg.method = Method::KMeans;
        cfg.restarts = 4;
        MethodFit fit = fit_method(m, 2, cfg, 43);
        CHECK(fit.fit.membership.size() == 80);
        CHECK(fit.fit.membership.maxCoeff() <= 1);
    }
    SUBCASE("too few complete rows errors") {
        Matrix v = Matrix::Ones(6, 3);
        BoolMatrix mask = BoolMatrix::Constant(6, 3, true);
        for (Index i = 0; i < 6; ++i) mask(i, i % 3) = false;
        MaskedMatrix m(v, mask);
        FitConfig cfg;
        cfg.method = Method::KMeans;
        CHECK_THROWS_AS(fit_method(m, 2, cfg, 47), std::invalid_argument);
    }
}

TEST_CASE("kpod with fully observed data matches kmeans given the same seed") {
    Rng rng(241);
    MixtureSpec spec;
    spec.n = 50;
    spec.p = 4;
    spec.k = 2;
    spec.sigma_diag = Vector::Constant(4, 1.0);
    spec.centers = Matrix::Zero(2, 4);
    spec.centers(0, 0) = 4.0;
    spec.centers(1, 0) = -4.0;
    MixtureSample sample = gen_mixture(spec, rng);
    MaskedMatrix m(sample.values, BoolMatrix::Constant(50, 4, true));

    FitConfig km;
    km.method = Method::KMeans;
    km.restarts = 5;
    FitConfig kp;
    kp.method = Method::KPod;
    kp.restarts = 5;
    kp.init = InitKind::Comp;  // complete-case seeding equals kmeans++ on everything
    MethodFit a = fit_method(m, 2, km, 53);
    MethodFit b = fit_method(m, 2, kp, 53);
    CHECK(a.fit.final_loss() == doctest::Approx(b.fit.final_loss()).epsilon(1e-12));
}

TEST_CASE("rkpod with lambda zero matches kpod from the same seed") {
    Rng rng(251);
    MaskedMatrix m = demo_instance(60, 0.8, rng);
    FitConfig kp;
    kp.method = Method::KPod;
    kp.restarts = 4;
    FitConfig l0;
    l0.method = Method::RegL0;
    l0.lambda = 0.0;
    l0.restarts = 4;
    MethodFit a = fit_method(m, 2, kp, 59);
    MethodFit b = fit_method(m, 2, l0, 59);
    CHECK(a.fit.final_loss() == doctest::Approx(b.fit.final_loss()).epsilon(1e-12));
    CHECK(a.fit.membership == b.fit.membership);
}
