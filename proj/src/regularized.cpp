#include "rkpod/regularized.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace rkpod {

namespace {

void validate_weights(const Vector& w, Index p) {
    if (w.size() != p) throw std::invalid_argument("group lasso weights: length must equal feature count");
    for (Index j = 0; j < p; ++j) {
        if (!(w(j) > 0.0) || w(j) > kWeightCap) {
            throw std::invalid_argument("group lasso weights: entries must be in (0, cap]");
        }
    }
}

double sse_given(const Matrix& xhat, const Membership& u, const Centers& c) {
    double total = 0.0;
    for (Index i = 0; i < xhat.rows(); ++i) {
        total += (xhat.row(i) - c.row(u(i))).squaredNorm();
    }
    return total;
}

#ifndef NDEBUG
// Group-lasso objective for the fixed-membership subproblem; both MM updates
// must not increase it.
double gl_objective(const Matrix& xhat, const Membership& u, const Centers& c,
                    double lambda, const Vector& w) {
    double val = sse_given(xhat, u, c);
    for (Index j = 0; j < c.cols(); ++j) val += lambda * w(j) * c.col(j).norm();
    return val;
}
#endif

Centers apply_center_update(const Matrix& xhat, const Membership& u, int k,
                            const Centers& prev, const PenaltySpec& spec) {
    if (spec.kind == PenaltySpec::Kind::L0) {
        return center_update_l0(xhat, u, k, spec.lambda);
    }
    if (spec.gl_variant == PenaltySpec::GlVariant::RidgeMM) {
        return center_update_gl_ridge(xhat, u, k, prev, spec.lambda, spec.weights);
    }
    return center_update_gl_quadratic(xhat, u, k, prev, spec.lambda, spec.weights);
}

}  // namespace

PenaltySpec PenaltySpec::l0(double lambda) {
    if (lambda < 0.0) throw std::invalid_argument("PenaltySpec: lambda must be nonnegative");
    PenaltySpec spec;
    spec.kind = Kind::L0;
    spec.lambda = lambda;
    return spec;
}

PenaltySpec PenaltySpec::group_lasso(double lambda, Vector weights, GlVariant variant) {
    if (lambda < 0.0) throw std::invalid_argument("PenaltySpec: lambda must be nonnegative");
    PenaltySpec spec;
    spec.kind = Kind::GroupLasso;
    spec.lambda = lambda;
    spec.weights = std::move(weights);
    spec.gl_variant = variant;
    return spec;
}

double penalty_value(const Centers& c, const PenaltySpec& spec) {
    if (spec.kind == PenaltySpec::Kind::L0) {
        double count = 0.0;
        for (Index j = 0; j < c.cols(); ++j) {
            if (c.col(j).norm() > 0.0) count += 1.0;
        }
        return count;
    }
    validate_weights(spec.weights, c.cols());
    double total = 0.0;
    for (Index j = 0; j < c.cols(); ++j) total += spec.weights(j) * c.col(j).norm();
    return total;
}

double reg_loss(const MaskedMatrix& m, const Membership& u, const Centers& c,
                const PenaltySpec& spec) {
    return kpod_loss(m, u, c) + spec.lambda * penalty_value(c, spec);
}

Vector default_weights(const Centers& pilot_centers, double cap) {
    Vector w(pilot_centers.cols());
    for (Index j = 0; j < pilot_centers.cols(); ++j) {
        double norm = pilot_centers.col(j).norm();
        w(j) = (norm > 1.0 / cap) ? 1.0 / norm : cap;
    }
    return w;
}

Vector uniform_weights(Index p, int k) {
    return Vector::Constant(p, std::sqrt(static_cast<double>(k)));
}

Membership assign_step(const Matrix& xhat, const Centers& c) {
    return assign_rows(xhat, c);
}

Centers center_update_l0(const Matrix& xhat, const Membership& u, int k, double lambda) {
    auto [means, counts] = cluster_means(xhat, u, k);
    const Index p = xhat.cols();
    Centers out(k, p);
    for (Index j = 0; j < p; ++j) {
        double col_sq = xhat.col(j).squaredNorm();
        double resid = 0.0;
        for (Index i = 0; i < xhat.rows(); ++i) {
            double d = xhat(i, j) - means(u(i), j);
            resid += d * d;
        }
        if (col_sq > resid + lambda) {
            out.col(j) = means.col(j);
        } else {
            out.col(j).setZero();
        }
    }
    return out;
}

Centers center_update_gl_ridge(const Matrix& xhat, const Membership& u, int k,
                               const Centers& prev, double lambda, const Vector& w) {
    validate_weights(w, xhat.cols());
    if (prev.rows() != k || prev.cols() != xhat.cols()) {
        throw std::invalid_argument("center_update_gl_ridge: prev centers shape mismatch");
    }
    auto [means, counts] = cluster_means(xhat, u, k);
    const Index p = xhat.cols();
    Centers out(k, p);
    for (Index j = 0; j < p; ++j) {
        double lw = lambda * w(j);
        if (lw == 0.0) {
            out.col(j) = means.col(j);
            continue;
        }
        double anchor = prev.col(j).norm();
        if (anchor < kZeroAnchorEps) {
            out.col(j).setZero();
            continue;
        }
        double ridge = lw / (2.0 * anchor);
        for (int l = 0; l < k; ++l) {
            double nl = static_cast<double>(counts(l));
            out(l, j) = nl / (nl + ridge) * means(l, j);
        }
    }
#ifndef NDEBUG
    assert(gl_objective(xhat, u, out, lambda, w) <=
           gl_objective(xhat, u, prev, lambda, w) * (1.0 + 1e-12) + 1e-9);
#endif
    return out;
}

Centers center_update_gl_quadratic(const Matrix& xhat, const Membership& u, int k,
                                   const Centers& prev, double lambda, const Vector& w) {
    validate_weights(w, xhat.cols());
    if (prev.rows() != k || prev.cols() != xhat.cols()) {
        throw std::invalid_argument("center_update_gl_quadratic: prev centers shape mismatch");
    }
    auto [means, counts] = cluster_means(xhat, u, k);
    const double gamma = 2.0 * static_cast<double>(counts.maxCoeff());
    const Index p = xhat.cols();
    Centers out(k, p);
    Vector vt(k);
    for (Index j = 0; j < p; ++j) {
        for (int l = 0; l < k; ++l) {
            double nl = static_cast<double>(counts(l));
            vt(l) = prev(l, j) + (2.0 * nl / gamma) * (means(l, j) - prev(l, j));
        }
        double norm = vt.norm();
        double threshold = lambda * w(j) / gamma;
        if (norm > threshold && norm > 0.0) {
            out.col(j) = vt * (1.0 - threshold / norm);
        } else {
            out.col(j).setZero();
        }
    }
#ifndef NDEBUG
    assert(gl_objective(xhat, u, out, lambda, w) <=
           gl_objective(xhat, u, prev, lambda, w) * (1.0 + 1e-12) + 1e-9);
#endif
    return out;
}

FitResult regularized_kmeans(const Matrix& xhat, int k, const PenaltySpec& spec,
                             const Centers& init, const LloydOpts& opts) {
    if (init.rows() != k || init.cols() != xhat.cols()) {
        throw std::invalid_argument("regularized_kmeans: init centers shape mismatch");
    }
    if (spec.kind == PenaltySpec::Kind::GroupLasso) validate_weights(spec.weights, xhat.cols());

    FitResult res;
    Centers c = init;
    Membership u;
    Vector dist2;
    for (int r = 0; r < opts.max_iter; ++r) {
        u = assign_rows(xhat, c, &dist2);
        IntVector counts = IntVector::Zero(k);
        for (Index i = 0; i < u.size(); ++i) counts(u(i)) += 1;
        // The MM anchor is the previous update's output; repair edits must not
        // leak into it or they would resurrect zeroed columns via the ridge
        // term. Relocating a point into a dominated center is not a descent
        // move for the penalized objective, so the singleton repair is kept
        // only when it scores at least as well as leaving the cluster empty
        // for this round (empty rows take their penalty-optimal value, zero).
        const Centers anchor = c;
        double obj;
        if ((counts.array() == 0).any()) {
            Membership u_rep = u;
            Centers c_rep = c;
            IntVector counts_rep = counts;
            Vector dist2_rep = dist2;
            repair_empty_clusters(xhat, u_rep, c_rep, counts_rep, dist2_rep);
            Centers cand_rep = apply_center_update(xhat, u_rep, k, anchor, spec);
            Centers cand_keep = apply_center_update(xhat, u, k, anchor, spec);
            double obj_rep = sse_given(xhat, u_rep, cand_rep) + spec.lambda * penalty_value(cand_rep, spec);
            double obj_keep = sse_given(xhat, u, cand_keep) + spec.lambda * penalty_value(cand_keep, spec);
            if (obj_rep <= obj_keep) {
                u = u_rep;
                c = cand_rep;
                obj = obj_rep;
            } else {
                c = cand_keep;
                obj = obj_keep;
            }
        } else {
            c = apply_center_update(xhat, u, k, anchor, spec);
            obj = sse_given(xhat, u, c) + spec.lambda * penalty_value(c, spec);
        }
        res.loss_trace.push_back(obj);
        res.outer_iters = r + 1;
        if (r > 0 && relative_change(res.loss_trace[static_cast<std::size_t>(r) - 1], obj) < opts.tol) {
            res.converged = true;
            break;
        }
    }
    res.membership = u;
    res.centers = c;
    res.inner_iters_total = res.outer_iters;
    res.active = active_features(c);
    return res;
}

FitResult reg_kpod_fit(const MaskedMatrix& m, int k, const PenaltySpec& spec,
                       const Membership& u0, const Centers& c0, const OuterOpts& opts) {
    if (c0.rows() != k) throw std::invalid_argument("reg_kpod_fit: init centers do not match k");
    if (spec.kind == PenaltySpec::Kind::GroupLasso) validate_weights(spec.weights, m.cols());

    FitResult res;
    Membership u = u0;
    Centers c = c0;
    res.loss_trace.push_back(reg_loss(m, u, c, spec));
    for (int t = 0; t < opts.max_outer; ++t) {
        Matrix xhat = impute_with_model(m, u, c);
        FitResult inner = regularized_kmeans(xhat, k, spec, c, opts.inner);
        u = inner.membership;
        double center_delta = (inner.centers - c).cwiseAbs().maxCoeff();
        c = inner.centers;
        res.inner_iters_total += inner.outer_iters;
        double loss = reg_loss(m, u, c, spec);
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

FixedPointReport fixed_point_check(const MaskedMatrix& m, const FitResult& fit,
                                   const PenaltySpec& spec, const FixedPointTolerances& tol) {
    const Index p = m.cols();
    const double n = static_cast<double>(m.rows());
    const int k = fit.k();
    if (spec.kind == PenaltySpec::Kind::GroupLasso) validate_weights(spec.weights, p);

    FixedPointReport report;
    report.records.reserve(static_cast<std::size_t>(p));
    for (Index j = 0; j < p; ++j) {
        ColumnStats stats = column_stats(m, fit.membership, k, j);
        FixedPointRecord rec;
        rec.feature = static_cast<int>(j);
        rec.is_zero = fit.centers.col(j).norm() == 0.0;

        if (spec.kind == PenaltySpec::Kind::L0) {
            rec.threshold_lhs = stats.q_hat * stats.sigma_bar_sq - stats.wcss;
            rec.threshold_rhs = spec.lambda / n;
        } else {
            double gap = stats.q_hat * stats.sigma_bar_sq - stats.q_min;
            rec.threshold_lhs = std::sqrt(std::max(gap, 0.0));
            rec.threshold_rhs = spec.lambda * spec.weights(j) / (2.0 * n);
        }

        double slack = tol.threshold_abs +
                       tol.threshold_rel * std::max(std::abs(rec.threshold_lhs), std::abs(rec.threshold_rhs));
        if (rec.is_zero) {
            rec.condition_holds = rec.threshold_lhs <= rec.threshold_rhs + slack;
        } else {
            double col_norm = fit.centers.col(j).norm();
            double maxerr = 0.0;
            for (int l = 0; l < k; ++l) {
                if (stats.cluster_observed(l) == 0) continue;  // unconstrained coordinate, flagged upstream
                double target;
                if (spec.kind == PenaltySpec::Kind::L0) {
                    target = stats.cluster_means(l);
                } else {
                    double shrink = 1.0 + spec.lambda * spec.weights(j) /
                                              (2.0 * col_norm * static_cast<double>(stats.cluster_observed(l)));
                    target = stats.cluster_means(l) / shrink;
                }
                maxerr = std::max(maxerr, std::abs(fit.centers(l, j) - target));
            }
            rec.value_check_maxerr = maxerr;
            double value_tol = spec.kind == PenaltySpec::Kind::L0 ? tol.value_l0 : tol.value_gl;
            rec.condition_holds = maxerr <= value_tol;
        }
        report.all_hold = report.all_hold && rec.condition_holds;
        report.records.push_back(rec);
    }
    return report;
}

}  // namespace rkpod
