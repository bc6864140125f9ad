#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "medestim/data_model.hpp"
#include "medestim/errors.hpp"
#include "medestim/nuisance.hpp"

namespace medestim {

enum class EstimatorId { CoefficientProduct, GComputation, Ipw, MultiplyRobust, Dml };

inline const char* estimator_name(EstimatorId id) {
    switch (id) {
        case EstimatorId::CoefficientProduct: return "coefficient_product";
        case EstimatorId::GComputation: return "g_computation";
        case EstimatorId::Ipw: return "ipw";
        case EstimatorId::MultiplyRobust: return "multiply_robust";
        case EstimatorId::Dml: return "dml";
    }
    return "?";
}

// The multiply-robust estimator handles only one-dimensional binary
// mediators; everything else handles all kinds.
inline bool estimator_supports(EstimatorId id, MediatorKind kind) {
    if (id == EstimatorId::MultiplyRobust) return kind == MediatorKind::Binary1D;
    return true;
}

namespace detail {

inline std::vector<Eigen::Index> all_rows(Eigen::Index n) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
    return idx;
}

inline Dataset subset(const Dataset& ds, const std::vector<Eigen::Index>& rows) {
    Dataset out;
    out.x = take_rows(ds.x, rows);
    out.m = take_rows(ds.m, rows);
    out.t = take(ds.t, rows);
    out.y = take(ds.y, rows);
    out.mediator_kind = ds.mediator_kind;
    return out;
}

inline Eigen::MatrixXd mediator_features(const Dataset& ds) {
    Eigen::MatrixXd f(ds.n(), ds.dim_x() + ds.dim_m());
    f.leftCols(ds.dim_x()) = ds.x;
    f.rightCols(ds.dim_m()) = ds.m;
    return f;
}

// Normalized weighted mean; a sub-1e-12 weight sum signals an overlap
// failure the caller must not paper over.
inline double normalized_mean(const Eigen::VectorXd& w, const Eigen::VectorXd& v) {
    const double sw = w.sum();
    if (!(sw > 1e-12)) fail(ErrorCode::DegenerateWeights, "normalizing weight sum is degenerate");
    return w.dot(v) / sw;
}

// Runs `fill(train_rows, eval_rows, fold)` either once on the full sample
// (fold 0) or once per cross-fitting fold (eval = fold, train = complement).
// All nuisances of one estimator share the same partition.
template <typename FillFn>
void for_each_nuisance_fit(const Dataset& ds, const NuisanceSpec& spec, const FillFn& fill) {
    if (spec.crossfit_folds >= 2) {
        const auto folds =
            make_folds(ds.n(), spec.crossfit_folds, derive_seed(spec.seed, 0xcf01dULL));
        for (std::size_t k = 0; k < folds.size(); ++k) {
            std::vector<Eigen::Index> train;
            train.reserve(static_cast<std::size_t>(ds.n()) - folds[k].size());
            for (std::size_t j = 0; j < folds.size(); ++j)
                if (j != k) train.insert(train.end(), folds[j].begin(), folds[j].end());
            fill(train, folds[k], k);
        }
    } else {
        const auto all = all_rows(ds.n());
        fill(all, all, std::size_t{0});
    }
}

// Mediator-probability model for one treatment arm. Falls back to the
// clipped empirical frequency when the arm's mediator labels are
// single-class (the logistic MLE does not exist there).
inline FittedClassifier fit_arm_mediator_model(const Dataset& ds, const std::vector<Eigen::Index>& train,
                                               double arm, const NuisanceSpec& spec, std::uint64_t seed) {
    std::vector<Eigen::Index> rows;
    for (Eigen::Index i : train)
        if (ds.t(i) == arm) rows.push_back(i);
    if (rows.empty()) fail(ErrorCode::EmptyArm, "no rows with T = " + std::to_string(arm));
    const Eigen::MatrixXd x = take_rows(ds.x, rows);
    const Eigen::VectorXd m = take(ds.m.col(0), rows);
    const double freq = m.mean();
    if (rows.size() < 2 || freq <= 0.0 || freq >= 1.0) {
        const double q = std::clamp(freq, spec.clip_eps, 1.0 - spec.clip_eps);
        return FittedClassifier(
            [q](const Eigen::MatrixXd& in) { return Eigen::VectorXd::Constant(in.rows(), q); },
            spec.clip_eps);
    }
    NuisanceSpec s = spec;
    s.seed = seed;
    return fit_classifier(x, m, s);
}

// Outcome model fit separately per treatment arm on (M, X) features and
// dispatching on the t feature at prediction time; equivalent to a fit on
// (T, M, X) saturated in T. The implicit-integration G-computation uses this
// form, which keeps the nested regressions robust to a missing M x T
// interaction in a linear outcome model.
struct ArmOutcomeImpl final : medestim::detail::RegressorImpl {
    FittedRegressor arm0, arm1;

    static Eigen::MatrixXd strip_t(const Eigen::MatrixXd& f) { return f.rightCols(f.cols() - 1); }

    double predict_one(const Eigen::Ref<const Eigen::RowVectorXd>& x) const override {
        const Eigen::RowVectorXd rest = x.tail(x.size() - 1);
        return (x(0) == 1.0 ? arm1 : arm0).predict_one(rest);
    }
    Eigen::VectorXd predict_many(const Eigen::MatrixXd& f) const override {
        const Eigen::MatrixXd rest = strip_t(f);
        Eigen::VectorXd out(f.rows());
        for (Eigen::Index i = 0; i < f.rows(); ++i)
            out(i) = (f(i, 0) == 1.0 ? arm1 : arm0).predict_one(rest.row(i));
        return out;
    }
};

inline FittedRegressor fit_arm_outcome_model(const Dataset& ds, const std::vector<Eigen::Index>& train,
                                             const NuisanceSpec& spec, std::uint64_t seed) {
    auto impl = std::make_shared<ArmOutcomeImpl>();
    for (int arm = 0; arm <= 1; ++arm) {
        std::vector<Eigen::Index> rows;
        for (Eigen::Index i : train)
            if (ds.t(i) == static_cast<double>(arm)) rows.push_back(i);
        if (rows.empty()) fail(ErrorCode::EmptyArm, "no rows with T = " + std::to_string(arm));
        const Dataset arm_ds = subset(ds, rows);
        Eigen::MatrixXd f(arm_ds.n(), arm_ds.dim_m() + arm_ds.dim_x());
        f.leftCols(arm_ds.dim_m()) = arm_ds.m;
        f.rightCols(arm_ds.dim_x()) = arm_ds.x;
        NuisanceSpec s = spec;
        s.seed = derive_seed(seed, static_cast<std::uint64_t>(arm));
        (arm == 1 ? impl->arm1 : impl->arm0) = fit_regressor(f, arm_ds.y, s);
    }
    return FittedRegressor(std::move(impl));
}

// Cross-world mean on the training rows, predicted on the eval rows: the
// outcome model evaluated at treatment t is regressed on X within the
// training arm T = t_prime.
inline Eigen::VectorXd cross_world_eval(const Dataset& ds, const FittedRegressor& mu_hat, int t,
                                        int t_prime, const std::vector<Eigen::Index>& train,
                                        const std::vector<Eigen::Index>& eval_rows,
                                        const NuisanceSpec& spec, std::uint64_t seed) {
    std::vector<Eigen::Index> arm;
    for (Eigen::Index i : train)
        if (ds.t(i) == static_cast<double>(t_prime)) arm.push_back(i);
    if (arm.empty()) fail(ErrorCode::EmptyArm, "no rows with T = " + std::to_string(t_prime));

    const Dataset arm_ds = subset(ds, arm);
    const Eigen::VectorXd mu_t = mu_hat.predict(outcome_features_at(arm_ds, static_cast<double>(t)));
    NuisanceSpec nu_spec = spec;
    nu_spec.seed = seed;
    const FittedRegressor nu = fit_regressor(arm_ds.x, mu_t, nu_spec);
    return nu.predict(take_rows(ds.x, eval_rows));
}

inline void scatter(Eigen::VectorXd& dst, const std::vector<Eigen::Index>& rows, const Eigen::VectorXd& v) {
    for (std::size_t i = 0; i < rows.size(); ++i) dst(rows[i]) = v(static_cast<Eigen::Index>(i));
}

} // namespace detail

// ---------------------------------------------------------------------------
// Coefficient product
// ---------------------------------------------------------------------------

inline EffectEstimates coefficient_product(const Dataset& ds, const NuisanceSpec& spec) {
    validate_dataset(ds);
    spec.validate();
    if (spec.family == ModelFamily::Forest)
        fail(ErrorCode::UnsupportedFamily, "coefficient product is defined by linear regressions");

    // M_l ~ [t, x] per mediator column, Y ~ [t, m, x].
    Eigen::MatrixXd mx(ds.n(), 1 + ds.dim_x());
    mx.col(0) = ds.t;
    mx.rightCols(ds.dim_x()) = ds.x;

    Eigen::VectorXd beta_t(ds.dim_m());
    for (Eigen::Index l = 0; l < ds.dim_m(); ++l) {
        double lambda = kUnregularizedPenalty;
        if (spec.family == ModelFamily::LinearRidgeCV)
            lambda = select_ridge_penalty(mx, ds.m.col(l), spec.ridge_grid, false,
                                          derive_seed(spec.seed, 0xbe7aULL, static_cast<std::uint64_t>(l)));
        beta_t(l) = fit_linear(mx, ds.m.col(l), lambda).coef(1);
    }

    const Eigen::MatrixXd yx = outcome_features(ds);
    double lambda_y = kUnregularizedPenalty;
    if (spec.family == ModelFamily::LinearRidgeCV)
        lambda_y = select_ridge_penalty(yx, ds.y, spec.ridge_grid, false, derive_seed(spec.seed, 0x9a33aULL));
    const LinearModel ym = fit_linear(yx, ds.y, lambda_y);
    const double gamma_t = ym.coef(1);
    const Eigen::VectorXd gamma_m = ym.coef.segment(2, ds.dim_m());

    EffectEstimates e;
    e.direct_0 = e.direct_1 = gamma_t;
    e.indirect_0 = e.indirect_1 = gamma_m.dot(beta_t);
    e.total = e.direct_0 + e.indirect_1;
    return e;
}

// ---------------------------------------------------------------------------
// G-computation
// ---------------------------------------------------------------------------

// Per-row plug-in inputs for the explicit (binary mediator) path:
// mu_tm(i) = mu_hat(t, m, X_i), q_t(i) = f_hat(M = 1 | t, X_i).
struct ExplicitGNuisances {
    Eigen::VectorXd mu00, mu01, mu10, mu11; // mu_tm
    Eigen::VectorXd q1, q0;
};

inline EffectEstimates g_computation_from(const Dataset& ds, const ExplicitGNuisances& nu) {
    const double n = static_cast<double>(ds.n());
    double th0 = 0, th1 = 0, de0 = 0, de1 = 0;
    for (Eigen::Index i = 0; i < ds.n(); ++i) {
        const double contrast0 = nu.mu10(i) - nu.mu00(i); // m = 0
        const double contrast1 = nu.mu11(i) - nu.mu01(i); // m = 1
        th0 += contrast1 * nu.q0(i) + contrast0 * (1.0 - nu.q0(i));
        th1 += contrast1 * nu.q1(i) + contrast0 * (1.0 - nu.q1(i));
        const double dq = nu.q1(i) - nu.q0(i);
        de0 += nu.mu01(i) * dq - nu.mu00(i) * dq;
        de1 += nu.mu11(i) * dq - nu.mu10(i) * dq;
    }
    EffectEstimates e;
    e.direct_0 = th0 / n;
    e.direct_1 = th1 / n;
    e.indirect_0 = de0 / n;
    e.indirect_1 = de1 / n;
    e.total = e.direct_0 + e.indirect_1;
    return e;
}

// Cross-world plug-in inputs for the implicit path: om_tt'(i) = omega(t, t', X_i).
struct CrossWorldMeans {
    Eigen::VectorXd om11, om10, om01, om00;
};

inline EffectEstimates g_computation_implicit_from(const CrossWorldMeans& om) {
    EffectEstimates e;
    e.direct_0 = (om.om10 - om.om00).mean();
    e.direct_1 = (om.om11 - om.om01).mean();
    e.indirect_0 = (om.om01 - om.om00).mean();
    e.indirect_1 = (om.om11 - om.om10).mean();
    e.total = e.direct_0 + e.indirect_1;
    return e;
}

inline EffectEstimates g_computation(const Dataset& ds, const NuisanceSpec& spec) {
    validate_dataset(ds);
    spec.validate();
    const Eigen::Index n = ds.n();

    if (ds.mediator_kind == MediatorKind::Binary1D) {
        ExplicitGNuisances nu;
        nu.mu00.resize(n); nu.mu01.resize(n); nu.mu10.resize(n); nu.mu11.resize(n);
        nu.q1.resize(n); nu.q0.resize(n);
        detail::for_each_nuisance_fit(ds, spec, [&](const std::vector<Eigen::Index>& train,
                                                    const std::vector<Eigen::Index>& eval_rows, std::size_t fold) {
            NuisanceSpec mu_spec = spec;
            mu_spec.seed = derive_seed(spec.seed, 0x30f2ULL, fold);
            const Dataset tr = detail::subset(ds, train);
            const FittedRegressor mu = fit_regressor(outcome_features(tr), tr.y, mu_spec);
            const FittedClassifier f1 =
                detail::fit_arm_mediator_model(ds, train, 1.0, spec, derive_seed(spec.seed, 0xf1ULL, fold));
            const FittedClassifier f0 =
                detail::fit_arm_mediator_model(ds, train, 0.0, spec, derive_seed(spec.seed, 0xf0ULL, fold));

            const Dataset ev = detail::subset(ds, eval_rows);
            Dataset grid = ev;
            for (int t = 0; t <= 1; ++t)
                for (int m = 0; m <= 1; ++m) {
                    grid.m.col(0).setConstant(static_cast<double>(m));
                    const Eigen::VectorXd pred =
                        mu.predict(outcome_features_at(grid, static_cast<double>(t)));
                    Eigen::VectorXd& dst = t == 0 ? (m == 0 ? nu.mu00 : nu.mu01)
                                                  : (m == 0 ? nu.mu10 : nu.mu11);
                    detail::scatter(dst, eval_rows, pred);
                }
            detail::scatter(nu.q1, eval_rows, f1.predict_proba(ev.x));
            detail::scatter(nu.q0, eval_rows, f0.predict_proba(ev.x));
        });
        return g_computation_from(ds, nu);
    }

    CrossWorldMeans om;
    om.om11.resize(n); om.om10.resize(n); om.om01.resize(n); om.om00.resize(n);
    detail::for_each_nuisance_fit(ds, spec, [&](const std::vector<Eigen::Index>& train,
                                                const std::vector<Eigen::Index>& eval_rows, std::size_t fold) {
        const FittedRegressor mu =
            detail::fit_arm_outcome_model(ds, train, spec, derive_seed(spec.seed, 0x30f2ULL, fold));
        for (int t = 0; t <= 1; ++t)
            for (int tp = 0; tp <= 1; ++tp) {
                const Eigen::VectorXd pred = detail::cross_world_eval(
                    ds, mu, t, tp, train, eval_rows, spec,
                    derive_seed(spec.seed, 0x0cdbULL, static_cast<std::uint64_t>(2 * t + tp), fold));
                Eigen::VectorXd& dst = t == 1 ? (tp == 1 ? om.om11 : om.om10)
                                              : (tp == 1 ? om.om01 : om.om00);
                detail::scatter(dst, eval_rows, pred);
            }
    });
    return g_computation_implicit_from(om);
}

// ---------------------------------------------------------------------------
// IPW
// ---------------------------------------------------------------------------

// Pure normalized-weighting formula over per-row propensities; the estimate
// of each potential-outcome mean is a self-normalized weighted mean of Y.
inline EffectEstimates ipw_from(const Dataset& ds, const Eigen::VectorXd& p, const Eigen::VectorXd& rho) {
    const Eigen::Index n = ds.n();
    Eigen::VectorXd w_y1m0(n), w_y0m0(n), w_y1m1(n), w_y0m1(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double t = ds.t(i);
        w_y1m0(i) = t * (1.0 - rho(i)) / (rho(i) * (1.0 - p(i)));
        w_y0m0(i) = (1.0 - t) / (1.0 - p(i));
        w_y1m1(i) = t / p(i);
        w_y0m1(i) = (1.0 - t) * rho(i) / ((1.0 - rho(i)) * p(i));
    }
    const double y1m0 = detail::normalized_mean(w_y1m0, ds.y);
    const double y0m0 = detail::normalized_mean(w_y0m0, ds.y);
    const double y1m1 = detail::normalized_mean(w_y1m1, ds.y);
    const double y0m1 = detail::normalized_mean(w_y0m1, ds.y);

    EffectEstimates e;
    e.direct_0 = y1m0 - y0m0;
    e.direct_1 = y1m1 - y0m1;
    e.indirect_1 = y1m1 - y1m0;
    e.indirect_0 = y0m1 - y0m0;
    e.total = e.direct_0 + e.indirect_1; // = y1m1 - y0m0, free of rho
    return e;
}

inline EffectEstimates ipw(const Dataset& ds, const NuisanceSpec& spec) {
    validate_dataset(ds);
    spec.validate();
    const Eigen::Index n = ds.n();
    Eigen::VectorXd p(n), rho(n);
    detail::for_each_nuisance_fit(ds, spec, [&](const std::vector<Eigen::Index>& train,
                                                const std::vector<Eigen::Index>& eval_rows, std::size_t fold) {
        const Dataset tr = detail::subset(ds, train);
        NuisanceSpec sp = spec;
        sp.seed = derive_seed(spec.seed, 0x70ULL, fold);
        const FittedClassifier p_hat = fit_classifier(tr.x, tr.t, sp);
        sp.seed = derive_seed(spec.seed, 0x72ULL, fold);
        const FittedClassifier rho_hat = fit_classifier(detail::mediator_features(tr), tr.t, sp);

        const Dataset ev = detail::subset(ds, eval_rows);
        detail::scatter(p, eval_rows, p_hat.predict_proba(ev.x));
        detail::scatter(rho, eval_rows, rho_hat.predict_proba(detail::mediator_features(ev)));
    });
    return ipw_from(ds, p, rho);
}

// ---------------------------------------------------------------------------
// Multiply-robust / DML (shared influence-function core)
// ---------------------------------------------------------------------------

// Per-row nuisance predictions feeding the influence-function estimator.
// ratio10(i) = f_hat(M_i | 0, X_i) / f_hat(M_i | 1, X_i); the DML route
// substitutes (1 - rho) p / (rho (1 - p)) for it via Bayes' rule.
struct InfluenceNuisances {
    Eigen::VectorXd p;
    Eigen::VectorXd ratio10;
    Eigen::VectorXd mu1, mu0;
    Eigen::VectorXd om11, om10, om01, om00;
};

inline EffectEstimates influence_estimate_from(const Dataset& ds, const InfluenceNuisances& nu) {
    const Eigen::Index n = ds.n();
    Eigen::VectorXd w10(n), w00(n), w11(n), w01(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double t = ds.t(i);
        w10(i) = t * nu.ratio10(i) / nu.p(i);
        w00(i) = (1.0 - t) / (1.0 - nu.p(i));
        w11(i) = t / nu.p(i);
        // mirror weight, ratio01 = 1 / ratio10
        w01(i) = (1.0 - t) / ((1.0 - nu.p(i)) * nu.ratio10(i));
    }

    const Eigen::VectorXd r1 = ds.y - nu.mu1;
    const Eigen::VectorXd r0 = ds.y - nu.mu0;

    const double psi10 = detail::normalized_mean(w10, r1) +
                         detail::normalized_mean(w00, nu.mu1 - nu.om10) + nu.om10.mean();
    const double psi00 = detail::normalized_mean(w00, r0) +
                         detail::normalized_mean(w00, nu.mu0 - nu.om00) + nu.om00.mean();
    const double psi11 = detail::normalized_mean(w11, r1) +
                         detail::normalized_mean(w11, nu.mu1 - nu.om11) + nu.om11.mean();
    const double psi01 = detail::normalized_mean(w01, r0) +
                         detail::normalized_mean(w11, nu.mu0 - nu.om01) + nu.om01.mean();

    EffectEstimates e;
    e.direct_0 = psi10 - psi00;
    e.direct_1 = psi11 - psi01;
    e.indirect_1 = psi11 - psi10;
    e.indirect_0 = psi01 - psi00;
    e.total = e.direct_0 + e.indirect_1;
    return e;
}

namespace detail {

// Fits p, mu, omega (shared by both influence-function estimators) and the
// route-specific density ratio, out-of-fold when cross-fitting is on.
inline InfluenceNuisances fit_influence_nuisances(const Dataset& ds, const NuisanceSpec& spec,
                                                  bool via_rho) {
    const Eigen::Index n = ds.n();
    InfluenceNuisances nu;
    nu.p.resize(n); nu.ratio10.resize(n);
    nu.mu1.resize(n); nu.mu0.resize(n);
    nu.om11.resize(n); nu.om10.resize(n); nu.om01.resize(n); nu.om00.resize(n);

    for_each_nuisance_fit(ds, spec, [&](const std::vector<Eigen::Index>& train,
                                        const std::vector<Eigen::Index>& eval_rows, std::size_t fold) {
        const Dataset tr = subset(ds, train);
        const Dataset ev = subset(ds, eval_rows);

        NuisanceSpec sp = spec;
        sp.seed = derive_seed(spec.seed, 0x70ULL, fold);
        const FittedClassifier p_hat = fit_classifier(tr.x, tr.t, sp);
        const Eigen::VectorXd p_ev = p_hat.predict_proba(ev.x);
        scatter(nu.p, eval_rows, p_ev);

        NuisanceSpec mu_spec = spec;
        mu_spec.seed = derive_seed(spec.seed, 0x30f2ULL, fold);
        const FittedRegressor mu = fit_regressor(outcome_features(tr), tr.y, mu_spec);
        scatter(nu.mu1, eval_rows, mu.predict(outcome_features_at(ev, 1.0)));
        scatter(nu.mu0, eval_rows, mu.predict(outcome_features_at(ev, 0.0)));

        for (int t = 0; t <= 1; ++t)
            for (int tp = 0; tp <= 1; ++tp) {
                const Eigen::VectorXd pred = cross_world_eval(
                    ds, mu, t, tp, train, eval_rows, spec,
                    derive_seed(spec.seed, 0x0cdbULL, static_cast<std::uint64_t>(2 * t + tp), fold));
                Eigen::VectorXd& dst = t == 1 ? (tp == 1 ? nu.om11 : nu.om10)
                                              : (tp == 1 ? nu.om01 : nu.om00);
                scatter(dst, eval_rows, pred);
            }

        if (via_rho) {
            NuisanceSpec rs = spec;
            rs.seed = derive_seed(spec.seed, 0x72ULL, fold);
            const FittedClassifier rho_hat = fit_classifier(mediator_features(tr), tr.t, rs);
            const Eigen::VectorXd rho_ev = rho_hat.predict_proba(mediator_features(ev));
            for (std::size_t i = 0; i < eval_rows.size(); ++i) {
                const auto ii = static_cast<Eigen::Index>(i);
                nu.ratio10(eval_rows[i]) =
                    (1.0 - rho_ev(ii)) * p_ev(ii) / (rho_ev(ii) * (1.0 - p_ev(ii)));
            }
        } else {
            const FittedClassifier f1 =
                fit_arm_mediator_model(ds, train, 1.0, spec, derive_seed(spec.seed, 0xf1ULL, fold));
            const FittedClassifier f0 =
                fit_arm_mediator_model(ds, train, 0.0, spec, derive_seed(spec.seed, 0xf0ULL, fold));
            const Eigen::VectorXd q1 = f1.predict_proba(ev.x);
            const Eigen::VectorXd q0 = f0.predict_proba(ev.x);
            for (std::size_t i = 0; i < eval_rows.size(); ++i) {
                const auto ii = static_cast<Eigen::Index>(i);
                const double mi = ev.m(ii, 0);
                const double fm1 = mi * q1(ii) + (1.0 - mi) * (1.0 - q1(ii));
                const double fm0 = mi * q0(ii) + (1.0 - mi) * (1.0 - q0(ii));
                nu.ratio10(eval_rows[i]) = fm0 / fm1;
            }
        }
    });
    return nu;
}

} // namespace detail

inline EffectEstimates multiply_robust(const Dataset& ds, const NuisanceSpec& spec) {
    validate_dataset(ds);
    spec.validate();
    if (ds.mediator_kind != MediatorKind::Binary1D)
        fail(ErrorCode::UnsupportedMediator, "multiply_robust requires a 1-D binary mediator");
    return influence_estimate_from(ds, detail::fit_influence_nuisances(ds, spec, /*via_rho=*/false));
}

inline EffectEstimates dml(const Dataset& ds, const NuisanceSpec& spec) {
    validate_dataset(ds);
    spec.validate();
    return influence_estimate_from(ds, detail::fit_influence_nuisances(ds, spec, /*via_rho=*/true));
}

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

struct EstimateReport {
    EstimatorId id;
    EffectEstimates effects;
    std::vector<std::string> nuisances_fit; // provenance for reports
};

inline EstimateReport estimate(EstimatorId id, const Dataset& ds, const NuisanceSpec& spec) {
    if (!estimator_supports(id, ds.mediator_kind))
        fail(ErrorCode::UnsupportedMediator, std::string(estimator_name(id)) + " does not handle " +
                                                 mediator_kind_name(ds.mediator_kind) + " mediators");
    EstimateReport report;
    report.id = id;
    switch (id) {
        case EstimatorId::CoefficientProduct:
            report.effects = coefficient_product(ds, spec);
            report.nuisances_fit = {"mediator_regression", "outcome_regression"};
            break;
        case EstimatorId::GComputation:
            report.effects = g_computation(ds, spec);
            report.nuisances_fit = ds.mediator_kind == MediatorKind::Binary1D
                                       ? std::vector<std::string>{"outcome_regression", "mediator_probability"}
                                       : std::vector<std::string>{"outcome_regression", "cross_world_means"};
            break;
        case EstimatorId::Ipw:
            report.effects = ipw(ds, spec);
            report.nuisances_fit = {"propensity", "extended_propensity"};
            break;
        case EstimatorId::MultiplyRobust:
            report.effects = multiply_robust(ds, spec);
            report.nuisances_fit = {"propensity", "mediator_probability", "outcome_regression",
                                    "cross_world_means"};
            break;
        case EstimatorId::Dml:
            report.effects = dml(ds, spec);
            report.nuisances_fit = {"propensity", "extended_propensity", "outcome_regression",
                                    "cross_world_means"};
            break;
    }
    return report;
}

} // namespace medestim
