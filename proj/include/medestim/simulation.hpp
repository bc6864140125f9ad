#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "medestim/data_model.hpp"
#include "medestim/errors.hpp"
#include "medestim/linear_models.hpp"
#include "medestim/nuisance.hpp"
#include "medestim/rng.hpp"

namespace medestim {

// One row of the canonical benchmark grid: mediator type and dimension, the
// (wt, wm) strength pair, and the two misspecification switches.
struct SimSetting {
    int setting_id = 0; // 0 marks a custom setting
    int n = 500;
    int dim_x = 5;
    MediatorKind mediator_kind = MediatorKind::Binary1D;
    int dim_m = 1;
    double wt = 0.5; // treatment -> mediator strength
    double wm = 0.5; // mediator -> outcome strength
    bool m_misspec = false; // interaction (T X) enters the mediator model
    bool y_misspec = false; // interaction M T enters the outcome model
    std::uint64_t coef_seed = 0;
};

// Fully resolved DGP coefficients; a deterministic function of
// (coef_seed, dimensions, misspecification flags).
struct CoefficientSet {
    Eigen::VectorXd alpha_x;  // K
    Eigen::MatrixXd beta_x;   // L x K
    Eigen::VectorXd beta_t;   // L, fixed at ones (wt carries the strength)
    Eigen::MatrixXd beta_tx;  // L x K, zero unless m_misspec
    Eigen::VectorXd gamma_x;  // 1_K / K^2
    Eigen::VectorXd gamma_m;  // 1_L / (2L)
    double gamma_t = 1.2;
    Eigen::VectorXd gamma_mt; // gamma_m if y_misspec, else zero
    double sigma_m = 0.5;
    double sigma_y = 0.5;
};

namespace detail {

inline Eigen::VectorXd draw_scaled_normal(Eigen::Index len, double scale, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::VectorXd v(len);
    for (Eigen::Index i = 0; i < len; ++i) v(i) = rng.normal() / scale;
    return v;
}

} // namespace detail

inline CoefficientSet make_coefficients(const SimSetting& s) {
    const auto k = static_cast<Eigen::Index>(s.dim_x);
    const auto l = static_cast<Eigen::Index>(s.dim_m);
    CoefficientSet c;
    // Random draws are standard normal divided by the covariate dimension K;
    // each block has its own stream so adding one never perturbs another.
    c.alpha_x = detail::draw_scaled_normal(k, static_cast<double>(k), derive_seed(s.coef_seed, 1));
    c.beta_x.resize(l, k);
    for (Eigen::Index j = 0; j < l; ++j)
        c.beta_x.row(j) = detail::draw_scaled_normal(k, static_cast<double>(k),
                                                     derive_seed(s.coef_seed, 2, static_cast<std::uint64_t>(j)))
                              .transpose();
    c.beta_t = Eigen::VectorXd::Ones(l);
    c.beta_tx = Eigen::MatrixXd::Zero(l, k);
    if (s.m_misspec)
        for (Eigen::Index j = 0; j < l; ++j)
            c.beta_tx.row(j) =
                detail::draw_scaled_normal(k, static_cast<double>(k),
                                           derive_seed(s.coef_seed, 3, static_cast<std::uint64_t>(j)))
                    .transpose();
    c.gamma_x = Eigen::VectorXd::Constant(k, 1.0 / (static_cast<double>(k) * static_cast<double>(k)));
    c.gamma_m = Eigen::VectorXd::Constant(l, 1.0 / (2.0 * static_cast<double>(l)));
    c.gamma_t = 1.2;
    c.gamma_mt = s.y_misspec ? c.gamma_m : Eigen::VectorXd::Zero(l).eval();
    c.sigma_m = 0.5;
    c.sigma_y = 0.5;
    return c;
}

// Bumped whenever a row of the canonical settings table changes.
inline constexpr int kSettingsTableVersion = 1;

// The 36 canonical settings. Three (wt, wm) regimes per mediator type:
// low mediated proportion, high mediated proportion, high mediated
// proportion with strong overlap violation; within each, the four
// (m_misspec, y_misspec) combinations.
inline const std::vector<SimSetting>& settings_table() {
    static const std::vector<SimSetting> table = [] {
        struct Block {
            MediatorKind kind;
            int dim_m;
            double wt, wm;
        };
        const std::array<Block, 9> blocks = {{
            {MediatorKind::Binary1D, 1, 0.5, 0.5},
            {MediatorKind::Continuous1D, 1, 0.5, 0.5},
            {MediatorKind::ContinuousMultiD, 5, 0.2, 0.2},
            {MediatorKind::Binary1D, 1, 2.0, 10.0},
            {MediatorKind::Continuous1D, 1, 0.8, 5.0},
            {MediatorKind::ContinuousMultiD, 5, 0.3, 5.0},
            {MediatorKind::Binary1D, 1, 4.0, 2.0},
            {MediatorKind::Continuous1D, 1, 2.0, 1.0},
            {MediatorKind::ContinuousMultiD, 5, 1.0, 1.0},
        }};
        std::vector<SimSetting> t;
        int id = 1;
        for (const Block& b : blocks)
            for (int mis = 0; mis < 4; ++mis) {
                SimSetting s;
                s.setting_id = id;
                s.n = 500;
                s.dim_x = 5;
                s.mediator_kind = b.kind;
                s.dim_m = b.dim_m;
                s.wt = b.wt;
                s.wm = b.wm;
                s.m_misspec = mis == 1 || mis == 3;
                s.y_misspec = mis == 2 || mis == 3;
                s.coef_seed = static_cast<std::uint64_t>(id);
                ++id;
                t.push_back(s);
            }
        return t;
    }();
    return table;
}

inline SimSetting make_setting(int setting_id, int n) {
    if (setting_id < 1 || setting_id > 36)
        fail(ErrorCode::UnknownSetting, "setting_id must be in [1, 36], got " + std::to_string(setting_id));
    SimSetting s = settings_table()[static_cast<std::size_t>(setting_id - 1)];
    s.n = n;
    return s;
}

// Draws one dataset from the DGP. Streams for X, T, M, Y are independent and
// derived from (coef_seed, data_seed, stream-id); bit-reproducible.
inline Dataset generate_dataset(const SimSetting& s, std::uint64_t data_seed) {
    const CoefficientSet c = make_coefficients(s);
    const auto n = static_cast<Eigen::Index>(s.n);
    const auto k = static_cast<Eigen::Index>(s.dim_x);
    const auto l = static_cast<Eigen::Index>(s.dim_m);

    Dataset ds;
    ds.mediator_kind = s.mediator_kind;

    Rng rx(derive_seed(s.coef_seed, data_seed, 10));
    ds.x.resize(n, k);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < k; ++j) ds.x(i, j) = rx.normal();

    Rng rt(derive_seed(s.coef_seed, data_seed, 11));
    ds.t.resize(n);
    const Eigen::VectorXd t_score = ds.x * c.alpha_x;
    for (Eigen::Index i = 0; i < n; ++i) ds.t(i) = rt.bernoulli(expit(t_score(i))) ? 1.0 : 0.0;

    Rng rm(derive_seed(s.coef_seed, data_seed, 12));
    ds.m.resize(n, l);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double ti = ds.t(i);
        for (Eigen::Index j = 0; j < l; ++j) {
            const double lin = ds.x.row(i).dot(c.beta_x.row(j)) +
                               ti * ds.x.row(i).dot(c.beta_tx.row(j)) + s.wt * c.beta_t(j) * ti;
            if (s.mediator_kind == MediatorKind::Binary1D)
                ds.m(i, j) = rm.bernoulli(expit(lin)) ? 1.0 : 0.0;
            else
                ds.m(i, j) = lin + c.sigma_m * rm.normal();
        }
    }

    Rng ry(derive_seed(s.coef_seed, data_seed, 13));
    ds.y.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double ti = ds.t(i);
        ds.y(i) = c.gamma_t * ti + ds.x.row(i).dot(c.gamma_x) + s.wm * ds.m.row(i).dot(c.gamma_m) +
                  ti * ds.m.row(i).dot(c.gamma_mt) + c.sigma_y * ry.normal();
    }
    return ds;
}

// Monte-Carlo evaluation of the closed-form effects (expit contrasts for a
// binary mediator, linear contrasts otherwise), integrating over X only.
inline TrueEffects true_effects(const SimSetting& s, int mc_samples = 100000, std::uint64_t seed = 0) {
    if (mc_samples < 10000) fail(ErrorCode::ConfigError, "mc_samples must be >= 10^4");
    const CoefficientSet c = make_coefficients(s);
    const auto k = static_cast<Eigen::Index>(s.dim_x);
    const auto l = static_cast<Eigen::Index>(s.dim_m);
    Rng rng(derive_seed(s.coef_seed, seed, 20));

    // Accumulate per-sample integrands for the five effects.
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(5), sumsq = Eigen::VectorXd::Zero(5);
    Eigen::VectorXd x(k);
    for (int it = 0; it < mc_samples; ++it) {
        for (Eigen::Index j = 0; j < k; ++j) x(j) = rng.normal();
        double th1 = c.gamma_t, th0 = c.gamma_t, de1 = 0.0, de0 = 0.0;
        for (Eigen::Index j = 0; j < l; ++j) {
            const double base = x.dot(c.beta_x.row(j));
            const double m1 = base + x.dot(c.beta_tx.row(j)) + s.wt * c.beta_t(j);
            const double m0 = base;
            const double e1 = s.mediator_kind == MediatorKind::Binary1D ? expit(m1) : m1;
            const double e0 = s.mediator_kind == MediatorKind::Binary1D ? expit(m0) : m0;
            th1 += c.gamma_mt(j) * e1;
            th0 += c.gamma_mt(j) * e0;
            de1 += (e1 - e0) * (s.wm * c.gamma_m(j) + c.gamma_mt(j));
            de0 += (e1 - e0) * (s.wm * c.gamma_m(j));
        }
        const double tot = th0 + de1;
        const Eigen::Matrix<double, 5, 1> v{tot, th1, th0, de1, de0};
        sum += v;
        sumsq += v.cwiseProduct(v);
    }
    const double n = static_cast<double>(mc_samples);
    const Eigen::VectorXd mean = sum / n;
    Eigen::VectorXd se(5);
    for (int i = 0; i < 5; ++i) {
        const double var = std::max(0.0, sumsq(i) / n - mean(i) * mean(i));
        se(i) = std::sqrt(var / n);
    }

    TrueEffects te;
    te.total = mean(0);
    te.direct_1 = mean(1);
    te.direct_0 = mean(2);
    te.indirect_1 = mean(3);
    te.indirect_0 = mean(4);
    te.mediated_prop = te.indirect_1 / te.total;
    te.se_total = se(0);
    te.se_direct_1 = se(1);
    te.se_direct_0 = se(2);
    te.se_indirect_1 = se(3);
    te.se_indirect_0 = se(4);
    return te;
}

// Histogram of the extended propensity rho(M, X) per treatment arm:
// 50 equal-width bins on [0, 1] plus the per-arm prediction range.
struct OverlapDiagnostic {
    static constexpr int n_bins = 50;
    std::array<std::vector<int>, 2> hist; // [arm][bin], arm 0 = control
    std::array<double, 2> min_p{1.0, 1.0};
    std::array<double, 2> max_p{0.0, 0.0};
    std::array<int, 2> arm_count{0, 0};
};

inline OverlapDiagnostic overlap_diagnostic(const Dataset& ds, const NuisanceSpec& spec) {
    validate_dataset(ds);
    Eigen::MatrixXd f(ds.n(), ds.dim_x() + ds.dim_m());
    f.leftCols(ds.dim_x()) = ds.x;
    f.rightCols(ds.dim_m()) = ds.m;
    const FittedClassifier rho = fit_classifier(f, ds.t, spec);
    const Eigen::VectorXd q = rho.predict_proba(f);

    OverlapDiagnostic d;
    d.hist[0].assign(OverlapDiagnostic::n_bins, 0);
    d.hist[1].assign(OverlapDiagnostic::n_bins, 0);
    for (Eigen::Index i = 0; i < ds.n(); ++i) {
        const int arm = ds.t(i) == 1.0 ? 1 : 0;
        const int bin = std::min(OverlapDiagnostic::n_bins - 1,
                                 static_cast<int>(q(i) * OverlapDiagnostic::n_bins));
        d.hist[static_cast<std::size_t>(arm)][static_cast<std::size_t>(bin)] += 1;
        d.min_p[static_cast<std::size_t>(arm)] = std::min(d.min_p[static_cast<std::size_t>(arm)], q(i));
        d.max_p[static_cast<std::size_t>(arm)] = std::max(d.max_p[static_cast<std::size_t>(arm)], q(i));
        d.arm_count[static_cast<std::size_t>(arm)] += 1;
    }
    return d;
}

} // namespace medestim
