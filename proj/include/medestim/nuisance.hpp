#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "medestim/data_model.hpp"
#include "medestim/errors.hpp"
#include "medestim/forest.hpp"
#include "medestim/linear_models.hpp"

namespace medestim {

enum class ModelFamily { LinearUnregularized, LinearRidgeCV, Forest };

inline const char* model_family_name(ModelFamily f) {
    switch (f) {
        case ModelFamily::LinearUnregularized: return "linear";
        case ModelFamily::LinearRidgeCV: return "ridge_cv";
        case ModelFamily::Forest: return "forest";
    }
    return "?";
}

// Shared configuration for every nuisance model an estimator fits.
struct NuisanceSpec {
    ModelFamily family = ModelFamily::LinearUnregularized;
    bool calibrate = false;
    int crossfit_folds = 0; // 0 = no cross-fitting, otherwise >= 2
    double clip_eps = 1e-6;
    std::vector<double> ridge_grid = {1e-8, 1e-6, 1e-4, 1e-2, 1.0, 1e2};
    ForestParams forest_params;
    std::uint64_t seed = 0;

    void validate() const {
        if (crossfit_folds != 0 && crossfit_folds < 2)
            fail(ErrorCode::ConfigError, "crossfit_folds must be 0 or >= 2");
        if (!(clip_eps > 0.0 && clip_eps < 0.5))
            fail(ErrorCode::ConfigError, "clip_eps must be in (0, 0.5)");
    }
};

// The fixed penalty standing in for an unpenalized solve; a numerical
// stabilizer only.
inline constexpr double kUnregularizedPenalty = 1e-12;

namespace detail {

struct RegressorImpl {
    virtual ~RegressorImpl() = default;
    virtual double predict_one(const Eigen::Ref<const Eigen::RowVectorXd>& x) const = 0;
    virtual Eigen::VectorXd predict_many(const Eigen::MatrixXd& x) const = 0;
};

struct LinearRegressorImpl final : RegressorImpl {
    LinearModel model;
    explicit LinearRegressorImpl(LinearModel m) : model(std::move(m)) {}
    double predict_one(const Eigen::Ref<const Eigen::RowVectorXd>& x) const override { return model.predict(x); }
    Eigen::VectorXd predict_many(const Eigen::MatrixXd& x) const override { return model.predict(x); }
};

struct ForestRegressorImpl final : RegressorImpl {
    RandomForest forest;
    explicit ForestRegressorImpl(RandomForest f) : forest(std::move(f)) {}
    double predict_one(const Eigen::Ref<const Eigen::RowVectorXd>& x) const override {
        return forest.predict_one(x);
    }
    Eigen::VectorXd predict_many(const Eigen::MatrixXd& x) const override { return forest.predict(x); }
};

} // namespace detail

// Value-semantic fitted regression model; immutable and cheap to copy.
class FittedRegressor {
public:
    FittedRegressor() = default;
    explicit FittedRegressor(std::shared_ptr<const detail::RegressorImpl> impl) : impl_(std::move(impl)) {}

    double predict_one(const Eigen::Ref<const Eigen::RowVectorXd>& x) const { return impl_->predict_one(x); }
    Eigen::VectorXd predict(const Eigen::MatrixXd& x) const { return impl_->predict_many(x); }
    bool valid() const { return impl_ != nullptr; }

private:
    std::shared_ptr<const detail::RegressorImpl> impl_;
};

// Fitted classifier; predict_proba is clipped into [clip_eps, 1 - clip_eps].
class FittedClassifier {
public:
    using ScoreFn = std::function<Eigen::VectorXd(const Eigen::MatrixXd&)>;

    FittedClassifier() = default;
    FittedClassifier(ScoreFn raw, double clip_eps) : raw_(std::move(raw)), clip_eps_(clip_eps) {}

    double predict_proba_one(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
        Eigen::MatrixXd one(1, x.size());
        one.row(0) = x;
        return predict_proba(one)(0);
    }
    Eigen::VectorXd predict_proba(const Eigen::MatrixXd& x) const {
        Eigen::VectorXd p = raw_(x);
        for (Eigen::Index i = 0; i < p.size(); ++i) p(i) = std::clamp(p(i), clip_eps_, 1.0 - clip_eps_);
        return p;
    }
    bool valid() const { return static_cast<bool>(raw_); }

private:
    ScoreFn raw_;
    double clip_eps_ = 1e-6;
};

inline FittedRegressor fit_regressor(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                     const NuisanceSpec& spec) {
    spec.validate();
    if (x.rows() != y.size() || x.rows() < 2 || x.cols() < 1)
        fail(ErrorCode::TooFewRows, "regressor needs >= 2 aligned rows and >= 1 feature");
    switch (spec.family) {
        case ModelFamily::LinearUnregularized:
            return FittedRegressor(
                std::make_shared<detail::LinearRegressorImpl>(fit_linear(x, y, kUnregularizedPenalty)));
        case ModelFamily::LinearRidgeCV: {
            const double lambda =
                select_ridge_penalty(x, y, spec.ridge_grid, /*classification=*/false, spec.seed);
            return FittedRegressor(std::make_shared<detail::LinearRegressorImpl>(fit_linear(x, y, lambda)));
        }
        case ModelFamily::Forest: {
            if (!x.allFinite() || !y.allFinite())
                fail(ErrorCode::DegenerateDesign, "non-finite values in regression inputs");
            RandomForest forest;
            forest.fit(x, y, spec.forest_params, derive_seed(spec.seed, 0xf0e57ULL));
            return FittedRegressor(std::make_shared<detail::ForestRegressorImpl>(std::move(forest)));
        }
    }
    fail(ErrorCode::UnsupportedFamily, "unknown model family");
}

namespace detail {

inline FittedClassifier fit_classifier_uncalibrated(const Eigen::MatrixXd& x, const Eigen::VectorXd& t,
                                                    const NuisanceSpec& spec, std::uint64_t seed) {
    switch (spec.family) {
        case ModelFamily::LinearUnregularized: {
            auto model = std::make_shared<LogisticModel>(fit_logistic(x, t, kUnregularizedPenalty));
            return FittedClassifier([model](const Eigen::MatrixXd& q) { return model->predict_proba(q); },
                                    spec.clip_eps);
        }
        case ModelFamily::LinearRidgeCV: {
            const double lambda = select_ridge_penalty(x, t, spec.ridge_grid, /*classification=*/true, seed);
            auto model = std::make_shared<LogisticModel>(fit_logistic(x, t, lambda));
            return FittedClassifier([model](const Eigen::MatrixXd& q) { return model->predict_proba(q); },
                                    spec.clip_eps);
        }
        case ModelFamily::Forest: {
            if (!x.allFinite() || !t.allFinite())
                fail(ErrorCode::DegenerateDesign, "non-finite values in classifier inputs");
            auto forest = std::make_shared<RandomForest>();
            forest->fit(x, t, spec.forest_params, derive_seed(seed, 0xc1a55ULL));
            return FittedClassifier([forest](const Eigen::MatrixXd& q) { return forest->predict(q); },
                                    spec.clip_eps);
        }
    }
    fail(ErrorCode::UnsupportedFamily, "unknown model family");
}

} // namespace detail

inline FittedClassifier fit_classifier(const Eigen::MatrixXd& x, const Eigen::VectorXd& t,
                                       const NuisanceSpec& spec) {
    spec.validate();
    if (x.rows() != t.size() || x.rows() < 2)
        fail(ErrorCode::TooFewRows, "classifier needs >= 2 aligned rows");
    const double mt = t.mean();
    if (mt <= 0.0 || mt >= 1.0) fail(ErrorCode::SingleClass, "both classes must be present");

    FittedClassifier base = detail::fit_classifier_uncalibrated(x, t, spec, spec.seed);
    if (!spec.calibrate) return base;

    // Platt-style sigmoid recalibration on 5-fold out-of-fold scores.
    const int folds = static_cast<int>(std::min<Eigen::Index>(5, x.rows()));
    const auto fold_idx = make_folds(x.rows(), folds, derive_seed(spec.seed, 0xca11bULL));
    Eigen::VectorXd oof(x.rows());
    for (std::size_t k = 0; k < fold_idx.size(); ++k) {
        std::vector<Eigen::Index> train;
        for (std::size_t j = 0; j < fold_idx.size(); ++j)
            if (j != k) train.insert(train.end(), fold_idx[j].begin(), fold_idx[j].end());
        const FittedClassifier fold_model = detail::fit_classifier_uncalibrated(
            take_rows(x, train), take(t, train), spec, derive_seed(spec.seed, 0xca11bULL, k));
        const Eigen::VectorXd p = fold_model.predict_proba(take_rows(x, fold_idx[k]));
        for (std::size_t i = 0; i < fold_idx[k].size(); ++i)
            oof(fold_idx[k][i]) = p(static_cast<Eigen::Index>(i));
    }
    Eigen::MatrixXd scores(x.rows(), 1);
    for (Eigen::Index i = 0; i < x.rows(); ++i) scores(i, 0) = logit(oof(i));
    auto sigmoid = std::make_shared<LogisticModel>(fit_logistic(scores, t, kUnregularizedPenalty));
    const double clip = spec.clip_eps;
    return FittedClassifier(
        [base, sigmoid, clip](const Eigen::MatrixXd& q) {
            const Eigen::VectorXd p = base.predict_proba(q);
            Eigen::MatrixXd s(p.size(), 1);
            for (Eigen::Index i = 0; i < p.size(); ++i) s(i, 0) = logit(std::clamp(p(i), clip, 1.0 - clip));
            return sigmoid->predict_proba(s);
        },
        clip);
}

// Out-of-fold predictions: rows are partitioned by a seeded shuffle; each
// row's prediction comes from a model fit on the other folds.
using FitPredictFn = std::function<Eigen::VectorXd(
    const Eigen::MatrixXd& x_train, const Eigen::VectorXd& target_train, const Eigen::MatrixXd& x_eval)>;

inline Eigen::VectorXd crossfit_predictions(const FitPredictFn& fit_fn, const Eigen::MatrixXd& x,
                                            const Eigen::VectorXd& target, int folds, std::uint64_t seed) {
    if (x.rows() != target.size()) fail(ErrorCode::ShapeMismatch, "x and target row counts differ");
    const auto fold_idx = make_folds(x.rows(), folds, seed);
    Eigen::VectorXd out(x.rows());
    for (std::size_t k = 0; k < fold_idx.size(); ++k) {
        std::vector<Eigen::Index> train;
        train.reserve(static_cast<std::size_t>(x.rows()) - fold_idx[k].size());
        for (std::size_t j = 0; j < fold_idx.size(); ++j)
            if (j != k) train.insert(train.end(), fold_idx[j].begin(), fold_idx[j].end());
        const Eigen::VectorXd pred =
            fit_fn(take_rows(x, train), take(target, train), take_rows(x, fold_idx[k]));
        for (std::size_t i = 0; i < fold_idx[k].size(); ++i)
            out(fold_idx[k][i]) = pred(static_cast<Eigen::Index>(i));
    }
    return out;
}

// Feature layout shared by all outcome regressions: [t, m_1..m_L, x_1..x_K].
inline Eigen::MatrixXd outcome_features(const Dataset& ds) {
    Eigen::MatrixXd f(ds.n(), 1 + ds.dim_m() + ds.dim_x());
    f.col(0) = ds.t;
    f.middleCols(1, ds.dim_m()) = ds.m;
    f.rightCols(ds.dim_x()) = ds.x;
    return f;
}

// Same layout with the treatment column forced to t.
inline Eigen::MatrixXd outcome_features_at(const Dataset& ds, double t) {
    Eigen::MatrixXd f = outcome_features(ds);
    f.col(0).setConstant(t);
    return f;
}

// Cross-world conditional mean estimate: evaluate mu_hat at treatment t over
// the observed (M_i, X_i), regress those values on X within the rows with
// T = t_prime, and predict on every row.
inline Eigen::VectorXd cross_world_mean(const Dataset& ds, const FittedRegressor& mu_hat, int t,
                                        int t_prime, const NuisanceSpec& spec) {
    const Eigen::VectorXd mu_t = mu_hat.predict(outcome_features_at(ds, static_cast<double>(t)));
    std::vector<Eigen::Index> arm;
    for (Eigen::Index i = 0; i < ds.n(); ++i)
        if (ds.t(i) == static_cast<double>(t_prime)) arm.push_back(i);
    if (arm.empty()) fail(ErrorCode::EmptyArm, "no rows with T = " + std::to_string(t_prime));

    NuisanceSpec nu_spec = spec;
    nu_spec.seed = derive_seed(spec.seed, 0x0cdbULL, static_cast<std::uint64_t>(t),
                               static_cast<std::uint64_t>(t_prime));
    const FittedRegressor nu = fit_regressor(take_rows(ds.x, arm), take(mu_t, arm), nu_spec);
    return nu.predict(ds.x);
}

} // namespace medestim
