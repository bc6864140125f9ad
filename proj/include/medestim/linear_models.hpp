#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "medestim/errors.hpp"
#include "medestim/rng.hpp"

namespace medestim {

inline double expit(double z) {
    if (z >= 0.0) {
        const double e = std::exp(-z);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

inline double logit(double p) { return std::log(p / (1.0 - p)); }

// [1 | X] design matrix; the intercept is always appended internally and is
// never penalized.
inline Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& x) {
    Eigen::MatrixXd z(x.rows(), x.cols() + 1);
    z.col(0).setOnes();
    z.rightCols(x.cols()) = x;
    return z;
}

// Ridge solution of ||Z b - y||^2 + lambda * |b_1..d|^2 with Z = [1 | X].
inline Eigen::VectorXd ridge_solve(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda) {
    const Eigen::MatrixXd z = with_intercept(x);
    Eigen::MatrixXd a = z.transpose() * z;
    for (Eigen::Index j = 1; j < a.rows(); ++j) a(j, j) += lambda;
    return a.ldlt().solve(z.transpose() * y);
}

struct LinearModel {
    Eigen::VectorXd coef; // intercept first

    double predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
        return coef(0) + x * coef.tail(coef.size() - 1);
    }
    Eigen::VectorXd predict(const Eigen::MatrixXd& x) const {
        return Eigen::VectorXd::Constant(x.rows(), coef(0)) + x * coef.tail(coef.size() - 1);
    }
};

inline LinearModel fit_linear(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda) {
    if (!x.allFinite() || !y.allFinite())
        fail(ErrorCode::DegenerateDesign, "non-finite values in regression inputs");
    return LinearModel{ridge_solve(x, y, lambda)};
}

// Penalized logistic regression by damped Newton / IRLS. Convergence is on
// the infinity norm of the mean gradient (<= tol), at most max_iter steps.
struct LogisticModel {
    Eigen::VectorXd coef; // intercept first

    double score(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
        return coef(0) + x * coef.tail(coef.size() - 1);
    }
    double predict_proba(const Eigen::Ref<const Eigen::RowVectorXd>& x) const { return expit(score(x)); }
    Eigen::VectorXd predict_proba(const Eigen::MatrixXd& x) const {
        Eigen::VectorXd s = Eigen::VectorXd::Constant(x.rows(), coef(0)) + x * coef.tail(coef.size() - 1);
        for (Eigen::Index i = 0; i < s.size(); ++i) s(i) = expit(s(i));
        return s;
    }
};

inline LogisticModel fit_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& t, double lambda,
                                  double tol = 1e-8, int max_iter = 1000) {
    if (!x.allFinite() || !t.allFinite())
        fail(ErrorCode::DegenerateDesign, "non-finite values in classifier inputs");
    const double mean_t = t.mean();
    if (mean_t <= 0.0 || mean_t >= 1.0)
        fail(ErrorCode::SingleClass, "all labels identical");

    const Eigen::MatrixXd z = with_intercept(x);
    const Eigen::Index n = z.rows(), d = z.cols();
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(d);

    auto objective = [&](const Eigen::VectorXd& b) {
        const Eigen::VectorXd s = z * b;
        double nll = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            // log(1 + exp(s)) - t*s, computed stably
            const double si = s(i);
            nll += (si > 0 ? si + std::log1p(std::exp(-si)) : std::log1p(std::exp(si))) - t(i) * si;
        }
        return nll + 0.5 * lambda * b.tail(d - 1).squaredNorm();
    };

    double obj = objective(beta);
    for (int iter = 0; iter < max_iter; ++iter) {
        const Eigen::VectorXd s = z * beta;
        Eigen::VectorXd p(n), w(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            p(i) = expit(s(i));
            w(i) = std::max(p(i) * (1.0 - p(i)), 1e-10);
        }
        Eigen::VectorXd grad = z.transpose() * (p - t);
        grad.tail(d - 1) += lambda * beta.tail(d - 1);
        if ((grad / static_cast<double>(n)).lpNorm<Eigen::Infinity>() <= tol) break;

        Eigen::MatrixXd h = z.transpose() * w.asDiagonal() * z;
        for (Eigen::Index j = 1; j < d; ++j) h(j, j) += lambda;
        const Eigen::VectorXd step = h.ldlt().solve(grad);

        double scale = 1.0;
        Eigen::VectorXd candidate = beta - step;
        double cand_obj = objective(candidate);
        for (int half = 0; half < 30 && !(cand_obj <= obj); ++half) {
            scale *= 0.5;
            candidate = beta - scale * step;
            cand_obj = objective(candidate);
        }
        beta = candidate;
        obj = cand_obj;
    }
    return LogisticModel{beta};
}

// Seeded Fisher-Yates; std::shuffle is implementation-defined, this is not.
inline std::vector<Eigen::Index> shuffled_indices(Eigen::Index n, std::uint64_t seed) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
    Rng rng(seed);
    for (Eigen::Index i = n - 1; i > 0; --i) {
        const auto j = static_cast<Eigen::Index>(rng.uniform_int(static_cast<std::uint64_t>(i) + 1));
        std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
    return idx;
}

// Disjoint, exhaustive fold assignment from a seeded shuffle; fold sizes
// differ by at most one.
inline std::vector<std::vector<Eigen::Index>> make_folds(Eigen::Index n, int folds, std::uint64_t seed) {
    if (folds < 2) fail(ErrorCode::TooFewRows, "need at least 2 folds");
    if (n < folds) fail(ErrorCode::TooFewRows, "fewer rows than folds");
    const std::vector<Eigen::Index> idx = shuffled_indices(n, seed);
    std::vector<std::vector<Eigen::Index>> out(static_cast<std::size_t>(folds));
    const Eigen::Index base = n / folds, extra = n % folds;
    Eigen::Index pos = 0;
    for (int k = 0; k < folds; ++k) {
        const Eigen::Index size = base + (k < extra ? 1 : 0);
        out[static_cast<std::size_t>(k)].assign(idx.begin() + pos, idx.begin() + pos + size);
        pos += size;
    }
    return out;
}

inline Eigen::MatrixXd take_rows(const Eigen::MatrixXd& x, const std::vector<Eigen::Index>& rows) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), x.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(rows[i]);
    return out;
}

inline Eigen::VectorXd take(const Eigen::VectorXd& v, const std::vector<Eigen::Index>& rows) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) out(static_cast<Eigen::Index>(i)) = v(rows[i]);
    return out;
}

// 5-fold CV over the penalty grid; regression scores by MSE, classification
// by log-loss. Ties go to the first grid entry.
inline double select_ridge_penalty(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                   const std::vector<double>& grid, bool classification,
                                   std::uint64_t seed, int cv_folds = 5) {
    if (grid.empty()) fail(ErrorCode::ConfigError, "empty ridge grid");
    if (grid.size() == 1) return grid.front();
    const int folds = static_cast<int>(std::min<Eigen::Index>(cv_folds, x.rows()));
    if (folds < 2) return grid.front();
    const auto fold_idx = make_folds(x.rows(), folds, derive_seed(seed, 0x9d5cu));

    double best_score = std::numeric_limits<double>::infinity();
    double best_lambda = grid.front();
    for (double lambda : grid) {
        double score = 0.0;
        Eigen::Index count = 0;
        bool usable = true;
        for (const auto& test : fold_idx) {
            std::vector<Eigen::Index> train;
            train.reserve(static_cast<std::size_t>(x.rows()) - test.size());
            for (const auto& other : fold_idx)
                if (&other != &test) train.insert(train.end(), other.begin(), other.end());
            const Eigen::MatrixXd xtr = take_rows(x, train);
            const Eigen::VectorXd ytr = take(y, train);
            const Eigen::MatrixXd xte = take_rows(x, test);
            const Eigen::VectorXd yte = take(y, test);
            if (classification) {
                const double mt = ytr.mean();
                if (mt <= 0.0 || mt >= 1.0) { usable = false; break; }
                const LogisticModel m = fit_logistic(xtr, ytr, lambda);
                const Eigen::VectorXd p = m.predict_proba(xte);
                for (Eigen::Index i = 0; i < p.size(); ++i) {
                    const double q = std::clamp(p(i), 1e-12, 1.0 - 1e-12);
                    score -= yte(i) * std::log(q) + (1.0 - yte(i)) * std::log(1.0 - q);
                }
            } else {
                const LinearModel m = fit_linear(xtr, ytr, lambda);
                score += (m.predict(xte) - yte).squaredNorm();
            }
            count += static_cast<Eigen::Index>(test.size());
        }
        if (!usable) continue;
        score /= static_cast<double>(count);
        if (score < best_score - 1e-15) {
            best_score = score;
            best_lambda = lambda;
        }
    }
    return best_lambda;
}

} // namespace medestim
