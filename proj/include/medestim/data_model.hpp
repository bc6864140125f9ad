#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <string>

#include "medestim/errors.hpp"

namespace medestim {

enum class MediatorKind { Binary1D, Continuous1D, ContinuousMultiD };

inline const char* mediator_kind_name(MediatorKind k) {
    switch (k) {
        case MediatorKind::Binary1D: return "binary";
        case MediatorKind::Continuous1D: return "continuous";
        case MediatorKind::ContinuousMultiD: return "continuous_multi";
    }
    return "?";
}

// Aligned (X, T, M, Y) sample. Immutable after validation; safe to share
// read-only across concurrent estimator runs.
struct Dataset {
    Eigen::MatrixXd x;  // n x K covariates
    Eigen::VectorXd t;  // n, entries in {0,1}
    Eigen::MatrixXd m;  // n x L mediators
    Eigen::VectorXd y;  // n outcomes
    MediatorKind mediator_kind = MediatorKind::Continuous1D;

    Eigen::Index n() const { return y.size(); }
    Eigen::Index dim_x() const { return x.cols(); }
    Eigen::Index dim_m() const { return m.cols(); }
};

// The five effects; total = direct_0 + indirect_1 by construction in every
// estimator (tau = theta(0) + delta(1) = theta(1) + delta(0)).
struct EffectEstimates {
    double total = 0.0;
    double direct_1 = 0.0;   // theta(1)
    double direct_0 = 0.0;   // theta(0)
    double indirect_1 = 0.0; // delta(1)
    double indirect_0 = 0.0; // delta(0)
};

struct TrueEffects {
    double total = 0.0;
    double direct_1 = 0.0;
    double direct_0 = 0.0;
    double indirect_1 = 0.0;
    double indirect_0 = 0.0;
    double mediated_prop = 0.0; // indirect_1 / total
    // Monte-Carlo standard errors of the five effect estimates above.
    double se_total = 0.0;
    double se_direct_1 = 0.0;
    double se_direct_0 = 0.0;
    double se_indirect_1 = 0.0;
    double se_indirect_0 = 0.0;
};

inline bool is_binary01(double v) { return v == 0.0 || v == 1.0; }

// Checks every Dataset invariant and returns the dataset untouched.
// Idempotent: a dataset that passes once passes again.
inline const Dataset& validate_dataset(const Dataset& ds) {
    const Eigen::Index n = ds.y.size();
    if (n < 2)
        fail(ErrorCode::ShapeMismatch, "need at least 2 rows, got " + std::to_string(n));
    if (ds.x.rows() != n || ds.t.size() != n || ds.m.rows() != n)
        fail(ErrorCode::ShapeMismatch,
             "row counts differ: x=" + std::to_string(ds.x.rows()) + " t=" + std::to_string(ds.t.size()) +
                 " m=" + std::to_string(ds.m.rows()) + " y=" + std::to_string(n));
    if (ds.x.cols() < 1) fail(ErrorCode::ShapeMismatch, "no covariate columns");
    if (ds.m.cols() < 1) fail(ErrorCode::ShapeMismatch, "no mediator columns");
    if ((ds.mediator_kind == MediatorKind::Binary1D || ds.mediator_kind == MediatorKind::Continuous1D) &&
        ds.m.cols() != 1)
        fail(ErrorCode::ShapeMismatch, "1-D mediator kind with " + std::to_string(ds.m.cols()) + " columns");

    if (!ds.x.allFinite() || !ds.t.allFinite() || !ds.m.allFinite() || !ds.y.allFinite())
        fail(ErrorCode::NonFiniteValue, "dataset contains a non-finite value");

    Eigen::Index n_treated = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!is_binary01(ds.t(i)))
            fail(ErrorCode::NonBinaryTreatment, "t[" + std::to_string(i) + "] = " + std::to_string(ds.t(i)));
        n_treated += ds.t(i) == 1.0 ? 1 : 0;
    }
    if (n_treated == 0 || n_treated == n)
        fail(ErrorCode::SingleArm, "all rows share one treatment arm");

    if (ds.mediator_kind == MediatorKind::Binary1D) {
        for (Eigen::Index i = 0; i < n; ++i)
            if (!is_binary01(ds.m(i, 0)))
                fail(ErrorCode::NonBinaryMediator, "m[" + std::to_string(i) + "] = " + std::to_string(ds.m(i, 0)));
    }
    return ds;
}

} // namespace medestim
