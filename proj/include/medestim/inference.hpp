#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "medestim/data_model.hpp"
#include "medestim/errors.hpp"
#include "medestim/estimators.hpp"
#include "medestim/rng.hpp"

namespace medestim {

inline constexpr std::array<const char*, 5> kEffectNames = {"total", "direct_1", "direct_0",
                                                            "indirect_1", "indirect_0"};

inline std::array<double EffectEstimates::*, 5> effect_fields() {
    return {&EffectEstimates::total, &EffectEstimates::direct_1, &EffectEstimates::direct_0,
            &EffectEstimates::indirect_1, &EffectEstimates::indirect_0};
}

// Inverse empirical CDF quantile (nearest-rank, lower). Chosen over
// plotting-position interpolation because it is invariant under replicate
// duplication; documented in the README for cross-language reproduction.
inline double percentile(std::vector<double> sorted_values, double q) {
    if (sorted_values.empty()) fail(ErrorCode::EmptyGroup, "percentile of empty sample");
    const auto b = static_cast<double>(sorted_values.size());
    auto rank = static_cast<std::ptrdiff_t>(std::ceil(q * b));
    rank = std::clamp<std::ptrdiff_t>(rank, 1, static_cast<std::ptrdiff_t>(sorted_values.size()));
    return sorted_values[static_cast<std::size_t>(rank - 1)];
}

struct BootstrapResult {
    EffectEstimates point;   // full-sample estimate
    EffectEstimates ci_low;  // 2.5 percentiles over successful replicates
    EffectEstimates ci_high; // 97.5 percentiles
    int b = 0;
    int n_failed = 0;
};

// A bootstrap replicate that collapses (lost arm, lost class, degenerate
// weights) is dropped and counted; the interval uses the survivors.
inline bool is_replicate_failure(ErrorCode c) {
    return c == ErrorCode::DegenerateWeights || c == ErrorCode::EmptyArm || c == ErrorCode::SingleArm ||
           c == ErrorCode::SingleClass;
}

inline BootstrapResult bootstrap_ci(EstimatorId id, const Dataset& ds, const NuisanceSpec& spec,
                                    int b = 100, std::uint64_t seed = 0) {
    if (b < 2) fail(ErrorCode::ConfigError, "bootstrap needs B >= 2");
    validate_dataset(ds);

    BootstrapResult out;
    out.b = b;
    out.point = estimate(id, ds, spec).effects;

    const Eigen::Index n = ds.n();
    std::array<std::vector<double>, 5> replicates;
    for (auto& v : replicates) v.reserve(static_cast<std::size_t>(b));

    for (int rep = 0; rep < b; ++rep) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(rep), 0xb007ULL));
        std::vector<Eigen::Index> rows(static_cast<std::size_t>(n));
        for (Eigen::Index i = 0; i < n; ++i)
            rows[static_cast<std::size_t>(i)] =
                static_cast<Eigen::Index>(rng.uniform_int(static_cast<std::uint64_t>(n)));
        try {
            const EffectEstimates e = estimate(id, detail::subset(ds, rows), spec).effects;
            const auto fields = effect_fields();
            for (std::size_t f = 0; f < 5; ++f) replicates[f].push_back(e.*fields[f]);
        } catch (const Error& err) {
            if (is_replicate_failure(err.code())) {
                ++out.n_failed;
                continue;
            }
            throw;
        }
    }
    if (replicates[0].empty()) fail(ErrorCode::AllReplicatesFailed, "every bootstrap replicate failed");

    const auto fields = effect_fields();
    for (std::size_t f = 0; f < 5; ++f) {
        std::sort(replicates[f].begin(), replicates[f].end());
        out.ci_low.*fields[f] = percentile(replicates[f], 0.025);
        out.ci_high.*fields[f] = percentile(replicates[f], 0.975);
    }
    return out;
}

// One benchmark grid cell: (setting, n, estimator configuration, repetition).
struct BenchmarkRecord {
    int setting_id = 0;
    int n = 0;
    EstimatorId estimator = EstimatorId::CoefficientProduct;
    ModelFamily family = ModelFamily::LinearUnregularized;
    int crossfit_folds = 0;
    bool calibrate = false;
    int repetition = 0;
    std::uint64_t data_seed = 0;

    bool failed = false;
    std::string failure; // error code name when failed

    EffectEstimates estimates;
    EffectEstimates rel_error; // (estimate - truth) / truth
    EffectEstimates abs_error; // estimate - truth

    bool has_ci = false;
    EffectEstimates ci_low, ci_high;
    std::array<bool, 5> covered{};
    int n_boot_failed = 0;

    double wall_time_ms = 0.0;
};

struct GroupKey {
    int setting_id;
    int n;
    EstimatorId estimator;
    ModelFamily family;
    int crossfit_folds;
    bool calibrate;

    bool operator<(const GroupKey& o) const {
        return std::tie(setting_id, n, estimator, family, crossfit_folds, calibrate) <
               std::tie(o.setting_id, o.n, o.estimator, o.family, o.crossfit_folds, o.calibrate);
    }
};

struct BenchmarkSummary {
    GroupKey key{};
    int n_records = 0; // successful repetitions
    int n_failed = 0;
    EffectEstimates mean_rel, band_rel; // band: 1.96 sd / sqrt(R)
    EffectEstimates mean_abs, band_abs;
    std::array<double, 5> coverage{};      // over records with CIs
    std::array<double, 5> mean_ci_width{}; // over records with CIs
    int n_with_ci = 0;
};

inline std::vector<BenchmarkSummary> aggregate(const std::vector<BenchmarkRecord>& records) {
    if (records.empty()) fail(ErrorCode::EmptyGroup, "no records to aggregate");
    std::map<GroupKey, std::vector<const BenchmarkRecord*>> groups;
    for (const auto& r : records)
        groups[GroupKey{r.setting_id, r.n, r.estimator, r.family, r.crossfit_folds, r.calibrate}].push_back(
            &r);

    const auto fields = effect_fields();
    std::vector<BenchmarkSummary> out;
    for (const auto& [key, rows] : groups) {
        BenchmarkSummary s;
        s.key = key;
        std::array<double, 5> rel_sum{}, rel_sumsq{}, abs_sum{}, abs_sumsq{}, cov_sum{}, width_sum{};
        for (const BenchmarkRecord* r : rows) {
            if (r->failed) {
                ++s.n_failed;
                continue;
            }
            ++s.n_records;
            for (std::size_t f = 0; f < 5; ++f) {
                const double rel = r->rel_error.*fields[f];
                const double abse = r->abs_error.*fields[f];
                rel_sum[f] += rel;
                rel_sumsq[f] += rel * rel;
                abs_sum[f] += abse;
                abs_sumsq[f] += abse * abse;
            }
            if (r->has_ci) {
                for (std::size_t f = 0; f < 5; ++f) {
                    cov_sum[f] += r->covered[f] ? 1.0 : 0.0;
                    width_sum[f] += r->ci_high.*fields[f] - r->ci_low.*fields[f];
                }
            }
            s.n_with_ci += r->has_ci ? 1 : 0;
        }
        const double cnt = static_cast<double>(s.n_records);
        for (std::size_t f = 0; f < 5; ++f) {
            const double rel_mean = cnt > 0 ? rel_sum[f] / cnt : 0.0;
            const double abs_mean = cnt > 0 ? abs_sum[f] / cnt : 0.0;
            s.mean_rel.*fields[f] = rel_mean;
            s.mean_abs.*fields[f] = abs_mean;
            if (cnt > 1) {
                const double rel_var = std::max(0.0, (rel_sumsq[f] - cnt * rel_mean * rel_mean) / (cnt - 1));
                const double abs_var = std::max(0.0, (abs_sumsq[f] - cnt * abs_mean * abs_mean) / (cnt - 1));
                s.band_rel.*fields[f] = 1.96 * std::sqrt(rel_var / cnt);
                s.band_abs.*fields[f] = 1.96 * std::sqrt(abs_var / cnt);
            }
            s.coverage[f] = s.n_with_ci > 0 ? cov_sum[f] / static_cast<double>(s.n_with_ci) : 0.0;
            s.mean_ci_width[f] = s.n_with_ci > 0 ? width_sum[f] / static_cast<double>(s.n_with_ci) : 0.0;
        }
        out.push_back(std::move(s));
    }
    return out;
}

} // namespace medestim
