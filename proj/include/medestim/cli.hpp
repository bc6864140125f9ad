#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "medestim/csv.hpp"
#include "medestim/data_model.hpp"
#include "medestim/estimators.hpp"
#include "medestim/inference.hpp"
#include "medestim/simulation.hpp"

namespace medestim::cli {

using nlohmann::json;

struct EstimatorConfig {
    EstimatorId id = EstimatorId::CoefficientProduct;
    NuisanceSpec spec;

    std::string label() const {
        std::string s = estimator_name(id);
        s += "[";
        s += model_family_name(spec.family);
        if (spec.crossfit_folds >= 2) s += ",cf" + std::to_string(spec.crossfit_folds);
        if (spec.calibrate) s += ",cal";
        s += "]";
        return s;
    }
};

struct RunConfig {
    std::vector<int> settings;
    std::vector<int> sample_sizes;
    std::vector<EstimatorConfig> estimators;
    int repetitions = 200;
    int bootstrap_b = 100; // 0 skips confidence intervals
    std::uint64_t master_seed = 0;
    int parallelism = 0; // 0 = available cores
    std::string output_dir;
    int truth_mc_samples = 100000;

    void validate() const {
        if (settings.empty()) fail(ErrorCode::ConfigError, "no settings selected");
        if (sample_sizes.empty()) fail(ErrorCode::ConfigError, "no sample sizes selected");
        if (estimators.empty()) fail(ErrorCode::ConfigError, "no estimators selected");
        if (repetitions < 1) fail(ErrorCode::ConfigError, "repetitions must be >= 1");
        if (bootstrap_b != 0 && bootstrap_b < 2) fail(ErrorCode::ConfigError, "bootstrap_b must be 0 or >= 2");
        if (output_dir.empty()) fail(ErrorCode::ConfigError, "output_dir is required");
        for (int id : settings) make_setting(id, 500); // throws UnknownSetting
        for (const auto& e : estimators) e.spec.validate();
    }
};

struct AnalyzeConfig {
    std::string csv_path;
    std::string treatment;
    std::string outcome;
    std::vector<std::string> mediators;
    std::vector<std::string> covariates;
    MediatorKind mediator_kind = MediatorKind::Continuous1D;
    std::vector<EstimatorConfig> estimators;
    int bootstrap_b = 100;
    std::uint64_t seed = 0;
    std::string out_path; // empty = stdout

    void validate() const {
        if (csv_path.empty()) fail(ErrorCode::ConfigError, "csv path is required");
        if (treatment.empty() || outcome.empty() || mediators.empty() || covariates.empty())
            fail(ErrorCode::ConfigError, "treatment, outcome, mediators and covariates are all required");
        std::vector<std::string> all{treatment, outcome};
        all.insert(all.end(), mediators.begin(), mediators.end());
        all.insert(all.end(), covariates.begin(), covariates.end());
        for (std::size_t i = 0; i < all.size(); ++i)
            for (std::size_t j = i + 1; j < all.size(); ++j)
                if (all[i] == all[j]) fail(ErrorCode::ConfigError, "role columns overlap: '" + all[i] + "'");
        if (mediator_kind != MediatorKind::ContinuousMultiD && mediators.size() != 1)
            fail(ErrorCode::ConfigError, "1-D mediator kind needs exactly one mediator column");
        if (estimators.empty()) fail(ErrorCode::ConfigError, "no estimators selected");
        if (bootstrap_b != 0 && bootstrap_b < 2) fail(ErrorCode::ConfigError, "bootstrap_b must be 0 or >= 2");
        for (const auto& e : estimators) e.spec.validate();
    }
};

// MEDESTIM_THREADS caps parallelism; default is the available cores.
inline int effective_parallelism(int requested) {
    int p = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
    if (p < 1) p = 1;
    if (const char* env = std::getenv("MEDESTIM_THREADS")) {
        const int cap = std::atoi(env);
        if (cap >= 1 && cap < p) p = cap;
    }
    return p;
}

namespace detail {

inline void run_parallel(std::size_t n_tasks, int parallelism, const std::function<void(std::size_t)>& task) {
    const int workers = std::min<int>(parallelism, static_cast<int>(n_tasks));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n_tasks; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < n_tasks; i = next.fetch_add(1)) task(i);
        });
    for (auto& th : pool) th.join();
}

inline std::string tf(bool b) { return b ? "True" : "False"; }

inline std::vector<std::string> effect_columns(const std::string& prefix) {
    std::vector<std::string> out;
    for (const char* name : kEffectNames) out.push_back(prefix + name);
    return out;
}

inline void append_effects(std::vector<std::string>& row, const EffectEstimates& e) {
    const auto fields = effect_fields();
    for (std::size_t f = 0; f < 5; ++f) row.push_back(format_double(e.*fields[f]));
}

inline void append_blank_effects(std::vector<std::string>& row) {
    for (int f = 0; f < 5; ++f) row.emplace_back();
}

inline json effects_to_json(const EffectEstimates& e) {
    json j;
    const auto fields = effect_fields();
    for (std::size_t f = 0; f < 5; ++f) j[kEffectNames[f]] = e.*fields[f];
    return j;
}

inline EstimatorId estimator_from_name(const std::string& name) {
    for (EstimatorId id : {EstimatorId::CoefficientProduct, EstimatorId::GComputation, EstimatorId::Ipw,
                           EstimatorId::MultiplyRobust, EstimatorId::Dml})
        if (name == estimator_name(id)) return id;
    fail(ErrorCode::ConfigError, "unknown estimator '" + name + "'");
}

inline ModelFamily family_from_name(const std::string& name) {
    for (ModelFamily f : {ModelFamily::LinearUnregularized, ModelFamily::LinearRidgeCV, ModelFamily::Forest})
        if (name == model_family_name(f)) return f;
    fail(ErrorCode::ConfigError, "unknown model family '" + name + "'");
}

} // namespace detail

// ---------------------------------------------------------------------------
// benchmark
// ---------------------------------------------------------------------------

struct BenchmarkOutput {
    std::vector<BenchmarkRecord> records;
    std::vector<BenchmarkSummary> summaries;
};

inline BenchmarkOutput run_benchmark(const RunConfig& cfg) {
    cfg.validate();

    // The true-effect oracle per setting, shared by every repetition.
    std::map<int, TrueEffects> truths;
    for (int sid : cfg.settings)
        if (!truths.count(sid))
            truths[sid] = true_effects(make_setting(sid, 500), cfg.truth_mc_samples,
                                       derive_seed({cfg.master_seed, static_cast<std::uint64_t>(sid), 0x7271ULL}));

    struct Task {
        int setting_id, n, estimator_idx, repetition;
    };
    std::vector<Task> tasks;
    for (int sid : cfg.settings)
        for (int n : cfg.sample_sizes)
            for (std::size_t e = 0; e < cfg.estimators.size(); ++e)
                for (int rep = 0; rep < cfg.repetitions; ++rep)
                    tasks.push_back({sid, n, static_cast<int>(e), rep});

    BenchmarkOutput out;
    out.records.resize(tasks.size());
    const auto fields = effect_fields();

    detail::run_parallel(tasks.size(), effective_parallelism(cfg.parallelism), [&](std::size_t ti) {
        const Task& task = tasks[ti];
        const EstimatorConfig& ec = cfg.estimators[static_cast<std::size_t>(task.estimator_idx)];
        const TrueEffects& truth = truths.at(task.setting_id);

        BenchmarkRecord rec;
        rec.setting_id = task.setting_id;
        rec.n = task.n;
        rec.estimator = ec.id;
        rec.family = ec.spec.family;
        rec.crossfit_folds = ec.spec.crossfit_folds;
        rec.calibrate = ec.spec.calibrate;
        rec.repetition = task.repetition;
        // One dataset per (setting, n, repetition), shared across estimators.
        rec.data_seed = derive_seed({cfg.master_seed, static_cast<std::uint64_t>(task.setting_id),
                                     static_cast<std::uint64_t>(task.n),
                                     static_cast<std::uint64_t>(task.repetition), 0xd474ULL});

        const SimSetting setting = make_setting(task.setting_id, task.n);
        if (!estimator_supports(ec.id, setting.mediator_kind)) {
            rec.failed = true;
            rec.failure = error_code_name(ErrorCode::UnsupportedMediator);
            out.records[ti] = std::move(rec);
            return;
        }

        const auto t0 = std::chrono::steady_clock::now();
        try {
            const Dataset ds = generate_dataset(setting, rec.data_seed);
            NuisanceSpec spec = ec.spec;
            spec.seed = derive_seed({cfg.master_seed, static_cast<std::uint64_t>(task.setting_id),
                                     static_cast<std::uint64_t>(task.n),
                                     static_cast<std::uint64_t>(task.repetition),
                                     static_cast<std::uint64_t>(task.estimator_idx), 0x5eedULL});
            if (cfg.bootstrap_b >= 2) {
                const BootstrapResult boot = bootstrap_ci(
                    ec.id, ds, spec, cfg.bootstrap_b,
                    derive_seed({cfg.master_seed, static_cast<std::uint64_t>(task.setting_id),
                                 static_cast<std::uint64_t>(task.n),
                                 static_cast<std::uint64_t>(task.repetition),
                                 static_cast<std::uint64_t>(task.estimator_idx), 0xb007ULL}));
                rec.estimates = boot.point;
                rec.has_ci = true;
                rec.ci_low = boot.ci_low;
                rec.ci_high = boot.ci_high;
                rec.n_boot_failed = boot.n_failed;
            } else {
                rec.estimates = estimate(ec.id, ds, spec).effects;
            }
            const TrueEffects& tr = truth;
            const std::array<double, 5> truth_v = {tr.total, tr.direct_1, tr.direct_0, tr.indirect_1,
                                                   tr.indirect_0};
            for (std::size_t f = 0; f < 5; ++f) {
                const double est = rec.estimates.*fields[f];
                rec.abs_error.*fields[f] = est - truth_v[f];
                rec.rel_error.*fields[f] = (est - truth_v[f]) / truth_v[f];
                if (rec.has_ci)
                    rec.covered[f] =
                        !(truth_v[f] < rec.ci_low.*fields[f] || truth_v[f] > rec.ci_high.*fields[f]);
            }
        } catch (const Error& err) {
            rec.failed = true;
            rec.failure = error_code_name(err.code());
        }
        rec.wall_time_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        out.records[ti] = std::move(rec);
    });

    out.summaries = aggregate(out.records);
    return out;
}

inline void write_benchmark_outputs(const RunConfig& cfg, const BenchmarkOutput& out) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.output_dir);

    {
        CsvWriter w(cfg.output_dir + "/results.csv");
        std::vector<std::string> header = {"setting_id", "n",          "estimator", "family",
                                           "crossfit_folds", "calibrate", "repetition", "data_seed",
                                           "failure"};
        for (const auto& c : detail::effect_columns("")) header.push_back(c);
        for (const auto& c : detail::effect_columns("rel_")) header.push_back(c);
        for (const auto& c : detail::effect_columns("abs_")) header.push_back(c);
        for (const auto& c : detail::effect_columns("ci_low_")) header.push_back(c);
        for (const auto& c : detail::effect_columns("ci_high_")) header.push_back(c);
        for (const auto& c : detail::effect_columns("covered_")) header.push_back(c);
        header.push_back("n_boot_failed");
        w.row(header);

        for (const auto& r : out.records) {
            std::vector<std::string> row = {std::to_string(r.setting_id),
                                            std::to_string(r.n),
                                            estimator_name(r.estimator),
                                            model_family_name(r.family),
                                            std::to_string(r.crossfit_folds),
                                            r.calibrate ? "1" : "0",
                                            std::to_string(r.repetition),
                                            std::to_string(r.data_seed),
                                            r.failure};
            if (r.failed) {
                for (int block = 0; block < 5; ++block) detail::append_blank_effects(row);
                for (int f = 0; f < 5; ++f) row.emplace_back();
                row.push_back("0");
            } else {
                detail::append_effects(row, r.estimates);
                detail::append_effects(row, r.rel_error);
                detail::append_effects(row, r.abs_error);
                if (r.has_ci) {
                    detail::append_effects(row, r.ci_low);
                    detail::append_effects(row, r.ci_high);
                    for (std::size_t f = 0; f < 5; ++f) row.push_back(r.covered[f] ? "1" : "0");
                } else {
                    for (int block = 0; block < 2; ++block) detail::append_blank_effects(row);
                    for (int f = 0; f < 5; ++f) row.emplace_back();
                }
                row.push_back(std::to_string(r.n_boot_failed));
            }
            w.row(row);
        }
    }

    {
        CsvWriter w(cfg.output_dir + "/summary.csv");
        std::vector<std::string> header = {"setting_id", "n", "estimator", "family", "crossfit_folds",
                                           "calibrate",  "n_records", "n_failed", "n_with_ci"};
        for (const auto& c : detail::effect_columns("mean_rel_")) header.push_back(c);
        for (const auto& c : detail::effect_columns("band_rel_")) header.push_back(c);
        for (const auto& c : detail::effect_columns("mean_abs_")) header.push_back(c);
        for (const auto& c : detail::effect_columns("band_abs_")) header.push_back(c);
        for (const auto& c : detail::effect_columns("coverage_")) header.push_back(c);
        for (const auto& c : detail::effect_columns("mean_ci_width_")) header.push_back(c);
        w.row(header);
        for (const auto& s : out.summaries) {
            std::vector<std::string> row = {std::to_string(s.key.setting_id),
                                            std::to_string(s.key.n),
                                            estimator_name(s.key.estimator),
                                            model_family_name(s.key.family),
                                            std::to_string(s.key.crossfit_folds),
                                            s.key.calibrate ? "1" : "0",
                                            std::to_string(s.n_records),
                                            std::to_string(s.n_failed),
                                            std::to_string(s.n_with_ci)};
            detail::append_effects(row, s.mean_rel);
            detail::append_effects(row, s.band_rel);
            detail::append_effects(row, s.mean_abs);
            detail::append_effects(row, s.band_abs);
            for (std::size_t f = 0; f < 5; ++f) row.push_back(format_double(s.coverage[f]));
            for (std::size_t f = 0; f < 5; ++f) row.push_back(format_double(s.mean_ci_width[f]));
            w.row(row);
        }
    }

    {
        json summary = json::array();
        const auto fields = effect_fields();
        for (const auto& s : out.summaries) {
            json g = {{"setting_id", s.key.setting_id},
                      {"n", s.key.n},
                      {"estimator", estimator_name(s.key.estimator)},
                      {"family", model_family_name(s.key.family)},
                      {"crossfit_folds", s.key.crossfit_folds},
                      {"calibrate", s.key.calibrate},
                      {"n_records", s.n_records},
                      {"n_failed", s.n_failed},
                      {"n_with_ci", s.n_with_ci},
                      {"mean_rel", detail::effects_to_json(s.mean_rel)},
                      {"band_rel", detail::effects_to_json(s.band_rel)},
                      {"mean_abs", detail::effects_to_json(s.mean_abs)},
                      {"band_abs", detail::effects_to_json(s.band_abs)}};
            json coverage, width;
            for (std::size_t f = 0; f < 5; ++f) {
                coverage[kEffectNames[f]] = s.coverage[f];
                width[kEffectNames[f]] = s.mean_ci_width[f];
            }
            g["coverage"] = coverage;
            g["mean_ci_width"] = width;
            summary.push_back(std::move(g));
        }
        std::ofstream js(cfg.output_dir + "/summary.json");
        if (!js) fail(ErrorCode::IoError, "cannot write summary.json");
        js << summary.dump(2) << "\n";
    }

    {
        json echo = {{"settings", cfg.settings},
                     {"sample_sizes", cfg.sample_sizes},
                     {"repetitions", cfg.repetitions},
                     {"bootstrap_b", cfg.bootstrap_b},
                     {"master_seed", cfg.master_seed},
                     {"truth_mc_samples", cfg.truth_mc_samples},
                     {"settings_table_version", kSettingsTableVersion}};
        json est = json::array();
        for (const auto& e : cfg.estimators) est.push_back(e.label());
        echo["estimators"] = est;
        std::ofstream js(cfg.output_dir + "/config.json");
        if (!js) fail(ErrorCode::IoError, "cannot write config.json");
        js << echo.dump(2) << "\n";
    }

    {
        // Wall time is not byte-reproducible, so it lives in its own file and
        // results.csv stays deterministic.
        CsvWriter w(cfg.output_dir + "/timings.csv");
        w.row({"setting_id", "n", "estimator", "family", "crossfit_folds", "calibrate", "repetition",
               "wall_time_ms"});
        for (const auto& r : out.records)
            w.row({std::to_string(r.setting_id), std::to_string(r.n), estimator_name(r.estimator),
                   model_family_name(r.family), std::to_string(r.crossfit_folds), r.calibrate ? "1" : "0",
                   std::to_string(r.repetition), format_double(r.wall_time_ms)});
    }
}

inline void cmd_benchmark(const RunConfig& cfg) { write_benchmark_outputs(cfg, run_benchmark(cfg)); }

// ---------------------------------------------------------------------------
// true-effects
// ---------------------------------------------------------------------------

inline void cmd_true_effects(const std::vector<int>& setting_ids, int mc_samples, std::uint64_t seed,
                             const std::string& out_path) {
    CsvWriter w(out_path);
    w.row({"setting_nb", "n", "dim_x", "dim_m", "type_m", "wt_list", "wm_list", "m_misspec", "y_misspec",
           "mediated_prop", "total", "direct_1", "direct_0", "indirect_1", "indirect_0", "se_total",
           "se_direct_1", "se_direct_0", "se_indirect_1", "se_indirect_0"});
    for (int sid : setting_ids) {
        const SimSetting s = make_setting(sid, 500);
        const TrueEffects te = true_effects(s, mc_samples, derive_seed(seed, static_cast<std::uint64_t>(sid)));
        w.row({std::to_string(s.setting_id), std::to_string(s.n), std::to_string(s.dim_x),
               std::to_string(s.dim_m),
               s.mediator_kind == MediatorKind::Binary1D ? "binary" : "continuous",
               format_double(s.wt), format_double(s.wm), detail::tf(s.m_misspec), detail::tf(s.y_misspec),
               format_double(te.mediated_prop), format_double(te.total), format_double(te.direct_1),
               format_double(te.direct_0), format_double(te.indirect_1), format_double(te.indirect_0),
               format_double(te.se_total), format_double(te.se_direct_1), format_double(te.se_direct_0),
               format_double(te.se_indirect_1), format_double(te.se_indirect_0)});
    }
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

inline void cmd_simulate(int setting_id, int n, std::uint64_t seed, const std::string& out_path) {
    const SimSetting s = make_setting(setting_id, n);
    const Dataset ds = generate_dataset(s, seed);
    CsvWriter w(out_path);
    std::vector<std::string> header;
    for (Eigen::Index j = 0; j < ds.dim_x(); ++j) header.push_back("x" + std::to_string(j + 1));
    header.push_back("t");
    for (Eigen::Index j = 0; j < ds.dim_m(); ++j) header.push_back("m" + std::to_string(j + 1));
    header.push_back("y");
    w.row(header);
    for (Eigen::Index i = 0; i < ds.n(); ++i) {
        std::vector<std::string> row;
        for (Eigen::Index j = 0; j < ds.dim_x(); ++j) row.push_back(format_double(ds.x(i, j)));
        row.push_back(format_double(ds.t(i)));
        for (Eigen::Index j = 0; j < ds.dim_m(); ++j) row.push_back(format_double(ds.m(i, j)));
        row.push_back(format_double(ds.y(i)));
        w.row(row);
    }
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

struct EstimatorCi {
    std::string label;
    bool has = false;
    EffectEstimates lo, hi;
};

// Two estimators whose intervals sit on opposite sides of zero disagree
// about an effect's sign; surfaced as a diagnostic in the analyze report.
inline json detect_sign_disagreement(const std::vector<EstimatorCi>& cis) {
    json out = json::array();
    const auto fields = effect_fields();
    for (std::size_t f = 0; f < 5; ++f)
        for (std::size_t a = 0; a < cis.size(); ++a)
            for (std::size_t b = a + 1; b < cis.size(); ++b) {
                if (!cis[a].has || !cis[b].has) continue;
                const bool a_pos = cis[a].lo.*fields[f] > 0.0, a_neg = cis[a].hi.*fields[f] < 0.0;
                const bool b_pos = cis[b].lo.*fields[f] > 0.0, b_neg = cis[b].hi.*fields[f] < 0.0;
                if ((a_pos && b_neg) || (a_neg && b_pos))
                    out.push_back({{"effect", kEffectNames[f]}, {"estimators", {cis[a].label, cis[b].label}}});
            }
    return out;
}

// Loads the role columns, dropping (and counting) rows with missing or
// non-numeric values in any of them.
inline std::pair<Dataset, int> load_analysis_dataset(const AnalyzeConfig& cfg) {
    const CsvTable table = read_csv(cfg.csv_path);
    std::vector<std::size_t> cov_idx, med_idx;
    for (const auto& c : cfg.covariates) cov_idx.push_back(table.column_index(c));
    for (const auto& c : cfg.mediators) med_idx.push_back(table.column_index(c));
    const std::size_t t_idx = table.column_index(cfg.treatment);
    const std::size_t y_idx = table.column_index(cfg.outcome);

    std::vector<std::vector<double>> kept;
    int dropped = 0;
    for (const auto& row : table.rows) {
        std::vector<double> values;
        values.reserve(cov_idx.size() + med_idx.size() + 2);
        bool ok = true;
        auto grab = [&](std::size_t idx) {
            if (idx >= row.size()) { ok = false; return; }
            const auto v = parse_double(row[idx]);
            if (!v) { ok = false; return; }
            values.push_back(*v);
        };
        for (std::size_t c : cov_idx) grab(c);
        grab(t_idx);
        for (std::size_t c : med_idx) grab(c);
        grab(y_idx);
        if (ok)
            kept.push_back(std::move(values));
        else
            ++dropped;
    }
    if (kept.empty()) fail(ErrorCode::EmptyAfterFiltering, "no usable rows after dropping incomplete ones");

    Dataset ds;
    const auto n = static_cast<Eigen::Index>(kept.size());
    const auto nk = static_cast<Eigen::Index>(cov_idx.size());
    const auto nl = static_cast<Eigen::Index>(med_idx.size());
    ds.x.resize(n, nk);
    ds.t.resize(n);
    ds.m.resize(n, nl);
    ds.y.resize(n);
    ds.mediator_kind = cfg.mediator_kind;
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& v = kept[static_cast<std::size_t>(i)];
        Eigen::Index pos = 0;
        for (Eigen::Index j = 0; j < nk; ++j) ds.x(i, j) = v[static_cast<std::size_t>(pos++)];
        ds.t(i) = v[static_cast<std::size_t>(pos++)];
        for (Eigen::Index j = 0; j < nl; ++j) ds.m(i, j) = v[static_cast<std::size_t>(pos++)];
        ds.y(i) = v[static_cast<std::size_t>(pos++)];
    }
    return {std::move(ds), dropped};
}

inline json cmd_analyze(const AnalyzeConfig& cfg) {
    cfg.validate();
    auto [ds, dropped] = load_analysis_dataset(cfg);
    validate_dataset(ds);

    json report;
    report["config"] = {
        {"csv", cfg.csv_path},
        {"treatment", cfg.treatment},
        {"outcome", cfg.outcome},
        {"mediators", cfg.mediators},
        {"covariates", cfg.covariates},
        {"mediator_kind", mediator_kind_name(cfg.mediator_kind)},
        {"bootstrap_b", cfg.bootstrap_b},
        {"seed", cfg.seed},
    };
    report["n_rows_used"] = static_cast<int>(ds.n());
    report["n_rows_dropped"] = dropped;
    if (dropped > 0)
        report["warnings"] = json::array({"RowsDropped: " + std::to_string(dropped) +
                                          " rows had missing or non-numeric role values"});

    {
        NuisanceSpec diag_spec;
        diag_spec.seed = derive_seed(cfg.seed, 0xd1a9ULL);
        const OverlapDiagnostic d = overlap_diagnostic(ds, diag_spec);
        json arms = json::array();
        for (int arm = 0; arm < 2; ++arm) {
            const auto a = static_cast<std::size_t>(arm);
            arms.push_back({{"arm", arm},
                            {"count", d.arm_count[a]},
                            {"min_rho", d.min_p[a]},
                            {"max_rho", d.max_p[a]},
                            {"outermost_low_bin", d.hist[a].front()},
                            {"outermost_high_bin", d.hist[a].back()},
                            {"histogram", d.hist[a]}});
        }
        report["overlap"] = arms;
    }

    std::vector<EstimatorCi> cis;
    json estimators = json::array();
    for (std::size_t e = 0; e < cfg.estimators.size(); ++e) {
        const EstimatorConfig& ec = cfg.estimators[e];
        NuisanceSpec spec = ec.spec;
        spec.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(e), 0x5eedULL);
        json entry;
        entry["name"] = ec.label();
        entry["estimator"] = estimator_name(ec.id);
        entry["family"] = model_family_name(spec.family);
        entry["seed"] = spec.seed;
        EstimatorCi ci;
        ci.label = ec.label();
        try {
            if (cfg.bootstrap_b >= 2) {
                const BootstrapResult boot =
                    bootstrap_ci(ec.id, ds, spec, cfg.bootstrap_b,
                                 derive_seed(cfg.seed, static_cast<std::uint64_t>(e), 0xb007ULL));
                entry["effects"] = detail::effects_to_json(boot.point);
                entry["ci_low"] = detail::effects_to_json(boot.ci_low);
                entry["ci_high"] = detail::effects_to_json(boot.ci_high);
                entry["n_boot_failed"] = boot.n_failed;
                entry["bootstrap_b"] = boot.b;
                ci.has = true;
                ci.lo = boot.ci_low;
                ci.hi = boot.ci_high;
            } else {
                entry["effects"] = detail::effects_to_json(estimate(ec.id, ds, spec).effects);
            }
        } catch (const Error& err) {
            entry["error"] = error_code_name(err.code());
            entry["error_detail"] = err.what();
        }
        estimators.push_back(entry);
        cis.push_back(std::move(ci));
    }
    report["estimators"] = estimators;
    report["estimator_disagreement"] = detect_sign_disagreement(cis);

    if (!cfg.out_path.empty()) {
        std::ofstream out(cfg.out_path);
        if (!out) fail(ErrorCode::IoError, "cannot write '" + cfg.out_path + "'");
        out << report.dump(2) << "\n";
    }
    return report;
}

} // namespace medestim::cli
