// Command-line front end: simulate datasets, compute true effects, run the
// benchmark grid, and analyze user CSVs.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "medestim/cli.hpp"
#include "medestim/medestim.hpp"

namespace {

using medestim::Error;
using medestim::ErrorCode;
using nlohmann::json;

int exit_code_for(ErrorCode c) {
    switch (c) {
        case ErrorCode::ConfigError:
        case ErrorCode::UnknownSetting:
        case ErrorCode::UnsupportedFamily:
        case ErrorCode::UnsupportedMediator:
            return 1;
        default:
            return 2;
    }
}

medestim::cli::EstimatorConfig parse_estimator_token(const std::string& token,
                                                     const medestim::NuisanceSpec& base) {
    // "dml" or "dml:ridge_cv" or "dml:forest:cf2"
    medestim::cli::EstimatorConfig ec;
    ec.spec = base;
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (pos <= token.size()) {
        const std::size_t next = token.find(':', pos);
        parts.push_back(token.substr(pos, next == std::string::npos ? std::string::npos : next - pos));
        if (next == std::string::npos) break;
        pos = next + 1;
    }
    ec.id = medestim::cli::detail::estimator_from_name(parts[0]);
    for (std::size_t i = 1; i < parts.size(); ++i) {
        const std::string& p = parts[i];
        if (p.rfind("cf", 0) == 0) {
            try {
                ec.spec.crossfit_folds = p.size() > 2 ? std::stoi(p.substr(2)) : 2;
            } catch (const std::exception&) {
                medestim::fail(ErrorCode::ConfigError, "bad cross-fitting option '" + p + "'");
            }
        } else if (p == "calibrate") {
            ec.spec.calibrate = true;
        } else {
            ec.spec.family = medestim::cli::detail::family_from_name(p);
        }
    }
    return ec;
}

json load_json_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) medestim::fail(ErrorCode::ConfigError, "cannot open config '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        medestim::fail(ErrorCode::ConfigError, std::string("config parse failure: ") + e.what());
    }
    return j;
}

std::vector<medestim::cli::EstimatorConfig> estimators_from_json(const json& arr,
                                                                 const medestim::NuisanceSpec& base) {
    std::vector<medestim::cli::EstimatorConfig> out;
    for (const auto& item : arr) {
        medestim::cli::EstimatorConfig ec;
        ec.spec = base;
        if (item.is_string()) {
            ec = parse_estimator_token(item.get<std::string>(), base);
        } else {
            ec.id = medestim::cli::detail::estimator_from_name(item.at("estimator").get<std::string>());
            if (item.contains("family"))
                ec.spec.family = medestim::cli::detail::family_from_name(item["family"].get<std::string>());
            if (item.contains("crossfit_folds")) ec.spec.crossfit_folds = item["crossfit_folds"].get<int>();
            if (item.contains("calibrate")) ec.spec.calibrate = item["calibrate"].get<bool>();
            if (item.contains("clip_eps")) ec.spec.clip_eps = item["clip_eps"].get<double>();
        }
        out.push_back(ec);
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Causal mediation estimators, simulation benchmark, and CSV analysis"};
    app.require_subcommand(1);

    // --- simulate ----------------------------------------------------------
    auto* sim = app.add_subcommand("simulate", "Write one simulated dataset as CSV");
    int sim_setting = 1, sim_n = 500;
    std::uint64_t sim_seed = 0;
    std::string sim_out = "dataset.csv";
    sim->add_option("--setting", sim_setting, "Setting id (1-36)")->required();
    sim->add_option("--n", sim_n, "Rows to generate");
    sim->add_option("--seed", sim_seed, "Data seed");
    sim->add_option("--out", sim_out, "Output CSV path");

    // --- true-effects ------------------------------------------------------
    auto* te = app.add_subcommand("true-effects", "Monte-Carlo oracle effects per setting");
    std::vector<int> te_settings;
    int te_mc = 100000;
    std::uint64_t te_seed = 0;
    std::string te_out = "true_effects.csv";
    te->add_option("--settings", te_settings, "Setting ids (default: 1..36; pass none for header-only)");
    bool te_none = false;
    te->add_flag("--empty", te_none, "Emit a header-only CSV");
    te->add_option("--mc", te_mc, "Monte-Carlo samples (>= 10^4)");
    te->add_option("--seed", te_seed, "Oracle seed");
    te->add_option("--out", te_out, "Output CSV path");

    // --- benchmark ---------------------------------------------------------
    auto* bench = app.add_subcommand("benchmark", "Run the simulation benchmark grid");
    std::string bench_config;
    std::vector<int> bench_settings, bench_sizes;
    std::vector<std::string> bench_estimators;
    int bench_reps = -1, bench_b = -1, bench_par = -1, bench_mc = -1;
    std::uint64_t bench_seed = 0;
    bool bench_seed_given = false;
    std::string bench_out;
    bench->add_option("--config", bench_config, "JSON config file (flags override its keys)");
    bench->add_option("--settings", bench_settings, "Setting ids");
    bench->add_option("--sizes", bench_sizes, "Sample sizes");
    bench->add_option("--estimators", bench_estimators,
                      "Estimator tokens, e.g. dml or ipw:ridge_cv or dml:linear:cf2");
    bench->add_option("--repetitions", bench_reps, "Repetitions per cell");
    bench->add_option("--bootstrap", bench_b, "Bootstrap replicates (0 skips CIs)");
    bench->add_option("--seed", bench_seed, "Master seed (mandatory)")->each([&](const std::string&) {
        bench_seed_given = true;
    });
    bench->add_option("--parallelism", bench_par, "Worker threads (0 = cores)");
    bench->add_option("--truth-mc", bench_mc, "Oracle Monte-Carlo samples");
    bench->add_option("--out", bench_out, "Output directory");

    // --- analyze -----------------------------------------------------------
    auto* an = app.add_subcommand("analyze", "Estimate mediation effects on a CSV file");
    std::string an_config, an_csv, an_treatment, an_outcome, an_kind = "continuous", an_out;
    std::vector<std::string> an_mediators, an_covariates, an_estimators;
    int an_b = -1;
    std::uint64_t an_seed = 0;
    an->add_option("--config", an_config, "JSON config file (flags override its keys)");
    an->add_option("--csv", an_csv, "Input CSV path");
    an->add_option("--treatment", an_treatment, "Treatment column (binary)");
    an->add_option("--outcome", an_outcome, "Outcome column");
    an->add_option("--mediators", an_mediators, "Mediator column(s)");
    an->add_option("--covariates", an_covariates, "Covariate column(s)");
    an->add_option("--mediator-kind", an_kind, "binary | continuous");
    an->add_option("--estimators", an_estimators, "Estimator tokens");
    an->add_option("--bootstrap", an_b, "Bootstrap replicates (0 skips CIs)");
    bool an_seed_given = false;
    an->add_option("--seed", an_seed, "Seed")->each([&](const std::string&) { an_seed_given = true; });
    an->add_option("--out", an_out, "Report path (default: stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) {
            medestim::cli::cmd_simulate(sim_setting, sim_n, sim_seed, sim_out);
            return 0;
        }

        if (te->parsed()) {
            std::vector<int> ids = te_settings;
            if (ids.empty() && !te_none)
                for (int i = 1; i <= 36; ++i) ids.push_back(i);
            medestim::cli::cmd_true_effects(ids, te_mc, te_seed, te_out);
            return 0;
        }

        if (bench->parsed()) {
            medestim::cli::RunConfig cfg;
            medestim::NuisanceSpec base;
            bool seed_in_config = false;
            if (!bench_config.empty()) {
                const json j = load_json_config(bench_config);
                if (j.contains("settings")) cfg.settings = j["settings"].get<std::vector<int>>();
                if (j.contains("sample_sizes")) cfg.sample_sizes = j["sample_sizes"].get<std::vector<int>>();
                if (j.contains("estimators")) cfg.estimators = estimators_from_json(j["estimators"], base);
                if (j.contains("repetitions")) cfg.repetitions = j["repetitions"].get<int>();
                if (j.contains("bootstrap_b")) cfg.bootstrap_b = j["bootstrap_b"].get<int>();
                if (j.contains("master_seed")) {
                    cfg.master_seed = j["master_seed"].get<std::uint64_t>();
                    seed_in_config = true;
                }
                if (j.contains("parallelism")) cfg.parallelism = j["parallelism"].get<int>();
                if (j.contains("truth_mc_samples")) cfg.truth_mc_samples = j["truth_mc_samples"].get<int>();
                if (j.contains("output_dir")) cfg.output_dir = j["output_dir"].get<std::string>();
            }
            if (!bench_settings.empty()) cfg.settings = bench_settings;
            if (!bench_sizes.empty()) cfg.sample_sizes = bench_sizes;
            if (!bench_estimators.empty()) {
                cfg.estimators.clear();
                for (const auto& tok : bench_estimators)
                    cfg.estimators.push_back(parse_estimator_token(tok, base));
            }
            if (bench_reps >= 0) cfg.repetitions = bench_reps;
            if (bench_b >= 0) cfg.bootstrap_b = bench_b;
            if (bench_par >= 0) cfg.parallelism = bench_par;
            if (bench_mc >= 0) cfg.truth_mc_samples = bench_mc;
            if (!bench_out.empty()) cfg.output_dir = bench_out;
            if (bench_seed_given)
                cfg.master_seed = bench_seed;
            else if (!seed_in_config)
                medestim::fail(ErrorCode::ConfigError,
                               "benchmark requires an explicit master seed (--seed or master_seed)");
            medestim::cli::cmd_benchmark(cfg);
            return 0;
        }

        if (an->parsed()) {
            medestim::cli::AnalyzeConfig cfg;
            medestim::NuisanceSpec base;
            if (!an_config.empty()) {
                const json j = load_json_config(an_config);
                if (j.contains("csv")) cfg.csv_path = j["csv"].get<std::string>();
                if (j.contains("treatment")) cfg.treatment = j["treatment"].get<std::string>();
                if (j.contains("outcome")) cfg.outcome = j["outcome"].get<std::string>();
                if (j.contains("mediators")) cfg.mediators = j["mediators"].get<std::vector<std::string>>();
                if (j.contains("covariates"))
                    cfg.covariates = j["covariates"].get<std::vector<std::string>>();
                if (j.contains("mediator_kind")) an_kind = j["mediator_kind"].get<std::string>();
                if (j.contains("estimators")) cfg.estimators = estimators_from_json(j["estimators"], base);
                if (j.contains("bootstrap_b")) cfg.bootstrap_b = j["bootstrap_b"].get<int>();
                if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
                if (j.contains("out")) cfg.out_path = j["out"].get<std::string>();
            }
            if (!an_csv.empty()) cfg.csv_path = an_csv;
            if (!an_treatment.empty()) cfg.treatment = an_treatment;
            if (!an_outcome.empty()) cfg.outcome = an_outcome;
            if (!an_mediators.empty()) cfg.mediators = an_mediators;
            if (!an_covariates.empty()) cfg.covariates = an_covariates;
            if (!an_estimators.empty()) {
                cfg.estimators.clear();
                for (const auto& tok : an_estimators)
                    cfg.estimators.push_back(parse_estimator_token(tok, base));
            }
            if (an_b >= 0) cfg.bootstrap_b = an_b;
            if (an_seed_given) cfg.seed = an_seed;
            if (!an_out.empty()) cfg.out_path = an_out;

            if (an_kind == "binary")
                cfg.mediator_kind = medestim::MediatorKind::Binary1D;
            else if (an_kind == "continuous")
                cfg.mediator_kind = cfg.mediators.size() > 1 ? medestim::MediatorKind::ContinuousMultiD
                                                             : medestim::MediatorKind::Continuous1D;
            else
                medestim::fail(ErrorCode::ConfigError, "mediator-kind must be binary or continuous");
            if (cfg.estimators.empty())
                cfg.estimators.push_back(parse_estimator_token("coefficient_product", base));

            const json report = medestim::cli::cmd_analyze(cfg);
            if (cfg.out_path.empty()) std::cout << report.dump(2) << std::endl;
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
