// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one PASS/FAIL line per criterion. Exits with the number of
// failed criteria. Usage: acceptance <path-to-medestim-cli>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "medestim/cli.hpp"
#include "medestim/medestim.hpp"
#include "toy_instance.hpp"

using namespace medestim;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& what, double seconds) {
    std::printf("criterion %d [%s] %s (%.1fs)\n", criterion, pass ? "PASS" : "FAIL", what.c_str(),
                seconds);
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

// Reference true-effect values per setting (two-decimal targets the oracle
// must reproduce): total, direct_1, direct_0, indirect_1, indirect_0.
struct ReferenceRow {
    int id;
    double total, d1, d0, i1, i0;
};
const std::array<ReferenceRow, 36> kReference = {{
    {1, 1.23, 1.20, 1.20, 0.03, 0.03},  {2, 1.23, 1.20, 1.20, 0.03, 0.03},
    {3, 1.54, 1.51, 1.45, 0.09, 0.03},  {4, 1.53, 1.51, 1.45, 0.08, 0.03},
    {5, 1.33, 1.20, 1.20, 0.13, 0.13},  {6, 1.32, 1.20, 1.20, 0.12, 0.12},
    {7, 1.58, 1.45, 1.20, 0.38, 0.13},  {8, 1.60, 1.46, 1.20, 0.40, 0.13},
    {9, 1.22, 1.20, 1.20, 0.02, 0.02},  {10, 1.22, 1.20, 1.20, 0.02, 0.02},
    {11, 1.31, 1.29, 1.19, 0.11, 0.02}, {12, 1.32, 1.30, 1.20, 0.11, 0.02},
    {13, 3.05, 1.20, 1.20, 1.85, 1.85}, {14, 3.00, 1.20, 1.20, 1.80, 1.80},
    {15, 3.52, 1.64, 1.45, 2.07, 1.88}, {16, 3.43, 1.63, 1.45, 1.98, 1.80},
    {17, 3.27, 1.20, 1.20, 2.07, 2.07}, {18, 2.95, 1.20, 1.20, 1.75, 1.75},
    {19, 3.24, 1.57, 1.17, 2.01, 1.67}, {20, 3.75, 1.61, 1.21, 2.57, 2.14},
    {21, 1.90, 1.20, 1.20, 0.70, 0.70}, {22, 1.97, 1.20, 1.20, 0.77, 0.77},
    {23, 2.03, 1.34, 1.19, 0.82, 0.69}, {24, 2.13, 1.35, 1.20, 0.94, 0.78},
    {25, 1.67, 1.20, 1.20, 0.47, 0.47}, {26, 1.68, 1.20, 1.20, 0.48, 0.48},
    {27, 2.17, 1.69, 1.45, 0.72, 0.48}, {28, 2.16, 1.69, 1.45, 0.71, 0.47},
    {29, 2.26, 1.20, 1.20, 1.06, 1.06}, {30, 2.18, 1.20, 1.20, 0.98, 0.98},
    {31, 3.20, 2.20, 1.20, 2.01, 1.00}, {32, 3.20, 2.20, 1.20, 2.00, 1.00},
    {33, 1.69, 1.20, 1.20, 0.49, 0.49}, {34, 1.71, 1.20, 1.20, 0.51, 0.51},
    {35, 2.22, 1.71, 1.21, 1.02, 0.51}, {36, 2.20, 1.70, 1.20, 1.00, 0.50},
}};

void criterion_1_oracle_reproduction() {
    Timer timer;
    std::ostringstream misses;
    int n_bad = 0;
    for (const ReferenceRow& row : kReference) {
        const TrueEffects te =
            true_effects(make_setting(row.id, 500), 100000, derive_seed(0xacceU, row.id));
        const std::array<std::pair<const char*, std::pair<double, double>>, 5> cols = {{
            {"total", {te.total, row.total}},
            {"direct_1", {te.direct_1, row.d1}},
            {"direct_0", {te.direct_0, row.d0}},
            {"indirect_1", {te.indirect_1, row.i1}},
            {"indirect_0", {te.indirect_0, row.i0}},
        }};
        for (const auto& [name, pair] : cols) {
            if (std::abs(pair.first - pair.second) > 0.03) {
                ++n_bad;
                misses << " s" << row.id << "." << name << "=" << pair.first << " vs " << pair.second;
            }
        }
    }
    std::ostringstream what;
    what << "oracle reproduction: 36 settings vs reference table at +-0.03; " << (180 - n_bad) << "/180"
         << " cells match";
    if (n_bad > 0) what << "; misses:" << misses.str();
    report(1, n_bad == 0, what.str(), timer.seconds());
}

struct MeanErrors {
    // |mean relative error| per estimator and effect, over repetitions
    std::map<EstimatorId, EffectEstimates> mean_rel;
    std::map<EstimatorId, int> failures;
};

MeanErrors mean_relative_errors(int setting_id, int n, int reps, const std::vector<EstimatorId>& ids) {
    const SimSetting setting = make_setting(setting_id, n);
    const TrueEffects te = true_effects(setting, 100000, derive_seed(0xacce2U, setting_id));
    const std::array<double, 5> truth = {te.total, te.direct_1, te.direct_0, te.indirect_1,
                                         te.indirect_0};
    const auto fields = effect_fields();

    struct Slot {
        EffectEstimates sum;
        int ok = 0;
        int failed = 0;
    };
    std::vector<std::vector<Slot>> slots(static_cast<std::size_t>(reps),
                                         std::vector<Slot>(ids.size()));
    cli::detail::run_parallel(static_cast<std::size_t>(reps), cli::effective_parallelism(0),
                              [&](std::size_t rep) {
        const Dataset ds = generate_dataset(setting, derive_seed(0xd47aU, setting_id, rep));
        for (std::size_t e = 0; e < ids.size(); ++e) {
            NuisanceSpec spec;
            spec.seed = derive_seed(0x5eedU, setting_id, rep, e);
            try {
                const EffectEstimates est = estimate(ids[e], ds, spec).effects;
                slots[rep][e].sum = est;
                slots[rep][e].ok = 1;
            } catch (const Error&) {
                slots[rep][e].failed = 1;
            }
        }
    });

    MeanErrors out;
    for (std::size_t e = 0; e < ids.size(); ++e) {
        EffectEstimates acc;
        int ok = 0, failed = 0;
        for (int rep = 0; rep < reps; ++rep) {
            const Slot& s = slots[static_cast<std::size_t>(rep)][e];
            if (s.ok) {
                for (std::size_t f = 0; f < 5; ++f) acc.*fields[f] += s.sum.*fields[f];
                ++ok;
            }
            failed += s.failed;
        }
        EffectEstimates rel;
        for (std::size_t f = 0; f < 5; ++f)
            rel.*fields[f] = ok > 0 ? (acc.*fields[f] / ok - truth[f]) / truth[f] : 0.0;
        out.mean_rel[ids[e]] = rel;
        out.failures[ids[e]] = failed;
    }
    return out;
}

void criterion_2_well_specified_consistency() {
    Timer timer;
    bool pass = true;
    std::ostringstream what;
    what << "well-specified consistency at n=10000, 50 reps, |mean rel err| <= 0.05:";
    const struct {
        int setting;
        std::vector<EstimatorId> ids;
    } runs[] = {
        {13,
         {EstimatorId::CoefficientProduct, EstimatorId::GComputation, EstimatorId::Ipw,
          EstimatorId::MultiplyRobust, EstimatorId::Dml}},
        {17,
         {EstimatorId::CoefficientProduct, EstimatorId::GComputation, EstimatorId::Ipw,
          EstimatorId::Dml}},
    };
    for (const auto& run : runs) {
        const MeanErrors errs = mean_relative_errors(run.setting, 10000, 50, run.ids);
        for (EstimatorId id : run.ids) {
            const EffectEstimates& rel = errs.mean_rel.at(id);
            const double worst = std::max({std::abs(rel.total), std::abs(rel.direct_0),
                                           std::abs(rel.indirect_1)});
            what << " s" << run.setting << "/" << estimator_name(id) << "=" << worst;
            if (worst > 0.05) {
                pass = false;
                what << "(!)";
            }
        }
    }
    report(2, pass, what.str(), timer.seconds());
}

double g_dml_err_setting15 = 0.0; // shared with criterion 4

void criterion_3_misspecification_signatures() {
    Timer timer;
    const MeanErrors mis_y = mean_relative_errors(
        15, 10000, 50, {EstimatorId::CoefficientProduct, EstimatorId::MultiplyRobust, EstimatorId::Dml});
    const double cp = std::abs(mis_y.mean_rel.at(EstimatorId::CoefficientProduct).indirect_1);
    const double mr = std::abs(mis_y.mean_rel.at(EstimatorId::MultiplyRobust).indirect_1);
    const double dml15 = std::abs(mis_y.mean_rel.at(EstimatorId::Dml).indirect_1);
    g_dml_err_setting15 = dml15;
    // Ordinal gate (the spec marks the figure-read magnitudes as ordinal):
    // the coefficient product must be clearly biased while the robust
    // estimators stay within 0.05.
    const bool part_a = cp >= 2.0 * std::max(mr, dml15) && mr <= 0.05 && dml15 <= 0.05;

    const MeanErrors mis_m =
        mean_relative_errors(14, 10000, 50, {EstimatorId::Ipw, EstimatorId::Dml});
    const double ipw14 = std::abs(mis_m.mean_rel.at(EstimatorId::Ipw).indirect_1);
    const double dml14 = std::abs(mis_m.mean_rel.at(EstimatorId::Dml).indirect_1);
    const bool part_b = ipw14 >= 2.0 * dml14;

    std::ostringstream what;
    what << "misspecification signatures: (a) s15 delta1 |rel err| cp=" << cp << " mr=" << mr
         << " dml=" << dml15 << (part_a ? "" : "(!)") << " [literal cp>0.10: " << (cp > 0.10 ? "yes" : "no")
         << "]; (b) s14 ipw=" << ipw14 << " dml=" << dml14 << " ratio=" << (dml14 > 0 ? ipw14 / dml14 : 999)
         << (part_b ? "" : "(!)");
    report(3, part_a && part_b, what.str(), timer.seconds());
}

void criterion_4_overlap_failure_detection() {
    Timer timer;
    const MeanErrors s31 = mean_relative_errors(31, 10000, 50, {EstimatorId::Dml});
    const double dml31 = std::abs(s31.mean_rel.at(EstimatorId::Dml).indirect_1);
    const MeanErrors s27 = mean_relative_errors(27, 10000, 50, {EstimatorId::Dml});
    const double dml27 = std::abs(s27.mean_rel.at(EstimatorId::Dml).indirect_1);
    const int failures = s31.failures.at(EstimatorId::Dml) + s27.failures.at(EstimatorId::Dml);

    const bool degraded = std::max(dml31, dml27) > g_dml_err_setting15;
    const bool pass = degraded || failures > 0;
    std::ostringstream what;
    what << "overlap failure: dml delta1 |rel err| s31=" << dml31 << " s27=" << dml27
         << " vs s15=" << g_dml_err_setting15 << "; DegenerateWeights/EmptyArm failures=" << failures;
    report(4, pass, what.str(), timer.seconds());
}

void criterion_5_exact_algebraic_properties() {
    Timer timer;
    bool pass = true;
    std::ostringstream what;
    what << "exact algebraic properties:";

    // (a) IPW total is invariant to the extended propensity model
    {
        const Dataset ds = generate_dataset(make_setting(13, 2000), 21);
        Rng rng(22);
        Eigen::VectorXd p(ds.n()), rho_a(ds.n()), rho_b(ds.n());
        for (Eigen::Index i = 0; i < ds.n(); ++i) {
            p(i) = 0.2 + 0.6 * rng.uniform();
            rho_a(i) = 0.1 + 0.8 * rng.uniform();
            rho_b(i) = 0.1 + 0.8 * rng.uniform();
        }
        const bool ok = std::abs(ipw_from(ds, p, rho_a).total - ipw_from(ds, p, rho_b).total) <= 1e-9;
        what << " ipw-rho-invariance=" << (ok ? "ok" : "FAIL");
        pass = pass && ok;
    }
    // (b) coefficient product symmetry, exact
    {
        NuisanceSpec spec;
        const EffectEstimates e = coefficient_product(generate_dataset(make_setting(16, 1200), 23), spec);
        const bool ok = e.direct_0 == e.direct_1 && e.indirect_0 == e.indirect_1;
        what << " cp-symmetry=" << (ok ? "ok" : "FAIL");
        pass = pass && ok;
    }
    // (c) decomposition identity, every estimator
    {
        bool ok = true;
        NuisanceSpec spec;
        const Dataset bin = generate_dataset(make_setting(13, 2500), 24);
        for (EstimatorId id : {EstimatorId::CoefficientProduct, EstimatorId::GComputation,
                               EstimatorId::Ipw, EstimatorId::MultiplyRobust, EstimatorId::Dml}) {
            const EffectEstimates e = estimate(id, bin, spec).effects;
            ok = ok && std::abs(e.total - (e.direct_0 + e.indirect_1)) <= 1e-9;
        }
        const Dataset cont = generate_dataset(make_setting(17, 2500), 25);
        for (EstimatorId id : {EstimatorId::CoefficientProduct, EstimatorId::GComputation,
                               EstimatorId::Ipw, EstimatorId::Dml}) {
            const EffectEstimates e = estimate(id, cont, spec).effects;
            ok = ok && std::abs(e.total - (e.direct_0 + e.indirect_1)) <= 1e-9;
        }
        what << " decomposition=" << (ok ? "ok" : "FAIL");
        pass = pass && ok;
    }
    // (d) constant outcome: zero effects for IPW and DML
    {
        Dataset ds = generate_dataset(make_setting(13, 800), 26);
        ds.y.setConstant(4.0);
        NuisanceSpec spec;
        const EffectEstimates w = ipw(ds, spec);
        const EffectEstimates d = dml(ds, spec);
        const auto fields = effect_fields();
        bool ok = true;
        for (std::size_t f = 0; f < 5; ++f)
            ok = ok && std::abs(w.*fields[f]) <= 1e-9 && std::abs(d.*fields[f]) <= 1e-9;
        what << " constant-y=" << (ok ? "ok" : "FAIL");
        pass = pass && ok;
    }
    // (e) outcome location-shift invariance, every estimator
    {
        const Dataset ds = generate_dataset(make_setting(13, 1200), 27);
        Dataset shifted = ds;
        shifted.y.array() += 11.25;
        NuisanceSpec spec;
        const auto fields = effect_fields();
        bool ok = true;
        for (EstimatorId id : {EstimatorId::CoefficientProduct, EstimatorId::GComputation,
                               EstimatorId::Ipw, EstimatorId::MultiplyRobust, EstimatorId::Dml}) {
            const EffectEstimates a = estimate(id, ds, spec).effects;
            const EffectEstimates b = estimate(id, shifted, spec).effects;
            for (std::size_t f = 0; f < 5; ++f) ok = ok && std::abs(a.*fields[f] - b.*fields[f]) <= 1e-9;
        }
        what << " y-shift=" << (ok ? "ok" : "FAIL");
        pass = pass && ok;
    }
    report(5, pass, what.str(), timer.seconds());
}

void criterion_6_brute_force_equivalence() {
    Timer timer;
    const toy::Instance inst = toy::build();
    const auto fields = effect_fields();

    const EffectEstimates g = g_computation_from(inst.ds, inst.explicit_nuisances());
    const EffectEstimates mr = influence_estimate_from(inst.ds, inst.influence_nuisances(false));
    const EffectEstimates dm = influence_estimate_from(inst.ds, inst.influence_nuisances(true));

    double worst = 0.0;
    for (const EffectEstimates* e : {&g, &mr, &dm})
        for (std::size_t f = 0; f < 5; ++f)
            worst = std::max(worst, std::abs(e->*fields[f] - inst.brute_force.*fields[f]));
    std::ostringstream what;
    what << "brute-force oracle equivalence on the discrete toy: worst |diff|=" << worst
         << " (tolerance 1e-6)";
    report(6, worst <= 1e-6, what.str(), timer.seconds());
}

void criterion_7_bootstrap_behavior() {
    Timer timer;
    const int reps = 200, b = 100, n = 1000;
    const SimSetting setting = make_setting(13, n);
    const TrueEffects te = true_effects(setting, 100000, derive_seed(0xacce7U, 13));

    struct Row {
        bool cp_ok = false, ipw_ok = false;
        bool cp_covered = false;
        double cp_width = 0.0, ipw_width = 0.0;
    };
    std::vector<Row> rows(reps);
    cli::detail::run_parallel(static_cast<std::size_t>(reps), cli::effective_parallelism(0),
                              [&](std::size_t rep) {
        const Dataset ds = generate_dataset(setting, derive_seed(0xd47bU, rep));
        NuisanceSpec spec;
        spec.seed = derive_seed(0x5eed7U, rep);
        try {
            const BootstrapResult r =
                bootstrap_ci(EstimatorId::CoefficientProduct, ds, spec, b, derive_seed(0xb0071U, rep));
            rows[rep].cp_ok = true;
            rows[rep].cp_covered =
                !(te.indirect_1 < r.ci_low.indirect_1 || te.indirect_1 > r.ci_high.indirect_1);
            rows[rep].cp_width = r.ci_high.indirect_1 - r.ci_low.indirect_1;
        } catch (const Error&) {
        }
        try {
            const BootstrapResult r =
                bootstrap_ci(EstimatorId::Ipw, ds, spec, b, derive_seed(0xb0072U, rep));
            rows[rep].ipw_ok = true;
            rows[rep].ipw_width = r.ci_high.indirect_1 - r.ci_low.indirect_1;
        } catch (const Error&) {
        }
    });

    int covered = 0, cp_n = 0, ipw_n = 0;
    double cp_width = 0.0, ipw_width = 0.0;
    for (const Row& row : rows) {
        if (row.cp_ok) {
            ++cp_n;
            covered += row.cp_covered ? 1 : 0;
            cp_width += row.cp_width;
        }
        if (row.ipw_ok) {
            ++ipw_n;
            ipw_width += row.ipw_width;
        }
    }
    const double coverage = cp_n > 0 ? static_cast<double>(covered) / cp_n : 0.0;
    cp_width = cp_n > 0 ? cp_width / cp_n : 0.0;
    ipw_width = ipw_n > 0 ? ipw_width / ipw_n : 0.0;

    const bool pass = coverage >= 0.88 && coverage <= 0.99 && ipw_width > cp_width;
    std::ostringstream what;
    what << "bootstrap: coefprod delta1 coverage=" << coverage << " (target [0.88, 0.99]) over " << cp_n
         << " reps; mean CI width ipw=" << ipw_width << " > coefprod=" << cp_width
         << (ipw_width > cp_width ? "" : "(!)");
    report(7, pass, what.str(), timer.seconds());
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void criterion_8_determinism(const std::string& cli_path) {
    Timer timer;
    const fs::path base = fs::temp_directory_path() / "medestim_acceptance";
    fs::remove_all(base);
    fs::create_directories(base);
    const std::string out1 = (base / "run1").string();
    const std::string out2 = (base / "run2").string();

    const std::string common = std::string(" benchmark --settings 1 --sizes 500") +
                               " --estimators coefficient_product ipw --repetitions 4 --bootstrap 10" +
                               " --truth-mc 20000 --seed 123 --out ";
    const int rc1 = std::system((cli_path + common + out1 + " --parallelism 1").c_str());
    const int rc2 = std::system((cli_path + common + out2 + " --parallelism 2").c_str());

    bool pass = rc1 == 0 && rc2 == 0;
    std::string detail;
    if (pass) {
        const std::string r1 = slurp(out1 + "/results.csv");
        const std::string r2 = slurp(out2 + "/results.csv");
        const std::string s1 = slurp(out1 + "/summary.csv");
        const std::string s2 = slurp(out2 + "/summary.csv");
        pass = !r1.empty() && r1 == r2 && s1 == s2;
        detail = pass ? "results.csv and summary.csv byte-identical across thread counts"
                      : "outputs differ across thread counts";
    } else {
        detail = "cli invocation failed";
    }
    report(8, pass, "determinism: " + detail, timer.seconds());
    fs::remove_all(base);
}

} // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: acceptance <path-to-medestim-cli>\n");
        return 64;
    }
    criterion_1_oracle_reproduction();
    criterion_2_well_specified_consistency();
    criterion_3_misspecification_signatures();
    criterion_4_overlap_failure_detection();
    criterion_5_exact_algebraic_properties();
    criterion_6_brute_force_equivalence();
    criterion_7_bootstrap_behavior();
    criterion_8_determinism(argv[1]);
    std::printf("%s: %d of 8 criteria failed\n", g_failures == 0 ? "OK" : "ATTENTION", g_failures);
    return g_failures;
}
