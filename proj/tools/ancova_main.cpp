// ancova_main.cpp — command-line surface.
//
// Subcommands:
//   analyze    — ANCOVA analysis of a trial CSV with selectable variance
//                estimators
//   limits     — population limits and bias diagnosis for a DGP spec
//   simulate   — Monte Carlo run(s) from a plan file (object or array)
//   reproduce  — canned scenario suite with pass/fail verdicts
//
// Exit codes: 0 success, 1 reproduce verdict failure, 2 input error,
// 3 numerical error.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "ancova/asymptotics.hpp"
#include "ancova/errors.hpp"
#include "ancova/estimators.hpp"
#include "ancova/kernels.hpp"
#include "ancova/reproduce.hpp"
#include "ancova/simulation.hpp"
#include "ancova/trial_data.hpp"

namespace {

using namespace ancova;

std::vector<VarianceKind> parse_estimators(const std::string& csv) {
    std::vector<VarianceKind> kinds;
    std::stringstream ss(csv);
    std::string token;
    while (std::getline(ss, token, ',')) {
        if (!token.empty()) kinds.push_back(variance_kind_from_string(token));
    }
    if (kinds.empty()) throw ValidationError("empty estimator selection");
    return kinds;
}

std::string format_double(double v, int precision = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    return buf;
}

void write_or_print(const std::optional<std::string>& output_dir, const std::string& filename,
                    const std::string& text) {
    if (output_dir.has_value()) {
        std::filesystem::create_directories(*output_dir);
        const auto path = std::filesystem::path(*output_dir) / filename;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw ValidationError("cannot write " + path.string());
        out << text;
        std::cout << "wrote " << path.string() << "\n";
    } else {
        std::cout << text;
    }
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

int cmd_analyze(const std::string& input, const std::string& estimators_csv, double level,
                const std::string& format, const std::optional<std::string>& output_dir,
                bool use_t) {
    const TrialDataset data = load_csv(input);
    const std::vector<VarianceKind> kinds = parse_estimators(estimators_csv);

    const double unadjusted = unadjusted_estimate(data);
    const AncovaFit fit = ancova_fit(data);

    bool model_based_selected = false;
    for (const auto kind : kinds) {
        model_based_selected = model_based_selected ||
                               kind == VarianceKind::model_based_paper ||
                               kind == VarianceKind::model_based_classical ||
                               kind == VarianceKind::pooled_t;
    }
    const bool unequal = std::fabs(fit.pi_hat - 0.5) > 0.05;
    if (unequal && model_based_selected) {
        std::cerr << "warning: observed randomisation fraction pi_hat = "
                  << format_double(fit.pi_hat)
                  << " is far from 1/2; the model-based standard error is generally "
                     "inconsistent under unequal randomisation — prefer the sandwich "
                     "estimator\n";
    }

    struct Row {
        VarianceKind kind;
        WaldResult wald;
    };
    std::vector<Row> rows;
    for (const auto kind : kinds) {
        VarianceEstimate variance;
        double estimate = fit.betaA;
        switch (kind) {
            case VarianceKind::model_based_paper:
                variance = model_based_variance(data, fit);
                break;
            case VarianceKind::model_based_classical:
                variance = model_based_classical(data, fit);
                break;
            case VarianceKind::sandwich_if:
                variance = sandwich_variance(data, fit, SandwichCorrection::none);
                break;
            case VarianceKind::sandwich_if_df:
                variance = sandwich_variance(data, fit, SandwichCorrection::df);
                break;
            case VarianceKind::welch:
                variance = welch_variance(data);
                estimate = unadjusted;
                break;
            case VarianceKind::pooled_t:
                variance = pooled_t_variance(data);
                estimate = unadjusted;
                break;
        }
        if (use_t) variance = with_t_reference(variance, fit.n, fit.k);
        rows.push_back({kind, wald_test(estimate, variance, 0.0, level)});
    }

    if (format == "json") {
        nlohmann::json j;
        j["n"] = data.n();
        j["k"] = data.k();
        j["pi_hat"] = fit.pi_hat;
        j["delta_unadjusted"] = unadjusted;
        j["delta_ancova"] = fit.betaA;
        j["beta0"] = fit.beta0;
        j["betaW"] = fit.betaW;
        nlohmann::json table = nlohmann::json::object();
        for (const auto& row : rows) {
            table[std::string(to_string(row.kind))] = {
                {"estimate", row.wald.estimate},   {"std_error", row.wald.std_error},
                {"statistic", row.wald.statistic}, {"p_value", row.wald.p_value},
                {"ci_lower", row.wald.ci_lower},   {"ci_upper", row.wald.ci_upper},
                {"level", row.wald.level},
            };
        }
        j["estimators"] = table;
        write_or_print(output_dir, "analysis.json", j.dump(2) + "\n");
        return 0;
    }

    if (format == "csv") {
        std::string csv = "estimator,estimate,std_error,statistic,p_value,ci_lower,ci_upper\n";
        for (const auto& row : rows) {
            csv += std::string(to_string(row.kind)) + ',' + format_double(row.wald.estimate, 12) +
                   ',' + format_double(row.wald.std_error, 12) + ',' +
                   format_double(row.wald.statistic, 12) + ',' +
                   format_double(row.wald.p_value, 12) + ',' +
                   format_double(row.wald.ci_lower, 12) + ',' +
                   format_double(row.wald.ci_upper, 12) + '\n';
        }
        write_or_print(output_dir, "analysis.csv", csv);
        return 0;
    }

    std::ostringstream out;
    out << "n = " << data.n() << ", k = " << data.k()
        << ", pi_hat = " << format_double(fit.pi_hat) << "\n";
    out << "delta_unadjusted = " << format_double(unadjusted, 10) << "\n";
    out << "delta_ancova     = " << format_double(fit.betaA, 10) << "\n\n";
    out << "estimator               SE          " << format_double(100 * level, 4)
        << "% CI                    p-value\n";
    for (const auto& row : rows) {
        char line[160];
        std::snprintf(line, sizeof line, "%-22s %-11.5g [%.5g, %.5g]  %11.5g\n",
                      std::string(to_string(row.kind)).c_str(), row.wald.std_error,
                      row.wald.ci_lower, row.wald.ci_upper, row.wald.p_value);
        out << line;
    }
    write_or_print(output_dir, "analysis.txt", out.str());
    return 0;
}

// ---------------------------------------------------------------------------
// limits
// ---------------------------------------------------------------------------

int cmd_limits(const std::string& input, double level, std::uint64_t draws, std::uint64_t seed,
               const std::string& format, const std::optional<std::string>& output_dir) {
    // Accepts a bare DGP spec or a scenario file wrapping one under "dgp".
    std::ifstream in(input);
    if (!in) throw ValidationError("cannot open spec file " + input);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("invalid JSON in " + input + ": " + std::string(e.what()));
    }
    const DgpSpec dgp =
        doc.is_object() && doc.contains("dgp") ? dgp_from_json(doc.at("dgp")) : dgp_from_json(doc);
    LimitOptions options;
    options.brute_draws = draws;
    options.seed = seed;
    options.level = level;
    const AsymptoticLimits limits = compute_limits(dgp, options);
    const BiasDiagnosis diagnosis = bias_diagnosis(limits, level);

    if (format == "json") {
        nlohmann::json j;
        j["path"] = std::string(to_string(limits.path));
        j["beta_under"] = {{"beta0", limits.beta_under.beta0},
                           {"betaA", limits.beta_under.betaA},
                           {"betaW", limits.beta_under.betaW}};
        j["delta"] = dgp.delta();
        j["v1"] = limits.v1;
        j["v0"] = limits.v0;
        j["thm1_value"] = limits.thm1_value;
        j["thm2_value"] = limits.thm2_value;
        j["bias_ratio"] = limits.bias_ratio;
        j["bias_direction"] = std::string(to_string(diagnosis.direction));
        j["predicted_type1"] = diagnosis.predicted_type1;
        j["level"] = level;
        if (limits.path == LimitPath::brute_force) {
            j["draws"] = limits.draws;
            if (limits.mc_errors.has_value()) {
                j["mc_errors"] = {{"betaA", limits.mc_errors->betaA},
                                  {"v1", limits.mc_errors->v1},
                                  {"v0", limits.mc_errors->v0},
                                  {"thm1", limits.mc_errors->thm1},
                                  {"thm2", limits.mc_errors->thm2}};
            }
        }
        write_or_print(output_dir, "limits.json", j.dump(2) + "\n");
        return 0;
    }

    std::ostringstream out;
    out << "path: " << to_string(limits.path);
    if (limits.path == LimitPath::brute_force) out << " (" << limits.draws << " draws)";
    out << "\n";
    out << "beta_under: beta0 = " << format_double(limits.beta_under.beta0, 10)
        << ", betaA = " << format_double(limits.beta_under.betaA, 10) << ", betaW = [";
    for (std::size_t j = 0; j < limits.beta_under.betaW.size(); ++j) {
        if (j > 0) out << ", ";
        out << format_double(limits.beta_under.betaW[j], 10);
    }
    out << "]\n";
    out << "v1 = " << format_double(limits.v1, 10) << ", v0 = " << format_double(limits.v0, 10)
        << "\n";
    out << "thm1 (limit of n*Var(delta_hat))   = " << format_double(limits.thm1_value, 10)
        << "\n";
    out << "thm2 (plim of n*Vhat, model based) = " << format_double(limits.thm2_value, 10)
        << "\n";
    out << "bias_ratio (thm2/thm1) = " << format_double(limits.bias_ratio, 10) << "\n";
    out << "diagnosis: " << to_string(diagnosis.direction) << ", predicted type I error at "
        << format_double(100 * (1 - level), 4)
        << "% nominal = " << format_double(diagnosis.predicted_type1, 6) << "\n";
    write_or_print(output_dir, "limits.txt", out.str());
    return 0;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

int cmd_simulate(const std::string& input, const std::string& output_dir, unsigned threads,
                 std::optional<std::uint64_t> seed_override,
                 std::optional<std::size_t> reps_override, std::optional<std::size_t> n_override,
                 bool dump) {
    std::ifstream in(input);
    if (!in) throw ValidationError("cannot open plan file " + input);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("invalid JSON in " + input + ": " + std::string(e.what()));
    }

    auto apply_overrides = [&](SimPlan plan) {
        if (seed_override.has_value()) plan.seed = *seed_override;
        if (reps_override.has_value()) plan.reps = *reps_override;
        if (n_override.has_value()) plan.n = *n_override;
        plan.validate();
        return plan;
    };

    std::filesystem::create_directories(output_dir);

    if (doc.is_array()) {
        std::vector<SimPlan> plans;
        for (const auto& p : doc) plans.push_back(apply_overrides(plan_from_json(p)));
        sweep(plans, output_dir, threads);
        std::cout << "wrote " << plans.size() << " reports to " << output_dir << "\n";
        return 0;
    }

    const SimPlan plan = apply_overrides(plan_from_json(doc));
    ReplicationDump rep_dump;
    SimReport report = run_simulation(plan, threads, dump ? &rep_dump : nullptr);

    const auto report_path = std::filesystem::path(output_dir) / "report.json";
    {
        std::ofstream out(report_path, std::ios::binary);
        if (!out) throw ValidationError("cannot write " + report_path.string());
        out << report_to_json(report).dump(2) << "\n";
    }
    const SimReport reports[] = {report};
    write_summary_csv(reports, std::filesystem::path(output_dir) / "summary.csv");
    write_plot_data_csv(reports, std::filesystem::path(output_dir) / "plot_coverage_vs_pi.csv");
    if (dump) {
        write_replication_csv(rep_dump, std::filesystem::path(output_dir) / "replications.csv");
    }
    std::cout << "wrote " << report_path.string() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// reproduce
// ---------------------------------------------------------------------------

int cmd_reproduce(const std::string& scenario_dir, const std::string& output_dir,
                  const ReproduceOptions& options) {
    const ReproduceResult result = run_reproduce_suite(scenario_dir, options);

    std::filesystem::create_directories(output_dir);
    for (std::size_t i = 0; i < result.reports.size(); ++i) {
        const auto path = std::filesystem::path(output_dir) /
                          ("report_" + result.reports[i].plan.name + ".json");
        std::ofstream out(path, std::ios::binary);
        out << report_to_json(result.reports[i]).dump(2) << "\n";
    }
    write_reproduce_summary_csv(result,
                                std::filesystem::path(output_dir) / "summary.csv");
    write_plot_data_csv(result.reports,
                        std::filesystem::path(output_dir) / "plot_coverage_vs_pi.csv");

    std::printf("%-8s %-22s %-28s %12s %12s %10s  %s\n", "scenario", "estimator", "check",
                "observed", "reference", "tol", "verdict");
    for (const auto& row : result.verdicts) {
        std::printf("%-8s %-22s %-28s %12.6g %12.6g %10.3g  %s\n", row.scenario.c_str(),
                    std::string(to_string(row.estimator)).c_str(), row.check.c_str(),
                    row.observed, row.reference, row.tolerance, row.pass ? "pass" : "FAIL");
    }
    std::printf("\noverall: %s\n", result.all_pass ? "PASS" : "FAIL");
    std::cout << "summary written to " << (std::filesystem::path(output_dir) / "summary.csv")
              << "\n";
    return result.all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ANCOVA treatment-effect estimation, variance diagnostics, and Monte Carlo "
                 "verification for two-arm randomised trials"};
    app.require_subcommand(1);

    // analyze
    auto* analyze = app.add_subcommand("analyze", "analyse a trial dataset (CSV)");
    std::string analyze_input;
    std::string analyze_estimators =
        "model_based_paper,model_based_classical,sandwich_if_df,welch";
    std::string analyze_format = "table";
    std::optional<std::string> analyze_output;
    double analyze_level = 0.95;
    bool analyze_t = false;
    analyze->add_option("--input", analyze_input, "trial CSV (columns Y,A,W1..Wk)")->required();
    analyze->add_option("--estimators", analyze_estimators, "comma list of variance estimators");
    analyze->add_option("--format", analyze_format, "table|csv|json")
        ->check(CLI::IsMember({"table", "csv", "json"}));
    analyze->add_option("--output", analyze_output, "output directory (default: stdout)");
    analyze->add_option("--level", analyze_level, "confidence level (default 0.95)");
    analyze->add_flag("--t-ref", analyze_t, "use t reference distributions");

    // limits
    auto* limits = app.add_subcommand("limits", "population limits for a DGP spec (JSON)");
    std::string limits_input;
    std::string limits_format = "table";
    std::optional<std::string> limits_output;
    double limits_level = 0.95;
    std::uint64_t limits_draws = 10'000'000;
    std::uint64_t limits_seed = 0xA5CE55;
    limits->add_option("--input", limits_input, "DGP spec JSON file")->required();
    limits->add_option("--format", limits_format, "table|json")
        ->check(CLI::IsMember({"table", "json"}));
    limits->add_option("--output", limits_output, "output directory (default: stdout)");
    limits->add_option("--level", limits_level, "nominal level for the type I prediction");
    limits->add_option("--draws", limits_draws, "brute-force draws for nonlinear specs");
    limits->add_option("--seed", limits_seed, "brute-force seed");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "run a Monte Carlo plan (JSON)");
    std::string sim_input;
    std::string sim_output = "sim_out";
    unsigned sim_threads = 1;
    std::optional<std::uint64_t> sim_seed;
    std::optional<std::size_t> sim_reps;
    std::optional<std::size_t> sim_n;
    bool sim_dump = false;
    simulate->add_option("--input", sim_input, "plan JSON (object) or plan array")->required();
    simulate->add_option("--output", sim_output, "output directory");
    simulate->add_option("--threads", sim_threads, "worker threads (default 1)");
    simulate->add_option("--seed", sim_seed, "override plan seed");
    simulate->add_option("--reps", sim_reps, "override replication count");
    simulate->add_option("--n", sim_n, "override sample size");
    simulate->add_flag("--dump", sim_dump, "write per-replication CSV");

    // reproduce
    auto* reproduce = app.add_subcommand("reproduce", "run the canned scenario suite");
    std::string repro_scenarios = "scenarios";
    std::string repro_output = "reproduce_out";
    ReproduceOptions repro_options;
    std::string repro_only;
    reproduce->add_option("--scenarios", repro_scenarios, "scenario directory");
    reproduce->add_option("--output", repro_output, "output directory");
    reproduce->add_option("--n", repro_options.n, "sample size per replication (default 2000)");
    reproduce->add_option("--reps", repro_options.reps, "replications (default 10000)");
    reproduce->add_option("--seed", repro_options.seed, "simulation seed");
    reproduce->add_option("--level", repro_options.level, "confidence level");
    reproduce->add_option("--threads", repro_options.threads, "worker threads");
    reproduce->add_flag("--fast", repro_options.fast, "reps = 2000 (wider Monte Carlo error)");
    reproduce->add_option("--only", repro_only, "comma list of scenario names");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand(analyze)) {
            return cmd_analyze(analyze_input, analyze_estimators, analyze_level, analyze_format,
                               analyze_output, analyze_t);
        }
        if (app.got_subcommand(limits)) {
            return cmd_limits(limits_input, limits_level, limits_draws, limits_seed,
                              limits_format, limits_output);
        }
        if (app.got_subcommand(simulate)) {
            return cmd_simulate(sim_input, sim_output, sim_threads, sim_seed, sim_reps, sim_n,
                                sim_dump);
        }
        if (app.got_subcommand(reproduce)) {
            if (!repro_only.empty()) {
                std::stringstream ss(repro_only);
                std::string token;
                while (std::getline(ss, token, ',')) {
                    if (!token.empty()) repro_options.only.push_back(token);
                }
            }
            return cmd_reproduce(repro_scenarios, repro_output, repro_options);
        }
    } catch (const ancova::ValidationError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const ancova::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
