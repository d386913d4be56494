// reproduce.hpp — canned scenario suite and verdict evaluation.
//
// Each scenario freezes a DGP whose limits exercise one regime: valid
// model-based inference (S0 at pi = 1/2, S2 with equal conditional
// variances), anticonservative bias (S1, S3, W0), conservative bias
// (S1-swap). Verdicts compare simulation aggregates against the analytic
// limits at Monte Carlo tolerances pinned here.
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ancova/simulation.hpp"

namespace ancova {

struct Scenario {
    std::string name;
    std::string description;
    DgpSpec dgp;
};

Scenario scenario_from_json(const nlohmann::json& j);
Scenario load_scenario(const std::filesystem::path& path);
// Loads the suite in canonical order (S0, S1, S1-swap, S2, S3, W0) from
// <dir>/<file>.json; names not in the canonical list follow alphabetically.
std::vector<Scenario> load_scenario_suite(const std::filesystem::path& dir);

struct VerdictRow {
    std::string scenario;
    VarianceKind estimator = VarianceKind::model_based_paper;
    std::string check;      // what was compared
    double observed = 0.0;
    double reference = 0.0;
    double tolerance = 0.0;  // absolute
    bool pass = false;
};

// All verdict checks for one scenario report. Tolerances: 3 MC SEs for
// empirical moments and rates, 2% relative for mean n·V̂ against its limit.
std::vector<VerdictRow> evaluate_report(const SimReport& report);

// Aggregate per-estimator verdict ("pass"/"fail") used in the summary CSV.
bool estimator_verdict(const std::vector<VerdictRow>& rows, VarianceKind kind);

struct ReproduceOptions {
    std::size_t n = 2000;
    std::size_t reps = 10'000;
    std::uint64_t seed = 20260810;
    double level = 0.95;
    bool fast = false;  // reps = 2000
    unsigned threads = 1;
    std::vector<std::string> only;  // subset of scenario names
};

struct ReproduceResult {
    std::vector<Scenario> scenarios;
    std::vector<SimReport> reports;
    std::vector<VerdictRow> verdicts;
    bool all_pass = true;
};

ReproduceResult run_reproduce_suite(const std::filesystem::path& scenario_dir,
                                    const ReproduceOptions& options);

// summary.csv with the spec'd schema, verdict column filled.
void write_reproduce_summary_csv(const ReproduceResult& result,
                                 const std::filesystem::path& path);

}  // namespace ancova
