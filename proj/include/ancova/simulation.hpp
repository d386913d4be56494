// simulation.hpp — reproducible Monte Carlo engine.
//
// Every replication derives its random substreams from (seed, replication
// index), so a report is byte-identical for a fixed plan regardless of the
// worker count. Aggregation runs in replication order.
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ancova/asymptotics.hpp"
#include "ancova/dgp.hpp"
#include "ancova/estimators.hpp"

namespace ancova {

enum class Assignment { iid_bernoulli, fixed_margin };

std::string_view to_string(Assignment a);
Assignment assignment_from_string(std::string_view name);

struct SimPlan {
    std::string name = "plan";
    DgpSpec dgp;
    std::size_t n = 0;
    std::size_t reps = 0;
    std::uint64_t seed = 0;
    Assignment assignment = Assignment::iid_bernoulli;
    std::vector<VarianceKind> estimators;
    double level = 0.95;
    double null_value = 0.0;

    void validate() const;
};

nlohmann::json plan_to_json(const SimPlan& plan);
SimPlan plan_from_json(const nlohmann::json& j);
SimPlan load_plan(const std::filesystem::path& path);

struct EstimatorSummary {
    double mean_estimate = 0.0;
    double emp_n_var = 0.0;    // n * sample variance of the point estimates
    double mean_n_var = 0.0;   // mean of n * estimated variance
    double rejection_rate = 0.0;
    double coverage = 0.0;
    double se_mean_estimate = 0.0;
    double se_emp_n_var = 0.0;   // fourth-moment formula
    double se_mean_n_var = 0.0;
    double se_rejection = 0.0;   // binomial
    double se_coverage = 0.0;
    std::size_t zero_variance_reps = 0;
};

struct SimReport {
    SimPlan plan;
    AsymptoticLimits limits;
    std::vector<std::pair<VarianceKind, EstimatorSummary>> estimators;
    std::size_t redraws = 0;
    bool assignment_extrapolation = false;  // fixed-margin mode
    bool size_study = true;                 // null_value equals the DGP's Δ
    bool degenerate_variance = false;       // some replication produced V̂ = 0

    const EstimatorSummary& summary(VarianceKind kind) const;
};

// Optional per-replication record (CSV dump).
struct ReplicationDump {
    std::vector<VarianceKind> kinds;
    std::vector<double> delta_hat;          // reps
    std::vector<std::vector<double>> variances;  // kinds x reps
};

SimReport run_simulation(const SimPlan& plan, unsigned threads = 1,
                         ReplicationDump* dump = nullptr);

nlohmann::json report_to_json(const SimReport& report);
SimReport report_from_json(const nlohmann::json& j);

// Runs plans in order, writing report_<index>_<name>.json plus a manifest
// after each completion; partial output survives a failing plan. Also writes
// summary.csv and plot_coverage_vs_pi.csv.
std::vector<SimReport> sweep(std::span<const SimPlan> plans,
                             const std::filesystem::path& output_dir, unsigned threads = 1);

void write_summary_csv(std::span<const SimReport> reports, const std::filesystem::path& path);
void write_plot_data_csv(std::span<const SimReport> reports, const std::filesystem::path& path);
void write_replication_csv(const ReplicationDump& dump, const std::filesystem::path& path);

// Reference value that n·V̂ converges to for an estimator kind (thm2 for the
// model-based family, thm1 for the influence-function family). Only
// meaningful for the regression kinds, or for welch/pooled_t when k = 0.
double variance_plim(VarianceKind kind, const AsymptoticLimits& limits);
bool variance_plim_known(VarianceKind kind, std::size_t k);

// Predicted rejection rate of a nominal (1-level) test built on this kind.
double predicted_rejection(VarianceKind kind, const AsymptoticLimits& limits, double level);

}  // namespace ancova
