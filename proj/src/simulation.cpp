// simulation.cpp — replication engine, aggregation, serialisation.

#include "ancova/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <thread>

#include "ancova/errors.hpp"
#include "ancova/kernels.hpp"
#include "ancova/stats.hpp"

namespace ancova {

std::string_view to_string(Assignment a) {
    return a == Assignment::iid_bernoulli ? "iid_bernoulli" : "fixed_margin";
}

Assignment assignment_from_string(std::string_view name) {
    if (name == "iid_bernoulli") return Assignment::iid_bernoulli;
    if (name == "fixed_margin") return Assignment::fixed_margin;
    throw ValidationError("plan: assignment must be iid_bernoulli or fixed_margin");
}

void SimPlan::validate() const {
    dgp.validate();
    if (reps < 1) throw ValidationError("plan: reps must be >= 1");
    if (n < dgp.k() + 3) throw ValidationError("plan: n must be >= k+3");
    if (!(level > 0.0 && level < 1.0)) throw ValidationError("plan: level must lie in (0,1)");
    if (estimators.empty()) throw ValidationError("plan: estimators must not be empty");
    if (!std::isfinite(null_value)) throw ValidationError("plan: null_value must be finite");
    if (assignment == Assignment::fixed_margin) {
        const auto n1 = static_cast<std::size_t>(std::floor(static_cast<double>(n) * dgp.pi));
        if (n1 < 2 || n - n1 < 2)
            throw ValidationError("plan: fixed-margin assignment leaves an arm with < 2 subjects");
    }
}

const EstimatorSummary& SimReport::summary(VarianceKind kind) const {
    for (const auto& [k, s] : estimators) {
        if (k == kind) return s;
    }
    throw ValidationError("report: estimator kind not present: " + std::string(to_string(kind)));
}

namespace {

bool uses_unadjusted_estimate(VarianceKind kind) {
    return kind == VarianceKind::welch || kind == VarianceKind::pooled_t;
}

struct RepResult {
    double delta_ancova = 0.0;
    double delta_unadj = 0.0;
    std::vector<double> variance;  // per requested kind
    std::vector<unsigned char> reject;
    std::vector<unsigned char> cover;
    std::vector<unsigned char> zero_variance;
    std::uint32_t attempts = 0;
};

// One replication: draw, fit, test. Degenerate draws retry with a fresh
// substream (attempt index feeds the stream id).
RepResult run_replication(const SimPlan& plan, std::size_t rep) {
    const std::size_t n = plan.n;
    const std::size_t k = plan.dgp.k();
    const double pi = plan.dgp.pi;
    constexpr std::uint32_t kMaxAttempts = 64;

    RepResult result;
    const std::size_t kinds = plan.estimators.size();
    result.variance.assign(kinds, 0.0);
    result.reject.assign(kinds, 0);
    result.cover.assign(kinds, 0);
    result.zero_variance.assign(kinds, 0);

    for (std::uint32_t attempt = 0;; ++attempt) {
        if (attempt >= kMaxAttempts) {
            throw NumericalError("simulation: replication " + std::to_string(rep) +
                                 " kept producing degenerate designs");
        }
        RandomStream wstream(plan.seed, rep, StreamTag::covariates, attempt);
        RandomStream astream(plan.seed, rep, StreamTag::arm, attempt);
        RandomStream nstream(plan.seed, rep, StreamTag::noise, attempt);

        TrialDataset data;
        data.outcomes.resize(n);
        data.arms.resize(n);
        data.covariates = Matrix(n, k);
        data.covariate_names.resize(k);
        for (std::size_t j = 0; j < k; ++j) data.covariate_names[j] = "W" + std::to_string(j + 1);

        std::vector<double> row(k);
        for (std::size_t i = 0; i < n; ++i) {
            plan.dgp.sample_covariate_row(wstream, row);
            for (std::size_t j = 0; j < k; ++j) data.covariates(i, j) = row[j];
        }

        if (plan.assignment == Assignment::iid_bernoulli) {
            for (std::size_t i = 0; i < n; ++i)
                data.arms[i] = astream.next_u01() < pi ? 1 : 0;
        } else {
            const auto n1 = static_cast<std::size_t>(std::floor(static_cast<double>(n) * pi));
            for (std::size_t i = 0; i < n; ++i) data.arms[i] = i < n1 ? 1 : 0;
            // Fisher-Yates with the arm substream.
            for (std::size_t i = n; i-- > 1;) {
                const auto j = static_cast<std::size_t>(astream.next_below(i + 1));
                std::swap(data.arms[i], data.arms[j]);
            }
        }

        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < k; ++j) row[j] = data.covariates(i, j);
            const double sd = plan.dgp.noise_sd_at(data.arms[i], row);
            const double mean = evaluate_mean(data.arms[i] == 1 ? plan.dgp.m1 : plan.dgp.m0, row);
            data.outcomes[i] = mean + plan.dgp.sample_noise(nstream, sd);
        }

        const std::size_t n1 = data.arm_count(1);
        if (n1 < 2 || n - n1 < 2) {
            result.attempts = attempt + 1;
            continue;
        }

        try {
            const AncovaFit fit = ancova_fit(data);
            result.delta_ancova = fit.betaA;
            result.delta_unadj = unadjusted_estimate(data);

            for (std::size_t e = 0; e < kinds; ++e) {
                const VarianceKind kind = plan.estimators[e];
                VarianceEstimate variance;
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
                        break;
                    case VarianceKind::pooled_t:
                        variance = pooled_t_variance(data);
                        break;
                }
                const double estimate =
                    uses_unadjusted_estimate(kind) ? result.delta_unadj : result.delta_ancova;
                result.variance[e] = variance.value;
                if (variance.value > 0.0) {
                    const WaldResult wald = wald_test(estimate, variance, plan.null_value,
                                                      plan.level);
                    const bool covered =
                        wald.ci_lower <= plan.null_value && plan.null_value <= wald.ci_upper;
                    result.cover[e] = covered ? 1 : 0;
                    result.reject[e] = covered ? 0 : 1;
                } else {
                    // Zero estimated variance: the interval degenerates to a
                    // point; flagged upstream.
                    result.zero_variance[e] = 1;
                    const bool covered = estimate == plan.null_value;
                    result.cover[e] = covered ? 1 : 0;
                    result.reject[e] = covered ? 0 : 1;
                }
            }
        } catch (const NumericalError&) {
            result.attempts = attempt + 1;
            continue;  // rank-deficient or otherwise degenerate draw
        }
        result.attempts = attempt + 1;
        return result;
    }
}

}  // namespace

SimReport run_simulation(const SimPlan& plan, unsigned threads, ReplicationDump* dump) {
    plan.validate();

    SimReport report;
    report.plan = plan;
    report.limits = compute_limits(plan.dgp, {.seed = plan.seed ^ 0x5EEDF00DULL});
    report.assignment_extrapolation = plan.assignment == Assignment::fixed_margin;
    report.size_study = std::fabs(plan.null_value - plan.dgp.delta()) <= 1e-12;

    const std::size_t reps = plan.reps;
    std::vector<RepResult> results(reps);

    const unsigned workers = std::max(1u, threads);
    if (workers == 1 || reps < 2) {
        for (std::size_t r = 0; r < reps; ++r) results[r] = run_replication(plan, r);
    } else {
        std::vector<std::thread> pool;
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            while (true) {
                const std::size_t r = next.fetch_add(1);
                if (r >= reps) break;
                results[r] = run_replication(plan, r);
            }
        };
        const unsigned count = static_cast<unsigned>(
            std::min<std::size_t>(workers, reps));
        pool.reserve(count);
        for (unsigned t = 0; t < count; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    // Redraw accounting and the 1% abort rule.
    std::size_t redraws = 0;
    for (const auto& r : results) redraws += r.attempts - 1;
    report.redraws = redraws;
    if (static_cast<double>(redraws) > 0.01 * static_cast<double>(reps)) {
        throw NumericalError(
            "simulation: redraw rate " + std::to_string(redraws) + "/" + std::to_string(reps) +
            " exceeds 1%; the design is too degenerate for this n and pi");
    }

    // Aggregation in replication order.
    const double n_scale = static_cast<double>(plan.n);
    std::vector<double> estimates(reps), n_vars(reps);
    for (std::size_t e = 0; e < plan.estimators.size(); ++e) {
        const VarianceKind kind = plan.estimators[e];
        for (std::size_t r = 0; r < reps; ++r) {
            estimates[r] = uses_unadjusted_estimate(kind) ? results[r].delta_unadj
                                                          : results[r].delta_ancova;
            n_vars[r] = n_scale * results[r].variance[e];
        }
        EstimatorSummary s;
        s.mean_estimate = stats::mean(estimates);
        s.se_mean_estimate = reps > 1 ? std::sqrt(stats::sample_variance(estimates) /
                                                  static_cast<double>(reps))
                                      : 0.0;
        s.emp_n_var = n_scale * stats::sample_variance(estimates);
        s.se_emp_n_var = n_scale * stats::variance_standard_error(estimates);
        s.mean_n_var = stats::mean(n_vars);
        s.se_mean_n_var = reps > 1 ? std::sqrt(stats::sample_variance(n_vars) /
                                               static_cast<double>(reps))
                                   : 0.0;
        std::size_t rejections = 0, coverages = 0, zeros = 0;
        for (std::size_t r = 0; r < reps; ++r) {
            rejections += results[r].reject[e];
            coverages += results[r].cover[e];
            zeros += results[r].zero_variance[e];
        }
        s.rejection_rate = static_cast<double>(rejections) / static_cast<double>(reps);
        s.coverage = static_cast<double>(coverages) / static_cast<double>(reps);
        s.se_rejection = stats::binomial_se(s.rejection_rate, reps);
        s.se_coverage = stats::binomial_se(s.coverage, reps);
        s.zero_variance_reps = zeros;
        if (zeros > 0) report.degenerate_variance = true;
        report.estimators.emplace_back(kind, s);
    }

    if (dump != nullptr) {
        dump->kinds = plan.estimators;
        dump->delta_hat.resize(reps);
        dump->variances.assign(plan.estimators.size(), std::vector<double>(reps));
        for (std::size_t r = 0; r < reps; ++r) {
            dump->delta_hat[r] = results[r].delta_ancova;
            for (std::size_t e = 0; e < plan.estimators.size(); ++e)
                dump->variances[e][r] = results[r].variance[e];
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// serialisation
// ---------------------------------------------------------------------------

nlohmann::json plan_to_json(const SimPlan& plan) {
    nlohmann::json j;
    j["name"] = plan.name;
    j["dgp"] = dgp_to_json(plan.dgp);
    j["n"] = plan.n;
    j["reps"] = plan.reps;
    j["seed"] = plan.seed;
    j["assignment"] = std::string(to_string(plan.assignment));
    std::vector<std::string> kinds;
    kinds.reserve(plan.estimators.size());
    for (auto kind : plan.estimators) kinds.emplace_back(to_string(kind));
    j["estimators"] = kinds;
    j["level"] = plan.level;
    j["null_value"] = plan.null_value;
    return j;
}

SimPlan plan_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ValidationError("plan json: document must be an object");
    SimPlan plan;
    if (j.contains("name")) plan.name = j.at("name").get<std::string>();
    if (!j.contains("dgp")) throw ValidationError("plan json: missing field $.dgp");
    plan.dgp = dgp_from_json(j.at("dgp"));
    try {
        plan.n = j.at("n").get<std::size_t>();
        plan.reps = j.at("reps").get<std::size_t>();
        plan.seed = j.at("seed").get<std::uint64_t>();
    } catch (const nlohmann::json::exception&) {
        throw ValidationError("plan json: fields n, reps, seed are required numbers");
    }
    if (j.contains("assignment"))
        plan.assignment = assignment_from_string(j.at("assignment").get<std::string>());
    if (j.contains("estimators")) {
        for (const auto& name : j.at("estimators"))
            plan.estimators.push_back(variance_kind_from_string(name.get<std::string>()));
    }
    if (plan.estimators.empty()) {
        plan.estimators = {VarianceKind::model_based_paper, VarianceKind::sandwich_if_df};
    }
    if (j.contains("level")) plan.level = j.at("level").get<double>();
    if (j.contains("null_value")) plan.null_value = j.at("null_value").get<double>();
    plan.validate();
    return plan;
}

SimPlan load_plan(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("plan: cannot open file " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("plan: invalid JSON in " + path.string() + ": " + e.what());
    }
    return plan_from_json(j);
}

namespace {

nlohmann::json limits_to_json(const AsymptoticLimits& limits) {
    nlohmann::json j;
    j["beta_under"] = {{"beta0", limits.beta_under.beta0},
                       {"betaA", limits.beta_under.betaA},
                       {"betaW", limits.beta_under.betaW}};
    j["thm1_value"] = limits.thm1_value;
    j["thm2_value"] = limits.thm2_value;
    j["v1"] = limits.v1;
    j["v0"] = limits.v0;
    j["bias_ratio"] = limits.bias_ratio;
    j["predicted_type1"] = limits.predicted_type1;
    j["path"] = std::string(to_string(limits.path));
    j["draws"] = limits.draws;
    if (limits.mc_errors.has_value()) {
        const auto& se = *limits.mc_errors;
        j["mc_errors"] = {{"betaA", se.betaA}, {"betaW", se.betaW}, {"v1", se.v1},
                          {"v0", se.v0},       {"thm1", se.thm1},   {"thm2", se.thm2}};
    }
    return j;
}

AsymptoticLimits limits_from_json(const nlohmann::json& j) {
    AsymptoticLimits limits;
    limits.beta_under.beta0 = j.at("beta_under").at("beta0").get<double>();
    limits.beta_under.betaA = j.at("beta_under").at("betaA").get<double>();
    limits.beta_under.betaW = j.at("beta_under").at("betaW").get<std::vector<double>>();
    limits.thm1_value = j.at("thm1_value").get<double>();
    limits.thm2_value = j.at("thm2_value").get<double>();
    limits.v1 = j.at("v1").get<double>();
    limits.v0 = j.at("v0").get<double>();
    limits.bias_ratio = j.at("bias_ratio").get<double>();
    limits.predicted_type1 = j.at("predicted_type1").get<double>();
    limits.path = j.at("path").get<std::string>() == "analytic" ? LimitPath::analytic
                                                                : LimitPath::brute_force;
    limits.draws = j.at("draws").get<std::uint64_t>();
    if (j.contains("mc_errors")) {
        LimitStandardErrors se;
        const auto& m = j.at("mc_errors");
        se.betaA = m.at("betaA").get<double>();
        se.betaW = m.at("betaW").get<std::vector<double>>();
        se.v1 = m.at("v1").get<double>();
        se.v0 = m.at("v0").get<double>();
        se.thm1 = m.at("thm1").get<double>();
        se.thm2 = m.at("thm2").get<double>();
        limits.mc_errors = std::move(se);
    }
    return limits;
}

}  // namespace

nlohmann::json report_to_json(const SimReport& report) {
    nlohmann::json j;
    j["plan"] = plan_to_json(report.plan);
    j["limits"] = limits_to_json(report.limits);
    nlohmann::json estimators = nlohmann::json::object();
    for (const auto& [kind, s] : report.estimators) {
        estimators[std::string(to_string(kind))] = {
            {"mean_estimate", s.mean_estimate},
            {"emp_n_var", s.emp_n_var},
            {"mean_n_var", s.mean_n_var},
            {"rejection_rate", s.rejection_rate},
            {"coverage", s.coverage},
            {"se_mean_estimate", s.se_mean_estimate},
            {"se_emp_n_var", s.se_emp_n_var},
            {"se_mean_n_var", s.se_mean_n_var},
            {"se_rejection", s.se_rejection},
            {"se_coverage", s.se_coverage},
            {"zero_variance_reps", s.zero_variance_reps},
        };
    }
    j["estimators"] = estimators;
    j["redraws"] = report.redraws;
    j["assignment_extrapolation"] = report.assignment_extrapolation;
    j["size_study"] = report.size_study;
    j["degenerate_variance"] = report.degenerate_variance;
    return j;
}

SimReport report_from_json(const nlohmann::json& j) {
    SimReport report;
    report.plan = plan_from_json(j.at("plan"));
    report.limits = limits_from_json(j.at("limits"));
    // Keep the plan's estimator order.
    for (const auto kind : report.plan.estimators) {
        const auto& s = j.at("estimators").at(std::string(to_string(kind)));
        EstimatorSummary summary;
        summary.mean_estimate = s.at("mean_estimate").get<double>();
        summary.emp_n_var = s.at("emp_n_var").get<double>();
        summary.mean_n_var = s.at("mean_n_var").get<double>();
        summary.rejection_rate = s.at("rejection_rate").get<double>();
        summary.coverage = s.at("coverage").get<double>();
        summary.se_mean_estimate = s.at("se_mean_estimate").get<double>();
        summary.se_emp_n_var = s.at("se_emp_n_var").get<double>();
        summary.se_mean_n_var = s.at("se_mean_n_var").get<double>();
        summary.se_rejection = s.at("se_rejection").get<double>();
        summary.se_coverage = s.at("se_coverage").get<double>();
        summary.zero_variance_reps = s.at("zero_variance_reps").get<std::size_t>();
        report.estimators.emplace_back(kind, summary);
    }
    report.redraws = j.at("redraws").get<std::size_t>();
    report.assignment_extrapolation = j.at("assignment_extrapolation").get<bool>();
    report.size_study = j.at("size_study").get<bool>();
    report.degenerate_variance = j.at("degenerate_variance").get<bool>();
    return report;
}

// ---------------------------------------------------------------------------
// sweep and CSV output
// ---------------------------------------------------------------------------

double variance_plim(VarianceKind kind, const AsymptoticLimits& limits) {
    switch (kind) {
        case VarianceKind::model_based_paper:
        case VarianceKind::model_based_classical:
        case VarianceKind::pooled_t:
            return limits.thm2_value;
        case VarianceKind::sandwich_if:
        case VarianceKind::sandwich_if_df:
        case VarianceKind::welch:
            return limits.thm1_value;
    }
    return limits.thm1_value;
}

bool variance_plim_known(VarianceKind kind, std::size_t k) {
    if (kind == VarianceKind::welch || kind == VarianceKind::pooled_t) return k == 0;
    return true;
}

double predicted_rejection(VarianceKind kind, const AsymptoticLimits& limits, double level) {
    const double z = stats::norm_quantile(1.0 - (1.0 - level) / 2.0);
    const double ratio = variance_plim(kind, limits) / limits.thm1_value;
    return 2.0 * stats::norm_cdf(-z * std::sqrt(ratio));
}

namespace {

void format_number(std::string& out, double value) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    out.append(buf, ptr);
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write file " + path.string());
    out << text;
}

}  // namespace

void write_summary_csv(std::span<const SimReport> reports, const std::filesystem::path& path) {
    std::string csv =
        "scenario,pi,n,estimator,mean_n_var_hat,thm2,emp_n_var,thm1,rejection,"
        "predicted_rejection,coverage,verdict\n";
    for (const auto& report : reports) {
        const auto& limits = report.limits;
        for (const auto& [kind, s] : report.estimators) {
            csv += report.plan.name;
            csv += ',';
            format_number(csv, report.plan.dgp.pi);
            csv += ',';
            csv += std::to_string(report.plan.n);
            csv += ',';
            csv += to_string(kind);
            csv += ',';
            format_number(csv, s.mean_n_var);
            csv += ',';
            format_number(csv, limits.thm2_value);
            csv += ',';
            format_number(csv, s.emp_n_var);
            csv += ',';
            format_number(csv, limits.thm1_value);
            csv += ',';
            format_number(csv, s.rejection_rate);
            csv += ',';
            if (report.size_study && variance_plim_known(kind, report.plan.dgp.k())) {
                format_number(csv, predicted_rejection(kind, limits, report.plan.level));
            }
            csv += ',';
            format_number(csv, s.coverage);
            csv += ',';
            // The verdict column is filled by the reproduce suite; plain
            // simulate runs leave it open.
            csv += "n/a";
            csv += '\n';
        }
    }
    write_text_file(path, csv);
}

void write_plot_data_csv(std::span<const SimReport> reports, const std::filesystem::path& path) {
    std::string csv = "scenario,pi,n,estimator,coverage,rejection\n";
    for (const auto& report : reports) {
        for (const auto& [kind, s] : report.estimators) {
            csv += report.plan.name;
            csv += ',';
            format_number(csv, report.plan.dgp.pi);
            csv += ',';
            csv += std::to_string(report.plan.n);
            csv += ',';
            csv += to_string(kind);
            csv += ',';
            format_number(csv, s.coverage);
            csv += ',';
            format_number(csv, s.rejection_rate);
            csv += '\n';
        }
    }
    write_text_file(path, csv);
}

void write_replication_csv(const ReplicationDump& dump, const std::filesystem::path& path) {
    std::string csv = "rep,delta_hat";
    for (const auto kind : dump.kinds) {
        csv += ",var_";
        csv += to_string(kind);
    }
    csv += '\n';
    for (std::size_t r = 0; r < dump.delta_hat.size(); ++r) {
        csv += std::to_string(r);
        csv += ',';
        format_number(csv, dump.delta_hat[r]);
        for (std::size_t e = 0; e < dump.kinds.size(); ++e) {
            csv += ',';
            format_number(csv, dump.variances[e][r]);
        }
        csv += '\n';
    }
    write_text_file(path, csv);
}

std::vector<SimReport> sweep(std::span<const SimPlan> plans,
                             const std::filesystem::path& output_dir, unsigned threads) {
    std::filesystem::create_directories(output_dir);
    std::vector<SimReport> reports;
    nlohmann::json manifest;
    manifest["completed"] = nlohmann::json::array();

    for (std::size_t i = 0; i < plans.size(); ++i) {
        SimReport report = run_simulation(plans[i], threads);
        const std::string filename =
            "report_" + std::to_string(i) + "_" + plans[i].name + ".json";
        write_text_file(output_dir / filename, report_to_json(report).dump(2) + "\n");
        manifest["completed"].push_back({{"index", i},
                                         {"name", plans[i].name},
                                         {"file", filename}});
        write_text_file(output_dir / "manifest.json", manifest.dump(2) + "\n");
        reports.push_back(std::move(report));
    }

    write_summary_csv(reports, output_dir / "summary.csv");
    write_plot_data_csv(reports, output_dir / "plot_coverage_vs_pi.csv");
    return reports;
}

}  // namespace ancova
