#include "rbam/commands.hpp"

#include "rbam/csv_io.hpp"
#include "rbam/errors.hpp"
#include "rbam/model_io.hpp"
#include "rbam/rb_online.hpp"
#include "rbam/vi_truth.hpp"

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <future>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

namespace rbam {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr int kArtifactSchemaVersion = 1;

ordered_json mu_json(const ParameterVector& mu) {
    return ordered_json{{"K", mu.K}, {"r", mu.r}, {"q", mu.q}, {"sigma", mu.sigma}};
}

void write_json(const std::string& path, const ordered_json& doc) { write_text_file(path, doc.dump(2) + "\n"); }

std::string out_path(const RunConfig& config, const std::string& name) { return config.io.output_dir + "/" + name; }

std::vector<std::string> mu_fields(const ParameterVector& mu) {
    return {format_real(mu.K), format_real(mu.r), format_real(mu.q), format_real(mu.sigma)};
}

/// Rows (step, t, s, u, lambda, price[, source]) for one trajectory given by its nodal vectors.
void write_trajectory_rows(CsvWriter& csv, const std::vector<Vector>& u, const std::vector<Vector>& lambda,
                           const ObstacleData& obstacle, const Mesh1D& mesh, const SchemeConfig& config,
                           const std::string& source) {
    for (std::size_t n = 0; n < u.size(); ++n) {
        const auto step = static_cast<int>(n);
        for (int i = 0; i < mesh.H; ++i) {
            std::vector<std::string> row{std::to_string(step), format_real(config.time(step)),
                                         format_real(mesh.dof_coordinate(i)), format_real(u[n][i]),
                                         n == 0 ? std::string() : format_real(lambda[n - 1][i]),
                                         format_real(u[n][i] + obstacle.p0[i])};
            if (!source.empty()) row.push_back(source);
            csv.write(row);
        }
    }
}

double max_v_norm(const std::vector<Vector>& u, const AffineOperatorSet& ops) {
    double scale = 0.0;
    for (const Vector& v : u) scale = std::max(scale, v_norm(v, ops));
    return scale;
}

void check_model_file(const std::string& path) {
    if (!std::filesystem::exists(path)) throw MissingArtifact("model file '" + path + "' does not exist");
}

}  // namespace

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e) != nullptr) return kExitConfig;
    if (dynamic_cast<const std::invalid_argument*>(&e) != nullptr) return kExitConfig;
    if (dynamic_cast<const MissingArtifact*>(&e) != nullptr) return kExitMissingArtifact;
    if (dynamic_cast<const LoadError*>(&e) != nullptr) return kExitMissingArtifact;
    if (const auto* s = dynamic_cast<const SaturationError*>(&e)) {
        return s->achieved() == 0 ? kExitSaturation : kExitSolver;
    }
    if (dynamic_cast<const DegenerateInput*>(&e) != nullptr) return kExitSaturation;
    if (dynamic_cast<const Error*>(&e) != nullptr) return kExitSolver;
    return kExitFailure;
}

int run_command(const std::function<void()>& fn, std::ostream& err) {
    try {
        fn();
        return kExitOk;
    } catch (const std::exception& e) {
        const int code = exit_code_for(e);
        const ordered_json record{{"schema_version", kArtifactSchemaVersion},
                                  {"status", "error"},
                                  {"exit_code", code},
                                  {"message", e.what()}};
        err << record.dump() << '\n';
        return code;
    }
}

void cmd_truth(const RunConfig& config, const ParameterVector& mu, std::ostream& log) {
    config.validate();
    mu.validate();
    const Mesh1D mesh = build_mesh(config.mesh.H, config.mesh.s_f);
    const AffineOperatorSet ops = assemble_operators(mesh);
    const ObstacleData obstacle = obstacle_data(mesh, mu.K);
    const Trajectory traj = solve_trajectory(mu, ops, obstacle, config.time);
    const TrajectoryCheck check = check_trajectory(traj, obstacle);

    ensure_directory(config.io.output_dir);
    write_trajectory_csv(out_path(config, "truth_trajectory.csv"), traj, mesh, obstacle);

    ordered_json curve{{"s", ordered_json::array()}, {"price", ordered_json::array()}};
    const Vector& last = traj.u.back();
    for (int i = 0; i < mesh.H; ++i) {
        curve["s"].push_back(mesh.dof_coordinate(i));
        curve["price"].push_back(last[i] + obstacle.p0[i]);
    }
    const auto [lo, hi] = std::minmax_element(traj.iterations.begin(), traj.iterations.end());
    const int total = std::accumulate(traj.iterations.begin(), traj.iterations.end(), 0);
    const ordered_json summary{
        {"schema_version", kArtifactSchemaVersion},
        {"mu", mu_json(mu)},
        {"mesh", {{"H", mesh.H}, {"s_f", mesh.s_f}}},
        {"time", {{"T", config.time.T}, {"L", config.time.L}, {"theta", config.time.theta}}},
        {"final_price_curve", curve},
        {"pdas_iteration_stats",
         {{"per_step", traj.iterations},
          {"min", *lo},
          {"max", *hi},
          {"total", total},
          {"mean", static_cast<double>(total) / static_cast<double>(traj.iterations.size())}}},
        {"feasibility_residuals",
         {{"min_gap", check.min_gap},
          {"min_lambda", check.min_lambda},
          {"max_complementarity", check.max_complementarity},
          {"max_linear_residual", check.max_linear},
          {"ok", check.ok}}}};
    write_json(out_path(config, "truth_summary.json"), summary);

    log << "truth: " << traj.u.size() << " steps, max active-set sweeps " << *hi << ", complementarity "
        << format_real(check.max_complementarity) << (check.ok ? "" : " (tolerance violated)") << '\n';
}

void cmd_offline(const RunConfig& config, std::ostream& log) {
    config.validate();
    const Mesh1D mesh = build_mesh(config.mesh.H, config.mesh.s_f);
    const AffineOperatorSet ops = assemble_operators(mesh);
    const std::vector<ParameterVector> training =
        sample_training_set(config.box, config.sampling.N_train, config.sampling.seed, SampleStream::Training);

    ensure_directory(config.io.output_dir);
    {
        CsvWriter csv(out_path(config, "training_set.csv"), {"index", "K", "r", "q", "sigma"});
        for (std::size_t m = 0; m < training.size(); ++m) {
            std::vector<std::string> row{std::to_string(m)};
            for (std::string& f : mu_fields(training[m])) row.push_back(std::move(f));
            csv.write(row);
        }
    }

    const SnapshotStore store = generate_snapshots(training, ops, config.time);
    const ReducedModel model = build_reduced_model(store, config.rb, ops, {SaturationPolicy::Truncate});
    const GreedyDiagnostics& diag = model.diagnostics;

    const std::string model_path = config.resolved_model_path();
    const std::filesystem::path parent = std::filesystem::path(model_path).parent_path();
    if (!parent.empty()) ensure_directory(parent.string());
    save_model(model, model_path);

    {
        CsvWriter csv(out_path(config, "eps_u.csv"), {"k", "eps_u", "mu_index", "K", "r", "q", "sigma"});
        for (std::size_t k = 0; k < diag.eps_u.size(); ++k) {
            std::vector<std::string> row{std::to_string(k + 1), format_real(diag.eps_u[k]),
                                         std::to_string(diag.selected_params_u[k])};
            for (std::string& f : mu_fields(diag.selected_mu_u[k])) row.push_back(std::move(f));
            csv.write(row);
        }
    }
    {
        CsvWriter csv(out_path(config, "eps_lambda.csv"),
                      {"k", "eps_lambda", "mu_index", "n", "K", "r", "q", "sigma"});
        for (std::size_t k = 0; k < diag.eps_lambda.size(); ++k) {
            const SnapshotIndex& idx = diag.selected_pairs_lambda[k];
            std::vector<std::string> row{std::to_string(k + 1), format_real(diag.eps_lambda[k]),
                                         std::to_string(idx.mu_index), std::to_string(idx.n)};
            for (std::string& f : mu_fields(diag.selected_mu_lambda[k])) row.push_back(std::move(f));
            csv.write(row);
        }
    }
    const ordered_json summary{{"schema_version", kArtifactSchemaVersion},
                               {"seed", config.sampling.seed},
                               {"N_train", config.sampling.N_train},
                               {"requested", {{"NV_tilde", config.rb.NV_tilde}, {"NW", config.rb.NW}}},
                               {"NV_tilde", model.NV_tilde},
                               {"NW", model.NW},
                               {"NV", model.NV},
                               {"model_path", model_path},
                               {"warnings", diag.warnings}};
    write_json(out_path(config, "offline_summary.json"), summary);

    log << "offline: NV_tilde=" << model.NV_tilde << " NW=" << model.NW << " NV=" << model.NV << " -> " << model_path
        << '\n';
    for (const std::string& w : diag.warnings) log << "warning: " << w << '\n';
}

void cmd_online(const RunConfig& config, const OnlineOptions& options, std::ostream& log) {
    config.validate();
    options.mu.validate();
    const std::string model_path = config.resolved_model_path();
    check_model_file(model_path);
    const ReducedModel model = load_model(model_path);

    const Mesh1D mesh = build_mesh(model.H, model.s_f);
    const ObstacleData obstacle = obstacle_data(mesh, options.mu.K);
    const OnlineData data = online_setup(model, options.mu);
    const ReducedTrajectory rt = reduced_trajectory(model, options.mu);
    const ReducedCheck reduced_check = check_reduced_trajectory(rt, model, data);
    const NodalTrajectory nodal = reconstruct(model, rt, options.mu.K, mesh);

    double min_price_gap = std::numeric_limits<double>::infinity();
    for (const Vector& p : nodal.price) min_price_gap = std::min(min_price_gap, (p - obstacle.psi).minCoeff());

    ensure_directory(config.io.output_dir);
    {
        CsvWriter csv(out_path(config, "reduced_trajectory.csv"), {"step", "t", "s", "u", "lambda", "price"});
        write_trajectory_rows(csv, nodal.u, nodal.lambda, obstacle, mesh, model.config, "");
    }

    ordered_json summary{{"schema_version", kArtifactSchemaVersion},
                         {"mu", mu_json(options.mu)},
                         {"out_of_box", !config.box.contains(options.mu)},
                         {"NV_tilde", model.NV_tilde},
                         {"NW", model.NW},
                         {"NV", model.NV},
                         {"reduced_feasibility",
                          {{"min_alpha", reduced_check.min_alpha},
                           {"min_slack", reduced_check.min_slack},
                           {"max_complementarity", reduced_check.max_complementarity},
                           {"ok", reduced_check.ok}}},
                         {"min_price_minus_payoff", min_price_gap}};

    if (options.compare) {
        const AffineOperatorSet ops = assemble_operators(mesh);
        const Trajectory truth = solve_trajectory(options.mu, ops, obstacle, model.config);
        const double err = error_norm(truth, nodal, ops);
        const double scale = max_v_norm(truth.u, ops);
        CsvWriter csv(out_path(config, "comparison.csv"), {"step", "t", "s", "u", "lambda", "price", "source"});
        write_trajectory_rows(csv, truth.u, truth.lambda, obstacle, mesh, model.config, "truth");
        write_trajectory_rows(csv, nodal.u, nodal.lambda, obstacle, mesh, model.config, "reduced");
        summary["err_N"] = err;
        summary["max_truth_v_norm"] = scale;
        summary["relative_err_N"] = scale > 0.0 ? err / scale : 0.0;
        log << "online: err_N=" << format_real(err) << " (max |u|_V " << format_real(scale) << ")\n";
    }
    write_json(out_path(config, "online_summary.json"), summary);
    log << "online: " << rt.uN.size() << " steps with NV=" << model.NV << " NW=" << model.NW
        << ", min(P - payoff)=" << format_real(min_price_gap) << '\n';
}

void cmd_study(const RunConfig& config, const std::vector<BasisBudget>& budgets, std::ostream& log) {
    config.validate();
    if (budgets.empty()) throw ConfigError("study: no budgets given");
    const Mesh1D mesh = build_mesh(config.mesh.H, config.mesh.s_f);
    const AffineOperatorSet ops = assemble_operators(mesh);
    const std::vector<ParameterVector> training =
        sample_training_set(config.box, config.sampling.N_train, config.sampling.seed, SampleStream::Training);
    const std::vector<ParameterVector> test =
        sample_training_set(config.box, config.sampling.N_test, config.sampling.seed, SampleStream::Test);
    const SnapshotStore store = generate_snapshots(training, ops, config.time);

    struct Outcome {
        ReducedModel model;
        ErrorReport report;
        std::string failure;
    };
    // One independent build per budget over shared read-only inputs; rows are written in budget order.
    std::vector<std::future<Outcome>> pending;
    for (const BasisBudget& budget : budgets) {
        pending.push_back(std::async(std::launch::async, [&store, &ops, &test, &config, budget] {
            Outcome out;
            try {
                out.model = build_reduced_model(store, budget, ops, {SaturationPolicy::Truncate});
                out.report = err_linf(out.model, test, ops, &config.box);
            } catch (const Error& e) {
                out.failure = std::string("failed: ") + e.what();
                std::replace(out.failure.begin(), out.failure.end(), ',', ';');
            }
            return out;
        }));
    }

    ensure_directory(config.io.output_dir);
    CsvWriter csv(out_path(config, "study.csv"), {"NV_tilde", "NW", "NV", "ErrLinf", "status"});
    for (std::size_t i = 0; i < budgets.size(); ++i) {
        const BasisBudget& budget = budgets[i];
        const Outcome out = pending[i].get();
        if (!out.failure.empty()) {
            csv.write({std::to_string(budget.NV_tilde), std::to_string(budget.NW), "", "", out.failure});
            log << "study: (" << budget.NV_tilde << "," << budget.NW << ") " << out.failure << '\n';
            continue;
        }
        const std::string label = std::to_string(budget.NV_tilde) + "_" + std::to_string(budget.NW);
        write_error_report_csv(out_path(config, "error_report_" + label + ".csv"), out.report);
        const bool truncated = out.model.NV_tilde != budget.NV_tilde || out.model.NW != budget.NW;
        csv.write({std::to_string(budget.NV_tilde), std::to_string(budget.NW), std::to_string(out.model.NV),
                   format_real(out.report.err_linf), truncated ? "saturated" : "ok"});
        log << "study: (" << budget.NV_tilde << "," << budget.NW << ") NV=" << out.model.NV
            << " ErrLinf=" << format_real(out.report.err_linf) << '\n';
    }
}

void cmd_validate(const RunConfig& config, std::ostream& log) {
    const std::string model_path = config.resolved_model_path();
    check_model_file(model_path);
    const ReducedModel model = load_model(model_path);
    const AffineOperatorSet ops = assemble_operators(build_mesh(model.H, model.s_f));
    try {
        verify_model(model, ops);
    } catch (const Error& e) {
        throw LoadError(std::string("validate: ") + e.what());
    }
    log << "validate: " << model_path << " ok (NV=" << model.NV << ", NW=" << model.NW << ")\n";
}

std::vector<BasisBudget> parse_budgets(const std::string& text) {
    std::vector<BasisBudget> budgets;
    std::stringstream stream(text);
    std::string item;
    while (std::getline(stream, item, ',')) {
        const std::size_t colon = item.find(':');
        if (colon == std::string::npos) throw ConfigError("--budgets: expected NV_TILDE:NW, got '" + item + "'");
        try {
            std::size_t used_a = 0;
            std::size_t used_b = 0;
            const std::string a = item.substr(0, colon);
            const std::string b = item.substr(colon + 1);
            BasisBudget budget{std::stoi(a, &used_a), std::stoi(b, &used_b)};
            if (used_a != a.size() || used_b != b.size()) throw std::invalid_argument("trailing characters");
            if (budget.NV_tilde < 1 || budget.NW < 0) throw std::invalid_argument("out of range");
            budgets.push_back(budget);
        } catch (const std::exception&) {
            throw ConfigError("--budgets: invalid entry '" + item + "'");
        }
    }
    if (budgets.empty()) throw ConfigError("--budgets: empty list");
    return budgets;
}

std::string gnuplot_script(const std::string& command, const RunConfig& config) {
    const std::string dir = config.io.output_dir;
    std::ostringstream s;
    s << "set datafile separator ','\nset key autotitle columnhead\nset grid\n";
    if (command == "truth") {
        s << "set xlabel 's'\nset ylabel 'P'\n"
          << "plot '" << dir << "/truth_trajectory.csv' using 3:($1==" << config.time.L
          << " ? $6 : 1/0) with lines title 'price at final step'\n";
    } else if (command == "offline") {
        s << "set logscale y\nset xlabel 'k'\nset multiplot layout 1,2\n"
          << "plot '" << dir << "/eps_u.csv' using 1:2 with linespoints title 'eps_u'\n"
          << "plot '" << dir << "/eps_lambda.csv' using 1:2 with linespoints title 'eps_lambda'\n"
          << "unset multiplot\n";
    } else if (command == "online") {
        s << "set xlabel 's'\nset ylabel 'P'\nf = '" << dir << "/comparison.csv'\nplot";
        const std::vector<int> steps{1, std::min(10, config.time.L), config.time.L};
        for (std::size_t k = 0; k < steps.size(); ++k) {
            const int n = steps[k];
            s << (k == 0 ? " " : ", \\\n     ") << "f using 3:(($1==" << n
              << " && strcol(7) eq 'truth') ? $6 : 1/0) with lines title 'truth n=" << n << "', \\\n     "
              << "f using 3:(($1==" << n << " && strcol(7) eq 'reduced') ? $6 : 1/0) with points title 'reduced n="
              << n << "'";
        }
        s << '\n';
    } else if (command == "study") {
        s << "set logscale y\nset xlabel 'NV'\nset ylabel 'ErrLinf'\n"
          << "plot '" << dir << "/study.csv' using 3:4 with linespoints title 'ErrLinf'\n";
    } else {
        throw ConfigError("--gnuplot: no plot for command '" + command + "'");
    }
    return s.str();
}

}  // namespace rbam
