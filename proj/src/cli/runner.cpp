#include "fgpc/cli/runner.hpp"

#include "fgpc/analysis.hpp"
#include "fgpc/continuation.hpp"
#include "fgpc/dynamics.hpp"
#include "fgpc/fgpc.hpp"
#include "fgpc/io.hpp"
#include "fgpc/solution_io.hpp"

#include <Eigen/Core>
#include <boost/version.hpp>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <functional>

namespace fgpc::cli {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

class Run {
public:
    Run(const ExperimentConfig& cfg, fs::path staging, std::ostream& log)
        : cfg_(cfg), staging_(std::move(staging)), log_(log)
    {
    }

    int execute();

private:
    void write(const std::string& name, const std::string& content)
    {
        write_text_file(staging_ / name, content);
        artifacts_.push_back(name);
    }

    // Runs one stage; fgpc errors in optional stages mark the run partial.
    void stage(const std::string& name, const std::function<nlohmann::json()>& body)
    {
        log_ << "[" << name << "] start\n";
        const auto t0 = Clock::now();
        nlohmann::json entry{{"name", name}};
        try {
            nlohmann::json detail = body();
            entry["status"] = detail.value("partial", false) ? "partial" : "ok";
            if (detail.value("partial", false))
                partial_ = true;
            entry["detail"] = std::move(detail);
        } catch (const Error& e) {
            entry["status"] = "failed";
            entry["error"] = e.what();
            partial_ = true;
            log_ << "[" << name << "] failed: " << e.what() << "\n";
        }
        entry["seconds"] = seconds_since(t0);
        log_ << "[" << name << "] " << entry["status"].get<std::string>() << " (" << entry["seconds"].get<double>()
             << " s)\n";
        stages_.push_back(std::move(entry));
    }

    nlohmann::json continuation();
    nlohmann::json solve();
    nlohmann::json mc_oracle();
    nlohmann::json convergence();

    const FgpcSolution& branch() const
    {
        if (cfg_.analyses.branch >= solutions_.size())
            throw Error("requested branch " + std::to_string(cfg_.analyses.branch) + " was not found (" +
                        std::to_string(solutions_.size()) + " solutions)");
        return solutions_[cfg_.analyses.branch];
    }

    const ExperimentConfig& cfg_;
    fs::path staging_;
    std::ostream& log_;
    std::vector<std::string> artifacts_;
    nlohmann::json stages_ = nlohmann::json::array();
    bool partial_ = false;

    std::optional<OdeSystem> system_;
    std::optional<Distribution> dist_;
    std::optional<FgpcProblem> problem_;
    std::vector<FgpcSolution> solutions_;
};

InitialGuessOptions guess_options(const SolverConfig& s)
{
    InitialGuessOptions g;
    g.initial_state = s.initial_state;
    g.periods = s.integration_periods;
    g.rtol = s.integration_rtol;
    if (s.period_hint)
        g.period_hint = *s.period_hint;
    g.anchor_state = s.anchor_state;
    return g;
}

NewtonOptions newton_options(const SolverConfig& s)
{
    NewtonOptions n;
    n.tolerance = s.tolerance;
    n.max_iterations = s.max_iterations;
    return n;
}

nlohmann::json Run::continuation()
{
    const ContinuationRequest& req = *cfg_.analyses.continuation;
    const int H = cfg_.discretization.harmonics;
    const OdeSystem sys = system_->with_forcing_frequency(req.omega_start);
    const FourierGrid grid(H, cfg_.discretization.time_samples.value_or(
                                  FourierGrid::default_samples(H, sys.nonlinearity_degree())),
                           sys.states());
    ContinuationOptions opts = req.options;
    opts.corrector.tolerance = cfg_.solver.tolerance;
    nlohmann::json out{{"branches", nlohmann::json::array()}};
    for (std::size_t i = 0; i < req.theta_values.size(); ++i) {
        const HbProblem problem(sys, grid, req.theta_values[i]);
        const Branch b = continuation_sweep(problem, req.omega_start, req.omega_end, opts);
        const std::string name = "branch_" + std::to_string(i) + ".csv";
        write(name, branch_csv(b));
        nlohmann::json folds = nlohmann::json::array();
        for (const auto& f : b.folds)
            folds.push_back(f.omega);
        nlohmann::json info{{"theta", req.theta_values[i]}, {"file", name}, {"points", b.points.size()},
                            {"fold_frequencies", folds}, {"truncated", b.truncated}};
        if (const auto band = b.multi_solution_band())
            info["multi_solution_band"] = {band->first, band->second};
        if (b.truncated) {
            info["warning"] = b.warning;
            out["partial"] = true;
        }
        out["branches"].push_back(info);
    }
    return out;
}

nlohmann::json Run::solve()
{
    const auto& d = cfg_.discretization;
    problem_ = make_fgpc_problem(*system_, d.harmonics, d.degree, *dist_, d.time_samples, d.quadrature_nodes);
    const FgpcGuess guess = initial_guess(*problem_, guess_options(cfg_.solver), cfg_.solver.zero_guess);
    FgpcSolveOptions so;
    so.newton = newton_options(cfg_.solver);
    if (cfg_.deflation.enabled) {
        so.deflation = cfg_.deflation.config;
        so.max_solutions = cfg_.deflation.max_solutions;
    }
    FgpcSolveResult res = solve_fgpc(*problem_, guess, so);
    if (res.solutions.empty())
        throw Error("no FgPC solution converged");
    if (guess.anchor)
        problem_ = problem_->with_anchor(*guess.anchor);

    nlohmann::json out{{"unknowns", problem_->unknown_count()},
                       {"time_samples", problem_->grid().samples()},
                       {"quadrature_nodes", problem_->quadrature().size()},
                       {"nominal_theta", problem_->nominal_theta()},
                       {"solutions", nlohmann::json::array()},
                       {"failures", nlohmann::json::array()}};
    for (std::size_t i = 0; i < res.solutions.size(); ++i) {
        const std::string name = "solution_" + std::to_string(i) + ".json";
        save_solution(res.solutions[i], staging_ / name);
        artifacts_.push_back(name);
        out["solutions"].push_back({{"file", name},
                                    {"residual_norm", res.solutions[i].residual_norm},
                                    {"iterations", res.solutions[i].iterations},
                                    {"first_harmonic_magnitude", res.solutions[i].first_harmonic_magnitude()}});
    }
    for (const auto& f : res.failures)
        out["failures"].push_back({{"branch", f.initial_index}, {"status", to_string(f.status)}, {"reason", f.reason}});
    if (!res.failures.empty())
        out["partial"] = true;
    solutions_ = std::move(res.solutions);
    return out;
}

nlohmann::json Run::mc_oracle()
{
    const FgpcSolution& sol = branch();
    const McRequest& req = *cfg_.analyses.mc_oracle;
    std::vector<double> thetas = sample(*dist_, static_cast<int>(req.samples), cfg_.seed);
    std::sort(thetas.begin(), thetas.end());
    const std::vector<double> times = period_grid(sol, static_cast<std::size_t>(req.points));

    // Chain seed: the chosen branch at the nominal parameter, walked to the
    // first sample by deterministic solves.
    McOptions mo;
    mo.newton = newton_options(cfg_.solver);
    const double nominal = problem_->nominal_theta();
    mo.seed = HbSeed{nominal, sol.slots_at(nominal), sol.omega_at(nominal), sol.anchor};
    McResult mc = fgpc::mc_oracle(*system_, thetas, sol.harmonics(), sol.samples, mo);

    const bool normalized = sol.self_excited();
    const int nd = sol.states();
    const auto nt = static_cast<Eigen::Index>(times.size());
    const auto t_mc = Clock::now();
    Eigen::MatrixXd mc_mean = Eigen::MatrixXd::Zero(nt, nd);
    std::size_t used = 0;
    for (std::size_t i = 0; i < thetas.size(); ++i) {
        if (!mc.converged[i])
            continue;
        mc_mean += mc_values(mc, i, times, normalized);
        ++used;
    }
    const double mc_eval_seconds = seconds_since(t_mc);
    if (used == 0)
        throw Error("every Monte-Carlo sample failed");
    mc_mean /= static_cast<double>(used);

    std::vector<double> ok_thetas;
    for (std::size_t i = 0; i < thetas.size(); ++i)
        if (mc.converged[i])
            ok_thetas.push_back(thetas[i]);
    const auto t_s = Clock::now();
    Eigen::MatrixXd s_mean(nt, nd);
    for (int c = 0; c < nd; ++c)
        s_mean.col(c) = surrogate_paths(sol, ok_thetas, times, c).colwise().mean().transpose();
    const double surrogate_seconds = seconds_since(t_s);

    std::vector<std::string> header{normalized ? "phase" : "time"};
    for (int c = 0; c < nd; ++c)
        for (const char* n : {"surrogate_mean", "mc_mean", "abs_difference"})
            header.push_back("x" + std::to_string(c) + "_" + n);
    std::string csv = csv_row(header);
    double max_diff = 0.0;
    for (Eigen::Index j = 0; j < nt; ++j) {
        std::vector<double> row{times[static_cast<std::size_t>(j)]};
        for (int c = 0; c < nd; ++c) {
            const double diff = std::abs(s_mean(j, c) - mc_mean(j, c));
            max_diff = std::max(max_diff, diff);
            row.insert(row.end(), {s_mean(j, c), mc_mean(j, c), diff});
        }
        csv += csv_row(row);
    }
    write("mc_difference.csv", csv);

    nlohmann::json report{{"samples", thetas.size()},
                          {"converged", used},
                          {"failures", mc.failures},
                          {"max_abs_mean_difference", max_diff},
                          {"max_iterations_after_first",
                           thetas.size() > 1 ? *std::max_element(mc.iterations.begin() + 1, mc.iterations.end()) : 0}};
    if (cfg_.analyses.marginal) {
        const auto& m = *cfg_.analyses.marginal;
        std::vector<double> mc_vals;
        const double t[] = {m.time};
        for (std::size_t i = 0; i < thetas.size(); ++i)
            if (mc.converged[i])
                mc_vals.push_back(mc_values(mc, i, t, normalized)(0, m.state));
        report["marginal_time"] = m.time;
        report["marginal_ks_distance"] = ks_distance(surrogate_values(sol, ok_thetas, m.time, m.state), mc_vals);
    }
    write("mc_report.json", report.dump(2) + "\n");

    nlohmann::json detail = report;
    detail.erase("failures");
    detail["mc_seconds"] = mc.seconds + mc_eval_seconds;
    detail["surrogate_seconds"] = surrogate_seconds;
    detail["speedup"] = surrogate_seconds > 0.0 ? (mc.seconds + mc_eval_seconds) / surrogate_seconds : 0.0;
    if (!mc.failures.empty())
        detail["partial"] = true;
    return detail;
}

nlohmann::json Run::convergence()
{
    const ConvergenceRequest& req = *cfg_.analyses.convergence_map;
    ConvergenceOptions co;
    co.newton = newton_options(cfg_.solver);
    co.guess = guess_options(cfg_.solver);
    if (!solutions_.empty() && branch().harmonics() == req.reference_harmonics &&
        branch().degree() == req.reference_degree)
        co.reference = branch();
    const ErrorMap map = convergence_map(*system_, *dist_, req.harmonics, req.degrees, req.reference_harmonics,
                                         req.reference_degree, req.samples, cfg_.seed, co);
    write("error_map.csv", error_map_csv(map));
    nlohmann::json out{{"reference", {req.reference_harmonics, req.reference_degree}},
                       {"samples", req.samples},
                       {"absent_cells", map.notes}};
    if (!map.notes.empty())
        out["partial"] = true;
    return out;
}

int Run::execute()
{
    const auto t0 = Clock::now();
    system_ = make_system(cfg_.system.name, cfg_.system.parameters, cfg_.system.uncertain);
    if (cfg_.distribution)
        dist_ = Distribution::from_name(cfg_.distribution->family, cfg_.distribution->parameters);

    const AnalysisRequests& a = cfg_.analyses;
    if (a.continuation)
        stage("continuation", [&] { return continuation(); });
    if (dist_)
        stage("solve", [&] { return solve(); });

    if (!solutions_.empty()) {
        if (a.moments)
            stage("moments", [&] {
                const auto times = period_grid(branch(), static_cast<std::size_t>(a.moments->points));
                write("moments.csv", moments_csv(moments_from_coefficients(branch(), times)));
                return nlohmann::json::object();
            });
        if (a.summary)
            stage("summary", [&] {
                const auto s = sample_summary(branch(), *dist_, a.summary->samples, cfg_.seed,
                                              static_cast<std::size_t>(a.summary->points));
                write("summary.csv", summary_csv(s));
                nlohmann::json d{{"lower_theta", s.lower_theta}, {"upper_theta", s.upper_theta},
                                 {"normalized_time", s.normalized_time}};
                if (s.normalized_time)
                    d["path_alignment"] = "phase anchor: every sample shares the fixed first-harmonic sine "
                                          "coefficient of the anchor state";
                return d;
            });
        if (a.marginal)
            stage("marginal", [&] {
                const auto& m = *a.marginal;
                const Marginal mg = marginal_at(branch(), *dist_, m.samples, cfg_.seed, m.time, m.state, m.bins);
                write("marginal.json", marginal_json(mg).dump(2) + "\n");
                return nlohmann::json{{"skewness", mg.skewness}};
            });
        if (a.coefficient_grid)
            stage("coefficient_grid", [&] {
                write("coefficient_grid.csv", coefficient_grid_csv(fgpc::coefficient_grid(branch())));
                return nlohmann::json::object();
            });
        if (a.phase_portrait)
            stage("phase_portrait", [&] {
                const auto& p = *a.phase_portrait;
                const PhasePortrait pp = phase_portrait(branch(), *dist_, p.samples, cfg_.seed, p.x_state, p.y_state,
                                                        static_cast<std::size_t>(p.points));
                write("phase_portrait.csv", portrait_csv(pp));
                return nlohmann::json{{"lower_theta", pp.lower_theta}, {"upper_theta", pp.upper_theta}};
            });
        if (a.mc_oracle)
            stage("mc_oracle", [&] { return mc_oracle(); });
    } else if (a.need_solution()) {
        partial_ = true;
        log_ << "[analyses] skipped: no solution available\n";
    }
    if (a.convergence_map)
        stage("convergence_map", [&] { return convergence(); });

    // A run where the central solve failed has nothing to analyse.
    for (const auto& s : stages_)
        if (s["name"] == "solve" && s["status"] == "failed")
            throw Error("solve stage failed: " + s["error"].get<std::string>());

    const std::time_t now = std::time(nullptr);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    nlohmann::json manifest{
        {"config", cfg_.source},
        {"seed", cfg_.seed},
        {"versions",
         {{"fgpc", "0.1.0"},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"boost", BOOST_LIB_VERSION},
          {"compiler", __VERSION__}}},
        {"finished_at", stamp},
        {"wall_seconds", seconds_since(t0)},
        {"stages", stages_},
        {"artifacts", artifacts_},
        {"exit_code", partial_ ? ExitCode::partial : ExitCode::success}};
    write_text_file(staging_ / "manifest.json", manifest.dump(2) + "\n");
    return partial_ ? ExitCode::partial : ExitCode::success;
}

} // namespace

int run(const ExperimentConfig& config, const fs::path& output_dir, std::ostream& log)
{
    fs::path staging = output_dir;
    staging += ".partial";
    if (fs::exists(output_dir) && !fs::exists(output_dir / "manifest.json")) {
        log << "error: '" << output_dir.string() << "' exists and is not a previous run directory; refusing to replace it\n";
        return ExitCode::hard_error;
    }
    try {
        fs::remove_all(staging);
        fs::create_directories(staging);
        Run r(config, staging, log);
        const int code = r.execute();
        fs::remove_all(output_dir);
        fs::rename(staging, output_dir);
        log << "artifacts written to " << output_dir.string() << "\n";
        return code;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        std::error_code ec;
        fs::remove_all(staging, ec);
        return ExitCode::hard_error;
    }
}

int run(const fs::path& config_path, const RunOverrides& overrides, std::ostream& log)
{
    ExperimentConfig cfg;
    try {
        cfg = parse_config(load_config_document(config_path));
    } catch (const ConfigError& e) {
        log << e.what() << "\n";
        return ExitCode::hard_error;
    }
    if (overrides.seed)
        cfg.seed = *overrides.seed;
    fs::path out = overrides.output_dir ? *overrides.output_dir
                   : !cfg.output_dir.empty() ? fs::path(cfg.output_dir)
                                             : fs::path("fgpc_output") / config_path.stem();
    return run(cfg, out, log);
}

int validate(const fs::path& config_path, std::ostream& out)
{
    std::vector<Violation> v;
    try {
        v = validate_config(load_config_document(config_path));
    } catch (const ConfigError& e) {
        v = e.violations();
    }
    if (v.empty()) {
        out << "valid\n";
        return 0;
    }
    for (const auto& x : v)
        out << (x.path.empty() ? "/" : x.path) << ": " << x.message << "\n";
    return 1;
}

} // namespace fgpc::cli
