#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "hypgraph/cli.hpp"
#include "hypgraph/report.hpp"

namespace hypgraph {

namespace {

namespace fs = std::filesystem;

struct CommonFlags {
    std::string config_path;
    std::string out_dir;
    long seed = -1;
    bool quiet = false;
};

class Failure : public std::runtime_error {
public:
    Failure(int code, std::string stage, const std::string& what)
        : std::runtime_error(what), code_(code), stage_(std::move(stage)) {}
    int code() const { return code_; }
    const std::string& stage() const { return stage_; }

private:
    int code_;
    std::string stage_;
};

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Failure(kExitConfig, "output", "cannot write " + path.string());
    out << text;
}

void write_error_record(const std::string& dir, int code, const std::string& stage,
                        const std::string& message) {
    const Json rec = {{"exit_code", code}, {"stage", stage}, {"message", message}};
    std::cerr << rec.dump() << "\n";
    if (dir.empty()) return;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) return;
    std::ofstream out(fs::path(dir) / "error.json", std::ios::binary);
    if (out) out << rec.dump(2) << "\n";
}

RunConfig load_config(const CommonFlags& flags) {
    ConfigDocument doc;
    if (!flags.config_path.empty()) {
        std::ifstream in(flags.config_path);
        if (!in) throw ConfigError("cannot open config file " + flags.config_path);
        std::ostringstream os;
        os << in.rdbuf();
        doc = parse_config_text(os.str());
    }
    apply_env_overrides(doc, process_environment());
    RunConfig rc = run_config_from(doc);
    if (!flags.out_dir.empty()) rc.output.directory = flags.out_dir;
    if (flags.seed >= 0) {
        rc.seed = static_cast<std::uint64_t>(flags.seed);
        rc.diagnostics.seed = rc.seed;
    }
    return rc;
}

void emit_pair(const RunConfig& rc, const std::string& stem, const Json& j,
               const std::string& table) {
    const fs::path dir(rc.output.directory);
    if (rc.output.structured) write_file(dir / (stem + ".json"), j.dump(2) + "\n");
    if (rc.output.table) write_file(dir / (stem + ".txt"), table);
}

void write_solution(const RunConfig& rc, const GraphField& field, const std::string& stem) {
    const fs::path dir(rc.output.directory);
    write_file(dir / (stem + ".dat"), solution_text(field, rc));
    if (rc.output.plot_data) write_file(dir / (stem + "_plot.dat"), plot_text(field, rc));
}

void prepare_output(const RunConfig& rc) {
    std::error_code ec;
    fs::create_directories(rc.output.directory, ec);
    if (ec) throw Failure(kExitConfig, "output", "cannot create " + rc.output.directory);
    write_file(fs::path(rc.output.directory) / "run_config.ini", render_config(rc));
}

void write_report(const RunConfig& rc, const DiagnosticsReport& report) {
    emit_pair(rc, "diagnostics", report_to_json(report), emit_report(report, ReportFormat::Table));
}

std::string summary(const DiagnosticsReport& r) {
    std::ostringstream os;
    auto flag = [](bool b) { return b ? "pass" : "FAIL"; };
    if (r.c0)
        os << "c0: u in [" << format_double(r.c0->u_min) << ", " << format_double(r.c0->u_max)
           << "], barrier " << format_double(r.c0->barrier) << " " << flag(r.c0->pass) << "\n";
    if (r.gradient)
        os << "gradient: omega_sup " << format_double(r.gradient->omega_sup) << " <= "
           << format_double(r.gradient->limit) << " " << flag(r.gradient->pass) << "\n";
    if (r.second_order) os << "second order: " << flag(r.second_order->pass) << "\n";
    if (r.identities)
        os << "identities: max residual "
           << format_double(std::max({r.identities->max_cotu, r.identities->max_g,
                                      r.identities->max_hessian, r.identities->max_gradient}))
           << " " << flag(r.identities->pass) << "\n";
    os << "all checks: " << flag(r.all_pass()) << "\n";
    return os.str();
}

int cmd_solve(const CommonFlags& flags) {
    RunConfig rc = load_config(flags);
    rc.validate();
    prepare_output(rc);
    auto grid = std::make_shared<const Grid>(build_grid(rc.domain, rc.resolution));
    const HomotopyOutcome out = homotopy_solve(rc.solve, grid);
    emit_pair(rc, "trace", trace_to_json(out.trace), emit_trace(out.trace, ReportFormat::Table));
    if (!out.trace.completed || !out.result.converged) {
        write_solution(rc, out.result.field, "solution_partial");
        throw Failure(kExitConvergence, "homotopy", out.trace.failure.empty()
                                                        ? "final Newton solve did not converge"
                                                        : out.trace.failure);
    }
    write_solution(rc, out.result.field, "solution");
    const DiagnosticsReport report = diagnose(out.result, rc.solve, rc.diagnostics);
    write_report(rc, report);
    if (!flags.quiet) std::cout << summary(report);
    if (!report.all_pass())
        throw Failure(kExitVerification, "verification", "one or more diagnostics failed");
    return kExitOk;
}

int cmd_continue(const CommonFlags& flags, const std::string& schedule_text) {
    RunConfig rc = load_config(flags);
    if (!schedule_text.empty()) {
        ConfigDocument doc;
        doc["problem"]["eps_schedule"] = schedule_text;
        rc.eps_schedule = run_config_from(doc).eps_schedule;
    }
    if (rc.eps_schedule.empty()) rc.eps_schedule = {rc.solve.eps};
    rc.solve.eps = rc.eps_schedule.front();
    rc.validate();
    prepare_output(rc);
    auto grid = std::make_shared<const Grid>(build_grid(rc.domain, rc.resolution));
    const EpsilonOutcome out =
        epsilon_continuation(rc.solve, [&](double) { return grid; }, rc.eps_schedule);
    emit_pair(rc, "trace", trace_to_json(out.trace), emit_trace(out.trace, ReportFormat::Table));
    for (std::size_t k = 0; k < out.stages.size(); ++k) {
        const EpsilonStage& s = out.stages[k];
        RunConfig stage_rc = rc;
        stage_rc.solve.eps = s.eps;
        stage_rc.eps_schedule.clear();
        const bool ok = s.outcome.trace.completed && s.outcome.result.converged;
        write_solution(stage_rc, s.outcome.result.field,
                       (ok ? "solution_stage" : "solution_partial_stage") + std::to_string(k));
        emit_pair(stage_rc, "trace_stage" + std::to_string(k), trace_to_json(s.outcome.trace),
                  emit_trace(s.outcome.trace, ReportFormat::Table));
    }
    if (!out.trace.completed) throw Failure(kExitConvergence, "eps-continuation", out.trace.failure);
    const EpsilonStage& last = out.stages.back();
    SolveConfig finest = rc.solve;
    finest.eps = last.eps;
    DiagnosticsReport report = diagnose(last.outcome.result, finest, rc.diagnostics);
    report.second_order = verify_second_order(out, rc.solve.sigma);
    write_report(rc, report);
    if (!flags.quiet) std::cout << summary(report);
    if (!report.all_pass())
        throw Failure(kExitVerification, "verification", "one or more diagnostics failed");
    return kExitOk;
}

int cmd_verify(const CommonFlags& flags, const std::string& solution_path) {
    if (solution_path.empty()) throw ConfigError("verify needs --solution");
    StoredSolution stored = load_solution(solution_path);
    RunConfig rc = stored.config;
    if (!flags.config_path.empty()) {
        const RunConfig other = load_config(flags);
        rc.output = other.output;
    }
    if (!flags.out_dir.empty()) rc.output.directory = flags.out_dir;
    if (flags.seed >= 0) {
        rc.seed = static_cast<std::uint64_t>(flags.seed);
        rc.diagnostics.seed = rc.seed;
    }
    rc.validate();
    prepare_output(rc);
    SolveResult result;
    result.field = apply_dirichlet(stored.field, rc.solve.eps);
    result.sigma = rc.solve.sigma;
    const Eigen::VectorXd r = residual(result.field, rc.solve);
    result.residual_sup = r.cwiseAbs().maxCoeff();
    result.converged = result.residual_sup <= rc.solve.newton_tol;
    const DiagnosticsReport report = diagnose(result, rc.solve, rc.diagnostics);
    write_report(rc, report);
    if (!flags.quiet) std::cout << summary(report);
    if (!result.converged)
        throw Failure(kExitVerification, "verification",
                      "stored field is not a solution: residual " + format_double(result.residual_sup));
    if (!report.all_pass())
        throw Failure(kExitVerification, "verification", "one or more diagnostics failed");
    return kExitOk;
}

struct BarrierArgs {
    double ell = 1.0, diam = 2.0, eps = 0.1, sigma = 0.5;
    double ell_z = -1.0, dist_z = -1.0;
    double zn = -1.0, r2 = -1.0;
};

int cmd_barriers(const CommonFlags& flags, const BarrierArgs& a) {
    std::ostringstream os;
    try {
        const auto [lo, hi] = barrier_radius_bracket(a.ell, a.diam, a.eps, a.sigma);
        const double ell_z = a.ell_z > 0.0 ? a.ell_z : a.ell;
        const double dist_z = a.dist_z > 0.0 ? a.dist_z : 0.5 * a.diam;
        const double zn = a.zn >= 0.0 ? a.zn : a.ell * std::cos(a.eps);
        const double r2 = a.r2 > 0.0 ? a.r2 : std::numeric_limits<double>::infinity();
        os << "barrier_radius = " << format_double(barrier_ball_radius(a.ell, a.diam, a.eps, a.sigma))
           << "\nradius_bracket = " << format_double(lo) << ", " << format_double(hi)
           << "\nu_bar = " << format_double(barrier_upper_bound(a.ell, a.diam, a.eps, a.sigma))
           << "\nlower_bound = " << format_double(barrier_lower_bound(ell_z, dist_z, a.eps, a.sigma))
           << "\nlower_bound_at = " << format_double(ell_z) << ", " << format_double(dist_z)
           << "\nc1 = " << format_double(boundary_gradient_upper(zn, r2, a.eps, a.sigma))
           << "\nc1_at = " << format_double(zn) << ", " << format_double(r2) << "\n";
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    if (!flags.quiet) std::cout << os.str();
    if (!flags.out_dir.empty()) {
        std::error_code ec;
        fs::create_directories(flags.out_dir, ec);
        write_file(fs::path(flags.out_dir) / "barriers.txt", os.str());
    }
    return kExitOk;
}

}  // namespace

int cli_main(int argc, char** argv) {
    CLI::App app{"Geodesic graphs of prescribed hyperbolic curvature: solve and verify"};
    app.require_subcommand(1);
    CommonFlags flags;
    app.add_option("--config", flags.config_path, "run configuration file");
    app.add_option("--out", flags.out_dir, "output directory");
    app.add_option("--seed", flags.seed, "sampling seed")->check(CLI::NonNegativeNumber);
    app.add_flag("--quiet", flags.quiet, "no summary on stdout");
    app.fallthrough();

    auto* solve = app.add_subcommand("solve", "t-homotopy solve and diagnostics");
    std::string schedule;
    auto* cont = app.add_subcommand("continue-eps", "eps-continuation with trend checks");
    cont->add_option("--schedule", schedule, "decreasing eps list, e.g. 0.2,0.1,0.05");
    std::string solution_path;
    auto* verify = app.add_subcommand("verify", "re-run diagnostics on a stored solution");
    verify->add_option("--solution", solution_path, "solution file")->required();
    BarrierArgs ba;
    auto* barriers = app.add_subcommand("barriers", "closed-form barrier bounds");
    barriers->add_option("--ell", ba.ell, "height of the enclosing ball center");
    barriers->add_option("--diam", ba.diam, "domain diameter");
    barriers->add_option("--eps", ba.eps, "boundary angle");
    barriers->add_option("--sigma", ba.sigma, "curvature");
    barriers->add_option("--ell-z", ba.ell_z, "height of an interior point");
    barriers->add_option("--dist-z", ba.dist_z, "its distance to the boundary");
    barriers->add_option("--zn", ba.zn, "boundary height for C1");
    barriers->add_option("--r2", ba.r2, "exterior sphere radius (default infinite)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        if (code == 0) return kExitOk;
        write_error_record(flags.out_dir, kExitConfig, "arguments", e.what());
        return kExitConfig;
    }

    std::string out_dir = flags.out_dir;
    try {
        if (*solve) return cmd_solve(flags);
        if (*cont) return cmd_continue(flags, schedule);
        if (*verify) return cmd_verify(flags, solution_path);
        return cmd_barriers(flags, ba);
    } catch (const Failure& f) {
        if (out_dir.empty()) {
            try {
                out_dir = load_config(flags).output.directory;
            } catch (const std::exception&) {
            }
        }
        write_error_record(out_dir, f.code(), f.stage(), f.what());
        return f.code();
    } catch (const ConfigError& e) {
        write_error_record(out_dir, kExitConfig, "config", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        write_error_record(out_dir, kExitConfig, "runtime", e.what());
        return kExitConfig;
    }
}

}  // namespace hypgraph
