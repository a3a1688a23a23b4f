// Command-line front end: solve registry problems, work-precision tables,
// Anderson on/off counters.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dde/bench.hpp"
#include "dde/integrator.hpp"
#include "dde/problems.hpp"

namespace {

constexpr int exit_solver_failure = 1;
constexpr int exit_usage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double parse_number(const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw UsageError("not a number: '" + s + "'");
    }
    if (used != s.size()) throw UsageError("not a number: '" + s + "'");
    return v;
}

std::vector<double> parse_numbers(const std::string& s) {
    std::vector<double> out;
    for (const auto& item : split_commas(s)) out.push_back(parse_number(item));
    return out;
}

dde::Method parse_method_or_throw(const std::string& name) {
    const auto m = dde::parse_method(name);
    if (!m) throw dde::DdeError(dde::ErrorCode::UnknownMethod, name);
    return *m;
}

std::vector<double> saveat_grid(const std::string& spec, double t0, double tf) {
    const bool is_count = spec.find_first_of(",.eE") == std::string::npos;
    if (is_count) {
        const double count = parse_number(spec);
        if (count < 2) throw UsageError("--saveat count must be at least 2");
        const auto n = static_cast<std::size_t>(count);
        std::vector<double> ts(n);
        for (std::size_t k = 0; k < n; ++k) ts[k] = t0 + (tf - t0) * static_cast<double>(k) / static_cast<double>(n - 1);
        ts.back() = tf;
        return ts;
    }
    return parse_numbers(spec);
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw UsageError("cannot open " + path);
    f << text;
}

struct SolveArgs {
    std::string problem;
    std::string method;
    std::string rtol;
    std::string atol;
    std::string saveat = "500";
    std::string out;
    std::optional<double> tf_override;
    std::size_t anderson_depth = 0;
    bool constrained = false;
    std::string add_tstops;
};

int cmd_solve(const SolveArgs& a) {
    dde::problems::NamedProblem np = dde::problems::make_problem(a.problem);
    if (a.tf_override) np.problem.tf = *a.tf_override;
    const dde::Method method = a.method.empty() ? np.method : parse_method_or_throw(a.method);

    dde::SolverOptions opts;
    opts.rtol = a.rtol.empty() ? np.rtol : parse_number(a.rtol);
    opts.atol = a.atol.empty() ? np.atol : parse_numbers(a.atol);
    opts.anderson_depth = a.anderson_depth;
    opts.constrained = a.constrained;
    opts.tstops = np.tstops;
    for (double s : parse_numbers(a.add_tstops)) opts.tstops.push_back(s);
    opts.saveat = saveat_grid(a.saveat, np.problem.t0, np.problem.tf);

    const dde::DDESolution sol = dde::solve(np.problem, method, opts);
    if (!sol.success()) {
        std::cerr << "solver failed: " << dde::to_string(sol.retcode) << " at t = " << sol.t.back() << "\n";
        return exit_solver_failure;
    }
    write_text(a.out, dde::bench::write_csv(dde::bench::solution_table(sol.saveat_t, sol.saveat_x)));
    return 0;
}

struct WpdArgs {
    std::string problem;
    std::string methods = "rk4,tsit5,rosenbrock23";
    std::string rtols = "1e-4,1e-6,1e-8";
    std::string atols;
    std::string out;
    std::optional<double> tf_override;
    int repeats = 5;
};

int cmd_wpd(const WpdArgs& a) {
    const dde::problems::NamedProblem np = dde::problems::make_problem(a.problem);
    std::vector<dde::Method> methods;
    for (const auto& name : split_commas(a.methods)) methods.push_back(parse_method_or_throw(name));
    const std::vector<double> rtols = parse_numbers(a.rtols);
    if (rtols.empty()) throw UsageError("empty tolerance grid");
    if (methods.empty()) throw UsageError("no methods given");

    dde::bench::WpdConfig cfg;
    cfg.tf_override = a.tf_override;
    cfg.repeats = a.repeats;
    cfg.atols = parse_numbers(a.atols);
    if (!cfg.atols.empty() && cfg.atols.size() != 1 && cfg.atols.size() != rtols.size()) {
        throw UsageError("--atol needs one value or one per --rtol entry");
    }
    const auto records = dde::bench::run_wpd(np, methods, rtols, cfg);
    write_text(a.out, dde::bench::write_csv(dde::bench::wpd_table(records)));
    for (const auto& r : records) {
        if (!r.ok) return exit_solver_failure;
    }
    return 0;
}

struct AndersonArgs {
    double rtol = 1e-3;
    std::string atol = "1e-6";
    std::string depths = "3";
};

int cmd_anderson(const AndersonArgs& a) {
    std::vector<std::size_t> depths{0};
    for (double d : parse_numbers(a.depths)) {
        if (d < 0 || d != static_cast<double>(static_cast<std::size_t>(d))) {
            throw UsageError("depths must be nonnegative integers");
        }
        if (d > 0) depths.push_back(static_cast<std::size_t>(d));
    }
    const auto rows = dde::bench::anderson_report(a.rtol, parse_numbers(a.atol), depths);
    std::printf("%-6s %10s %10s %10s  %s\n", "depth", "nf", "nfpiter", "nfpfail", "retcode");
    int rc = 0;
    for (const auto& r : rows) {
        std::printf("%-6zu %10llu %10llu %10llu  %s\n", r.depth, static_cast<unsigned long long>(r.stats.n_rhs_evals),
                    static_cast<unsigned long long>(r.stats.n_fp_iters),
                    static_cast<unsigned long long>(r.stats.n_fp_failures), dde::to_string(r.retcode).c_str());
        if (r.retcode != dde::ReturnCode::Success) rc = exit_solver_failure;
    }
    return rc;
}

int cmd_list() {
    std::cout << "problems:\n";
    for (const auto& id : dde::problems::problem_ids()) {
        const auto np = dde::problems::make_problem(id);
        std::cout << "  " << id << "  " << np.description << "\n";
    }
    std::cout << "methods:\n";
    for (dde::Method m : dde::all_methods()) std::cout << "  " << dde::method_info(m).name << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Delay differential equation solver"};
    app.require_subcommand(1);

    SolveArgs solve_args;
    auto* solve = app.add_subcommand("solve", "Solve a registry problem and write t,x1..xn as CSV");
    solve->add_option("problem", solve_args.problem, "Problem id")->required();
    solve->add_option("--method", solve_args.method, "rk4, tsit5 or rosenbrock23 (default: recommended)");
    solve->add_option("--rtol", solve_args.rtol, "Relative tolerance");
    solve->add_option("--atol", solve_args.atol, "Absolute tolerance, scalar or comma-separated per component");
    solve->add_option("--saveat", solve_args.saveat, "Number of equally spaced points, or comma-separated times")
        ->capture_default_str();
    solve->add_option("--out", solve_args.out, "Output file (default: stdout)");
    solve->add_option("--tf-override", solve_args.tf_override, "Replace the final time");
    solve->add_option("--anderson-depth", solve_args.anderson_depth, "Anderson window for fixed-point steps");
    solve->add_flag("--constrained", solve_args.constrained, "Cap dt at the smallest constant lag");
    solve->add_option("--add-tstops", solve_args.add_tstops, "Comma-separated extra stop times");

    WpdArgs wpd_args;
    auto* wpd = app.add_subcommand("wpd", "Work-precision table as CSV");
    wpd->add_option("problem", wpd_args.problem, "Problem id")->required();
    wpd->add_option("--method", wpd_args.methods, "Comma-separated method ids")->capture_default_str();
    wpd->add_option("--rtol", wpd_args.rtols, "Comma-separated relative tolerances")->capture_default_str();
    wpd->add_option("--atol", wpd_args.atols, "One absolute tolerance or one per rtol (default: rtol * 1e-3)");
    wpd->add_option("--out", wpd_args.out, "Output file (default: stdout)");
    wpd->add_option("--tf-override", wpd_args.tf_override, "Replace the final time");
    wpd->add_option("--repeats", wpd_args.repeats, "Timed runs per cell")->capture_default_str()->check(
        CLI::PositiveNumber);

    AndersonArgs anderson_args;
    auto* anderson = app.add_subcommand("anderson-report", "Counters for two_delay_linear with and without Anderson");
    anderson->add_option("--rtol", anderson_args.rtol, "Relative tolerance")->capture_default_str();
    anderson->add_option("--atol", anderson_args.atol, "Absolute tolerance")->capture_default_str();
    anderson->add_option("--anderson-depth", anderson_args.depths, "Comma-separated depths compared against 0")
        ->capture_default_str();

    auto* list = app.add_subcommand("list", "Print problem and method ids");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_usage;
    }

    try {
        if (*solve) return cmd_solve(solve_args);
        if (*wpd) return cmd_wpd(wpd_args);
        if (*anderson) return cmd_anderson(anderson_args);
        if (*list) return cmd_list();
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const dde::DdeError& e) {
        std::cerr << "error: " << e.what() << "\n";
        switch (e.code()) {
            case dde::ErrorCode::UnknownProblem:
            case dde::ErrorCode::UnknownMethod:
            case dde::ErrorCode::InvalidOptions:
            case dde::ErrorCode::DimensionMismatch: return exit_usage;
            default: return exit_solver_failure;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_solver_failure;
    }
    return exit_usage;
}
