#pragma once

// CSV output and work-precision measurements for the registry problems.

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dde/integrator.hpp"
#include "dde/problems.hpp"

namespace dde::bench {

/// Shortest decimal that parses back to the same double.
std::string format_double(double v);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

/// Plain comma-separated text without quoting; every row must have as many
/// cells as the header. Throws std::runtime_error on malformed input.
CsvTable parse_csv(std::string_view text);
std::string write_csv(const CsvTable& table);

/// Header t,x1,...,xn and one row per sample.
CsvTable solution_table(const std::vector<double>& t, const std::vector<State>& x);

struct WorkPrecisionRecord {
    std::string alg;
    double rtol = 0.0;
    double atol = 0.0;
    std::optional<double> error;
    std::optional<double> time;
    SolveStats stats;
    bool ok = false;
};

CsvTable wpd_table(const std::vector<WorkPrecisionRecord>& records);

struct WpdConfig {
    int samples = 100;
    int repeats = 5;
    int warmup = 1;
    /// atol = rtol * atol_factor unless atols is given (one value, or one
    /// per rtol).
    double atol_factor = 1e-3;
    std::vector<double> atols;
    std::optional<double> tf_override;
};

using Reference = std::function<State(double)>;

/// Analytic solution when the registry has one, otherwise a tight solve
/// (rtol 1e-12, atol 1e-14). Throws std::runtime_error if that solve fails.
Reference make_reference(const problems::NamedProblem& np, double tf);

/// Root mean square of x - ref over `samples` equally spaced points on
/// [t0, tf], all components pooled.
double sample_error(const DDESolution& sol, const Reference& ref, int samples);

std::vector<WorkPrecisionRecord> run_wpd(const problems::NamedProblem& np, const std::vector<Method>& methods,
                                         const std::vector<double>& rtols, const WpdConfig& cfg = {});

struct AndersonRow {
    std::size_t depth = 0;
    SolveStats stats;
    ReturnCode retcode = ReturnCode::Success;
};

/// two_delay_linear at its recommended settings once per depth.
std::vector<AndersonRow> anderson_report(double rtol, const std::vector<double>& atol,
                                         const std::vector<std::size_t>& depths);

}  // namespace dde::bench
