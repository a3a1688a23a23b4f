#include "dde/bench.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace dde::bench {

std::string format_double(double v) {
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return {buf.data(), res.ptr};
}

namespace {

std::vector<std::string> split_line(std::string_view line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            cells.emplace_back(line.substr(start));
            return cells;
        }
        cells.emplace_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

}  // namespace

CsvTable parse_csv(std::string_view text) {
    CsvTable table;
    bool first = true;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        auto cells = split_line(line);
        if (first) {
            table.header = std::move(cells);
            first = false;
            continue;
        }
        if (cells.size() != table.header.size()) {
            throw std::runtime_error("csv row has " + std::to_string(cells.size()) + " cells, header has " +
                                     std::to_string(table.header.size()));
        }
        table.rows.push_back(std::move(cells));
    }
    if (first) throw std::runtime_error("csv has no header");
    return table;
}

std::string write_csv(const CsvTable& table) {
    std::string out;
    auto emit = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            out += cells[i];
        }
        out += '\n';
    };
    emit(table.header);
    for (const auto& row : table.rows) emit(row);
    return out;
}

CsvTable solution_table(const std::vector<double>& t, const std::vector<State>& x) {
    CsvTable table;
    table.header.emplace_back("t");
    const std::size_t n = x.empty() ? 0 : x.front().size();
    for (std::size_t i = 0; i < n; ++i) table.header.push_back("x" + std::to_string(i + 1));
    for (std::size_t k = 0; k < t.size(); ++k) {
        std::vector<std::string> row{format_double(t[k])};
        for (double v : x[k]) row.push_back(format_double(v));
        table.rows.push_back(std::move(row));
    }
    return table;
}

CsvTable wpd_table(const std::vector<WorkPrecisionRecord>& records) {
    CsvTable table;
    table.header = {"alg", "rtol", "atol", "error", "time", "nf", "naccept", "nreject", "nfpiter", "nfpfail", "status"};
    for (const auto& r : records) {
        table.rows.push_back({
            r.alg,
            format_double(r.rtol),
            format_double(r.atol),
            r.error ? format_double(*r.error) : "",
            r.time ? format_double(*r.time) : "",
            std::to_string(r.stats.n_rhs_evals),
            std::to_string(r.stats.n_accepted),
            std::to_string(r.stats.n_rejected),
            std::to_string(r.stats.n_fp_iters),
            std::to_string(r.stats.n_fp_failures),
            r.ok ? "ok" : "failed",
        });
    }
    return table;
}

Reference make_reference(const problems::NamedProblem& np, double tf) {
    if (np.reference == problems::ReferenceKind::Analytic && np.analytic) return np.analytic;

    DDEProblem prob = np.problem;
    prob.tf = tf;
    SolverOptions opts;
    opts.rtol = 1e-12;
    opts.atol = {1e-14};
    opts.tstops = np.tstops;
    // Stiff problems stay on their implicit method; anything else gets the
    // highest-order explicit pair.
    const Method method = method_info(np.method).implicit ? np.method : Method::Tsit5;
    auto sol = std::make_shared<DDESolution>(solve(std::move(prob), method, opts));
    if (!sol->success()) throw std::runtime_error("reference solve failed: " + to_string(sol->retcode));
    return [sol](double t) { return sol->eval(t); };
}

double sample_error(const DDESolution& sol, const Reference& ref, int samples) {
    const double t0 = sol.t0();
    const double tf = sol.tf();
    double acc = 0.0;
    std::size_t count = 0;
    for (int k = 0; k < samples; ++k) {
        const double t = samples == 1 ? tf : t0 + (tf - t0) * k / (samples - 1);
        const State x = sol.eval(t);
        const State r = ref(t);
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double d = x[i] - r[i];
            acc += d * d;
            ++count;
        }
    }
    return std::sqrt(acc / static_cast<double>(count));
}

std::vector<WorkPrecisionRecord> run_wpd(const problems::NamedProblem& np, const std::vector<Method>& methods,
                                         const std::vector<double>& rtols, const WpdConfig& cfg) {
    DDEProblem prob = np.problem;
    if (cfg.tf_override) prob.tf = *cfg.tf_override;
    const Reference ref = make_reference(np, prob.tf);

    if (!cfg.atols.empty() && cfg.atols.size() != 1 && cfg.atols.size() != rtols.size()) {
        throw DdeError(ErrorCode::InvalidOptions, "atol grid must have one entry or one per rtol");
    }
    std::vector<WorkPrecisionRecord> out;
    for (Method m : methods) {
        for (std::size_t j = 0; j < rtols.size(); ++j) {
            const double rtol = rtols[j];
            WorkPrecisionRecord rec;
            rec.alg = std::string(method_info(m).name);
            rec.rtol = rtol;
            if (cfg.atols.empty()) {
                rec.atol = rtol * cfg.atol_factor;
            } else {
                rec.atol = cfg.atols.size() == 1 ? cfg.atols[0] : cfg.atols[j];
            }
            SolverOptions opts;
            opts.rtol = rtol;
            opts.atol = {rec.atol};
            opts.tstops = np.tstops;

            try {
                for (int w = 0; w < cfg.warmup; ++w) (void)solve(prob, m, opts);
                std::vector<double> times;
                DDESolution sol;
                for (int r = 0; r < std::max(cfg.repeats, 1); ++r) {
                    const auto start = std::chrono::steady_clock::now();
                    sol = solve(prob, m, opts);
                    const auto stop = std::chrono::steady_clock::now();
                    times.push_back(std::chrono::duration<double>(stop - start).count());
                }
                rec.stats = sol.stats;
                if (sol.success()) {
                    std::sort(times.begin(), times.end());
                    const std::size_t mid = times.size() / 2;
                    rec.time = times.size() % 2 ? times[mid] : 0.5 * (times[mid - 1] + times[mid]);
                    rec.error = sample_error(sol, ref, cfg.samples);
                    rec.ok = true;
                }
            } catch (const DdeError&) {
                rec.ok = false;
            }
            out.push_back(std::move(rec));
        }
    }
    return out;
}

std::vector<AndersonRow> anderson_report(double rtol, const std::vector<double>& atol,
                                         const std::vector<std::size_t>& depths) {
    const problems::NamedProblem np = problems::two_delay_linear();
    std::vector<AndersonRow> rows;
    for (std::size_t depth : depths) {
        SolverOptions opts;
        opts.rtol = rtol;
        opts.atol = atol;
        opts.anderson_depth = depth;
        const DDESolution sol = solve(np.problem, np.method, opts);
        rows.push_back({depth, sol.stats, sol.retcode});
    }
    return rows;
}

}  // namespace dde::bench
