#include "dde/types.hpp"

namespace dde {

std::string to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::NonPositiveLag: return "NonPositiveLag";
        case ErrorCode::EmptyTimeSpan: return "EmptyTimeSpan";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::InvalidOptions: return "InvalidOptions";
        case ErrorCode::EmptySolution: return "EmptySolution";
        case ErrorCode::NonContiguous: return "NonContiguous";
        case ErrorCode::SingularMatrix: return "SingularMatrix";
        case ErrorCode::NegativeDelay: return "NegativeDelay";
        case ErrorCode::OutOfRange: return "OutOfRange";
        case ErrorCode::UnknownProblem: return "UnknownProblem";
        case ErrorCode::UnknownMethod: return "UnknownMethod";
    }
    return "Unknown";
}

State DDEProblem::initial_state() const {
    if (x0) return *x0;
    return history(params, t0);
}

DDEProblem validate_problem(DDEProblem prob) {
    if (!prob.rhs || !prob.history) {
        throw DdeError(ErrorCode::InvalidOptions, "rhs and history are required");
    }
    if (!(prob.t0 < prob.tf)) {
        throw DdeError(ErrorCode::EmptyTimeSpan, "t0 must be strictly less than tf");
    }
    for (double lag : prob.constant_lags) {
        if (!(lag > 0.0)) throw DdeError(ErrorCode::NonPositiveLag, "constant lag must be positive");
    }
    if (prob.order_of_discontinuity < 0) {
        throw DdeError(ErrorCode::InvalidOptions, "order_of_discontinuity must be nonnegative");
    }

    const std::size_t n = prob.history(prob.params, prob.t0).size();
    if (n == 0) throw DdeError(ErrorCode::DimensionMismatch, "history has zero dimension");
    if (prob.history(prob.params, prob.t0).size() != n) {
        throw DdeError(ErrorCode::DimensionMismatch, "history dimension is not stable");
    }
    if (prob.x0 && prob.x0->size() != n) {
        throw DdeError(ErrorCode::DimensionMismatch, "x0 does not match history dimension");
    }
    prob.dim = n;
    return prob;
}

void validate_options(const SolverOptions& opts, std::size_t dim) {
    auto fail = [](const char* msg) { throw DdeError(ErrorCode::InvalidOptions, msg); };
    if (!(opts.rtol > 0.0)) fail("rtol must be positive");
    if (opts.atol.empty() || (opts.atol.size() != 1 && opts.atol.size() != dim)) {
        fail("atol must be a scalar or match the state dimension");
    }
    bool any_positive = false;
    for (double a : opts.atol) {
        if (!(a >= 0.0)) fail("atol components must be nonnegative");
        any_positive = any_positive || a > 0.0;
    }
    if (!any_positive && !(opts.rtol > 0.0)) fail("tolerances are all zero");
    if (opts.fp_max_iters < 1) fail("fp_max_iters must be >= 1");
    if (!(opts.fp_tol_factor > 0.0)) fail("fp_tol_factor must be positive");
    if (opts.disc_scan_points < 2) fail("disc_scan_points must be >= 2");
    if (!(opts.anderson_damping > 0.0 && opts.anderson_damping <= 1.0)) fail("anderson damping must be in (0,1]");
    if (opts.dt_init && !(*opts.dt_init > 0.0)) fail("dt_init must be positive");
    if (opts.max_steps == 0) fail("max_steps must be positive");
}

}  // namespace dde
