#pragma once

#include <stdexcept>
#include <string>

namespace squeeze {

enum class ErrorCode {
    invalid_argument,
    degenerate_child,
    overlap,
    empty_set,
    pole_on_boundary,
    disconnected_domain,
    ill_conditioned,
    residual_above_tol,
    base_is_point,
    truncation_not_converged,
    no_escape,
    unresolved_topology,
    branch_merge,
    schedule_too_aggressive,
    measure_bound_violated,
    certification_failed,
    config_error,
    io_error,
};

inline const char* to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::degenerate_child: return "degenerate-child";
    case ErrorCode::overlap: return "overlap";
    case ErrorCode::empty_set: return "empty-set";
    case ErrorCode::pole_on_boundary: return "pole-on-boundary";
    case ErrorCode::disconnected_domain: return "disconnected-domain";
    case ErrorCode::ill_conditioned: return "ill-conditioned";
    case ErrorCode::residual_above_tol: return "residual-above-tol";
    case ErrorCode::base_is_point: return "base-component-is-point";
    case ErrorCode::truncation_not_converged: return "truncation-not-converged";
    case ErrorCode::no_escape: return "no-escape-within-cap";
    case ErrorCode::unresolved_topology: return "unresolved-topology";
    case ErrorCode::branch_merge: return "branch-merge";
    case ErrorCode::schedule_too_aggressive: return "schedule-too-aggressive";
    case ErrorCode::measure_bound_violated: return "measure-bound-violated";
    case ErrorCode::certification_failed: return "certification-failed";
    case ErrorCode::config_error: return "config-error";
    case ErrorCode::io_error: return "io-error";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
    {
    }

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace squeeze
