#pragma once

#include <stdexcept>
#include <string>

namespace logconn {

enum class ErrorCode {
    division_by_zero,
    context_mismatch,
    order_not_dividing,
    unsplit_denominator,
    invalid_connection,
    not_an_isomorphism,
    action_not_semisimple,
    not_equivariant,
    weights_not_split,
    denominator_mismatch,
    bundle_not_trivial,
    preimage_not_in_field,
    eigenspace_dimension_mismatch,
    residue_not_compatible,
    criterion_violated,
    invalid_argument,
    syntax_error,
};

inline const char* error_code_name(ErrorCode code)
{
    switch (code) {
    case ErrorCode::division_by_zero: return "division-by-zero";
    case ErrorCode::context_mismatch: return "context-mismatch";
    case ErrorCode::order_not_dividing: return "order-not-dividing";
    case ErrorCode::unsplit_denominator: return "unsplit-denominator";
    case ErrorCode::invalid_connection: return "invalid-connection";
    case ErrorCode::not_an_isomorphism: return "not-an-isomorphism";
    case ErrorCode::action_not_semisimple: return "action-not-semisimple";
    case ErrorCode::not_equivariant: return "not-equivariant";
    case ErrorCode::weights_not_split: return "weights-not-split";
    case ErrorCode::denominator_mismatch: return "denominator-mismatch";
    case ErrorCode::bundle_not_trivial: return "bundle-not-trivial";
    case ErrorCode::preimage_not_in_field: return "preimage-not-in-field";
    case ErrorCode::eigenspace_dimension_mismatch: return "eigenspace-dimension-mismatch";
    case ErrorCode::residue_not_compatible: return "residue-not-compatible";
    case ErrorCode::criterion_violated: return "criterion-violated";
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::syntax_error: return "syntax-error";
    }
    return "unknown";
}

/// Failure of a mathematical precondition; callers (and the CLI exit-code
/// triage) branch on code().
class MathError : public std::runtime_error {
public:
    MathError(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code)
    {
    }

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace logconn
