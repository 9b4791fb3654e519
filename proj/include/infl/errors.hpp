#pragma once

#include <stdexcept>
#include <string>

namespace infl {

enum class errc {
    not_primitive,
    unknown_letter,
    shape_mismatch,
    size_guard,
    min_poly_not_found,
    field_mismatch,
    overlap_detected,
    lift_failed,
    not_constant_length,
    not_simultaneously_diagonalisable,
    zero_polynomial,
    not_applicable,
    not_stabilised,
    non_convergence,
    negative_component,
    unknown_support_point,
    window_too_small,
    det_witness_missing,
    numerical_underflow,
    parse_error,
};

inline const char* errc_name(errc c) {
    switch (c) {
    case errc::not_primitive: return "NotPrimitive";
    case errc::unknown_letter: return "UnknownLetter";
    case errc::shape_mismatch: return "ShapeMismatch";
    case errc::size_guard: return "SizeGuard";
    case errc::min_poly_not_found: return "MinPolyNotFound";
    case errc::field_mismatch: return "FieldMismatch";
    case errc::overlap_detected: return "OverlapDetected";
    case errc::lift_failed: return "LiftFailed";
    case errc::not_constant_length: return "NotConstantLength";
    case errc::not_simultaneously_diagonalisable: return "NotSimultaneouslyDiagonalisable";
    case errc::zero_polynomial: return "ZeroPolynomial";
    case errc::not_applicable: return "NotApplicable";
    case errc::not_stabilised: return "NotStabilised";
    case errc::non_convergence: return "NonConvergence";
    case errc::negative_component: return "NegativeComponent";
    case errc::unknown_support_point: return "UnknownSupportPoint";
    case errc::window_too_small: return "WindowTooSmall";
    case errc::det_witness_missing: return "DetWitnessMissing";
    case errc::numerical_underflow: return "NumericalUnderflow";
    case errc::parse_error: return "ParseError";
    }
    return "Unknown";
}

/// Library error; `module` names the pipeline stage that raised it.
class error : public std::runtime_error {
public:
    error(errc code, std::string module, const std::string& what)
        : std::runtime_error(module + ": " + errc_name(code) + ": " + what),
          code_(code), module_(std::move(module)) {}

    errc code() const noexcept { return code_; }
    const std::string& module() const noexcept { return module_; }

private:
    errc code_;
    std::string module_;
};

} // namespace infl
