#pragma once

#include <stdexcept>
#include <string>

namespace kondoent {

enum class Errc {
    not_hermitian,
    dimension_mismatch,
    negative_eigenvalue,
    out_of_range,
    domain_error,
    empty_sector,
    invalid_model,
    not_converged,
    degenerate_ground,
    no_bracket,
    non_monotone,
    parse_error,
};

inline const char* errc_name(Errc c) {
    switch (c) {
    case Errc::not_hermitian: return "NotHermitian";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::negative_eigenvalue: return "NegativeEigenvalue";
    case Errc::out_of_range: return "OutOfRange";
    case Errc::domain_error: return "DomainError";
    case Errc::empty_sector: return "EmptySector";
    case Errc::invalid_model: return "InvalidModel";
    case Errc::not_converged: return "NotConverged";
    case Errc::degenerate_ground: return "DegenerateGround";
    case Errc::no_bracket: return "NoBracket";
    case Errc::non_monotone: return "NonMonotone";
    case Errc::parse_error: return "ParseError";
    }
    return "Unknown";
}

// Every failure raised by the library carries one of the codes above so the
// CLI can map it onto a process exit status.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

} // namespace kondoent
