#ifndef MBRW_ERROR_HPP
#define MBRW_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace mbrw {

enum class ErrorKind {
    IndexOutOfRange,
    DuplicateEdge,
    DanglingType,
    Disconnected,
    NonpositiveRho,
    NotShiftInvariant,
    EmptyPath,
    NotStochastic,
    NotIrreducible,
    DomainError,
    DimensionMismatch,
    TooLarge,
    DPBudgetExceeded,
    EnumerationTooLarge,
    LengthMismatch,
    PreconditionViolated,
    ParseError,
};

inline std::string_view to_string(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::DuplicateEdge: return "DuplicateEdge";
    case ErrorKind::DanglingType: return "DanglingType";
    case ErrorKind::Disconnected: return "Disconnected";
    case ErrorKind::NonpositiveRho: return "NonpositiveRho";
    case ErrorKind::NotShiftInvariant: return "NotShiftInvariant";
    case ErrorKind::EmptyPath: return "EmptyPath";
    case ErrorKind::NotStochastic: return "NotStochastic";
    case ErrorKind::NotIrreducible: return "NotIrreducible";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::DPBudgetExceeded: return "DPBudgetExceeded";
    case ErrorKind::EnumerationTooLarge: return "EnumerationTooLarge";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::PreconditionViolated: return "PreconditionViolated";
    case ErrorKind::ParseError: return "ParseError";
    }
    return "Unknown";
}

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind)
    {
    }

    ErrorKind kind() const noexcept { return kind_; }

    /// Budget-style failures: the input was valid but too expensive to process.
    bool is_budget() const noexcept
    {
        return kind_ == ErrorKind::TooLarge || kind_ == ErrorKind::DPBudgetExceeded
            || kind_ == ErrorKind::EnumerationTooLarge;
    }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what)
{
    throw Error(kind, what);
}

} // namespace mbrw

#endif
