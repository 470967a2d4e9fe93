#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pgbandit {

enum class ErrorCode {
    InvalidArgument,
    AllArmsOptimal,
    NonFiniteLogit,
    InvalidPolicy,
    DimensionMismatch,
    DomainError,
    PreconditionViolated,
    UnsupportedDistribution,
    MissingFlags,
    ParseError,
    ValidationError,
    UnknownKey,
    UnknownPreset,
    IoError,
};

constexpr std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::AllArmsOptimal: return "AllArmsOptimal";
        case ErrorCode::NonFiniteLogit: return "NonFiniteLogit";
        case ErrorCode::InvalidPolicy: return "InvalidPolicy";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::DomainError: return "DomainError";
        case ErrorCode::PreconditionViolated: return "PreconditionViolated";
        case ErrorCode::UnsupportedDistribution: return "UnsupportedDistribution";
        case ErrorCode::MissingFlags: return "MissingFlags";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::ValidationError: return "ValidationError";
        case ErrorCode::UnknownKey: return "UnknownKey";
        case ErrorCode::UnknownPreset: return "UnknownPreset";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

/// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace pgbandit
