#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace carbon {

enum class ErrorCode {
    MuNotGreaterThanR,
    NonPositiveCoefficient,
    InvalidPenalty,
    InvalidSpec,
    EmptySurface,
    NewtonDiverged,
    SliceNotStored,
    LeftBoundaryNotVanishing,
    NonmonotoneSlice,
    NonmonotoneRow,
    GridMismatch,
    MissingSurface,
    InvalidCounts,
    NonpositivePrice,
    ParseError,
    ValidationError,
    MissingArtifacts,
    Io,
};

std::string_view to_string(ErrorCode code);

/// Library-wide exception. `code()` identifies the failure class; the message
/// carries the specifics (offending field, line number, time index).
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::MuNotGreaterThanR: return "MuNotGreaterThanR";
        case ErrorCode::NonPositiveCoefficient: return "NonPositiveCoefficient";
        case ErrorCode::InvalidPenalty: return "InvalidPenalty";
        case ErrorCode::InvalidSpec: return "InvalidSpec";
        case ErrorCode::EmptySurface: return "EmptySurface";
        case ErrorCode::NewtonDiverged: return "NewtonDiverged";
        case ErrorCode::SliceNotStored: return "SliceNotStored";
        case ErrorCode::LeftBoundaryNotVanishing: return "LeftBoundaryNotVanishing";
        case ErrorCode::NonmonotoneSlice: return "NonmonotoneSlice";
        case ErrorCode::NonmonotoneRow: return "NonmonotoneRow";
        case ErrorCode::GridMismatch: return "GridMismatch";
        case ErrorCode::MissingSurface: return "MissingSurface";
        case ErrorCode::InvalidCounts: return "InvalidCounts";
        case ErrorCode::NonpositivePrice: return "NonpositivePrice";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::ValidationError: return "ValidationError";
        case ErrorCode::MissingArtifacts: return "MissingArtifacts";
        case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

}  // namespace carbon
