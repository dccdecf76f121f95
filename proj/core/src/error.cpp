#include "povmap/error.hpp"

namespace povmap {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::MissingColumn: return "MissingColumn";
        case ErrorCode::MalformedRow: return "MalformedRow";
        case ErrorCode::NegativeIncome: return "NegativeIncome";
        case ErrorCode::NonFiniteInput: return "NonFiniteInput";
        case ErrorCode::NonPositiveWeight: return "NonPositiveWeight";
        case ErrorCode::UrbanicityOutOfRange: return "UrbanicityOutOfRange";
        case ErrorCode::DuplicateHousehold: return "DuplicateHousehold";
        case ErrorCode::PercentOutOfRange: return "PercentOutOfRange";
        case ErrorCode::NonPositiveWage: return "NonPositiveWage";
        case ErrorCode::ZeroVarianceColumn: return "ZeroVarianceColumn";
        case ErrorCode::UnknownTransform: return "UnknownTransform";
        case ErrorCode::RosterMismatch: return "RosterMismatch";
        case ErrorCode::EmptyGroup: return "EmptyGroup";
        case ErrorCode::SingularPosteriorCovariance: return "SingularPosteriorCovariance";
        case ErrorCode::SliceNonConvergence: return "SliceNonConvergence";
        case ErrorCode::InsufficientDraws: return "InsufficientDraws";
        case ErrorCode::NonPositiveSigma: return "NonPositiveSigma";
        case ErrorCode::NonPositiveLine: return "NonPositiveLine";
        case ErrorCode::NegativeAlpha: return "NegativeAlpha";
        case ErrorCode::EmptyDomain: return "EmptyDomain";
        case ErrorCode::TooFewDraws: return "TooFewDraws";
        case ErrorCode::NonPositiveRegionalEstimate: return "NonPositiveRegionalEstimate";
        case ErrorCode::CutoffOutOfRange: return "CutoffOutOfRange";
        case ErrorCode::SingleComuna: return "SingleComuna";
        case ErrorCode::InvalidSizes: return "InvalidSizes";
        case ErrorCode::InfeasibleDesign: return "InfeasibleDesign";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message, std::optional<std::size_t> row)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), row_(row) {}

}  // namespace povmap
