#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace povmap {

enum class ErrorCode {
    MissingColumn,
    MalformedRow,
    NegativeIncome,
    NonFiniteInput,
    NonPositiveWeight,
    UrbanicityOutOfRange,
    DuplicateHousehold,
    PercentOutOfRange,
    NonPositiveWage,
    ZeroVarianceColumn,
    UnknownTransform,
    RosterMismatch,
    EmptyGroup,
    SingularPosteriorCovariance,
    SliceNonConvergence,
    InsufficientDraws,
    NonPositiveSigma,
    NonPositiveLine,
    NegativeAlpha,
    EmptyDomain,
    TooFewDraws,
    NonPositiveRegionalEstimate,
    CutoffOutOfRange,
    SingleComuna,
    InvalidSizes,
    InfeasibleDesign,
    InvalidConfig,
    Io,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure in the library is reported through this type. `row` is the
// 1-based data row (header excluded) for file-level validation errors.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, std::optional<std::size_t> row = std::nullopt);

    ErrorCode code() const noexcept { return code_; }
    std::optional<std::size_t> row() const noexcept { return row_; }

private:
    ErrorCode code_;
    std::optional<std::size_t> row_;
};

}  // namespace povmap
