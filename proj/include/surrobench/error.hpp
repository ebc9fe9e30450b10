#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace surrobench {

enum class ErrorCode {
    // searchspace
    ParentOutOfRange,
    DuplicateParent,
    NotCanonical,
    UnknownOp,
    MutationImpossible,
    SpaceTooLarge,
    NotParameterFree,
    // encoding
    OutOfUnitRange,
    // dataset
    ParseError,
    InvalidRecord,
    EmptyStratum,
    UnknownOptimizer,
    EmptyInput,
    // gbtree
    EmptyData,
    NonFiniteInput,
    LayoutMismatch,
    // metrics
    DegenerateTarget,
    AllTied,
    ZeroVariance,
    // surrogate
    TooFewRecords,
    VersionMismatch,
    CorruptModel,
    InsufficientRepeats,
    // generic
    InvalidArgument,
    Io,
};

std::string_view to_string(ErrorCode code);

/// Every module reports failures through this exception; `code()` identifies
/// the failure kind named in the module contracts.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace surrobench
