#include "surrobench/error.hpp"

namespace surrobench {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::ParentOutOfRange: return "ParentOutOfRange";
    case ErrorCode::DuplicateParent: return "DuplicateParent";
    case ErrorCode::NotCanonical: return "NotCanonical";
    case ErrorCode::UnknownOp: return "UnknownOp";
    case ErrorCode::MutationImpossible: return "MutationImpossible";
    case ErrorCode::SpaceTooLarge: return "SpaceTooLarge";
    case ErrorCode::NotParameterFree: return "NotParameterFree";
    case ErrorCode::OutOfUnitRange: return "OutOfUnitRange";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InvalidRecord: return "InvalidRecord";
    case ErrorCode::EmptyStratum: return "EmptyStratum";
    case ErrorCode::UnknownOptimizer: return "UnknownOptimizer";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::EmptyData: return "EmptyData";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::LayoutMismatch: return "LayoutMismatch";
    case ErrorCode::DegenerateTarget: return "DegenerateTarget";
    case ErrorCode::AllTied: return "AllTied";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::TooFewRecords: return "TooFewRecords";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::CorruptModel: return "CorruptModel";
    case ErrorCode::InsufficientRepeats: return "InsufficientRepeats";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

} // namespace surrobench
