#include "damf/error.hpp"

namespace damf {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::FileUnreadable: return "FileUnreadable";
    case ErrorCode::BadTimestamp: return "BadTimestamp";
    case ErrorCode::BadValue: return "BadValue";
    case ErrorCode::DuplicateTimestamp: return "DuplicateTimestamp";
    case ErrorCode::UnknownColumn: return "UnknownColumn";
    case ErrorCode::ColumnAllMissing: return "ColumnAllMissing";
    case ErrorCode::ColumnTooSparse: return "ColumnTooSparse";
    case ErrorCode::EmptyColumn: return "EmptyColumn";
    case ErrorCode::InvalidBounds: return "InvalidBounds";
    case ErrorCode::DegenerateColumn: return "DegenerateColumn";
    case ErrorCode::FrameTooShort: return "FrameTooShort";
    case ErrorCode::InsufficientHistory: return "InsufficientHistory";
    case ErrorCode::MonthNotCovered: return "MonthNotCovered";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::FeatureCountMismatch: return "FeatureCountMismatch";
    case ErrorCode::LearnerFailure: return "LearnerFailure";
    case ErrorCode::EmptySample: return "EmptySample";
    case ErrorCode::ScheduleEmpty: return "ScheduleEmpty";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ConstantActualsForR2: return "ConstantActualsForR2";
    case ErrorCode::ZeroPersistenceRmse: return "ZeroPersistenceRmse";
    case ErrorCode::NoFeasibleCells: return "NoFeasibleCells";
    case ErrorCode::OutputUnwritable: return "OutputUnwritable";
    case ErrorCode::BadModelFile: return "BadModelFile";
    case ErrorCode::BadConfig: return "BadConfig";
    }
    return "Unknown";
}

bool is_data_error(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::FileUnreadable:
    case ErrorCode::BadTimestamp:
    case ErrorCode::BadValue:
    case ErrorCode::DuplicateTimestamp:
    case ErrorCode::UnknownColumn:
    case ErrorCode::ColumnAllMissing:
    case ErrorCode::ColumnTooSparse:
    case ErrorCode::EmptyColumn:
    case ErrorCode::FrameTooShort:
    case ErrorCode::InsufficientHistory:
    case ErrorCode::MonthNotCovered:
    case ErrorCode::OutputUnwritable:
    case ErrorCode::BadModelFile:
    case ErrorCode::BadConfig:
    case ErrorCode::NoFeasibleCells:
        return true;
    default:
        return false;
    }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace damf
