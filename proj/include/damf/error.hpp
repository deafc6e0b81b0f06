#pragma once

#include <stdexcept>
#include <string>

namespace damf {

enum class ErrorCode {
    InvalidArgument,
    FileUnreadable,
    BadTimestamp,
    BadValue,
    DuplicateTimestamp,
    UnknownColumn,
    ColumnAllMissing,
    ColumnTooSparse,
    EmptyColumn,
    InvalidBounds,
    DegenerateColumn,
    FrameTooShort,
    InsufficientHistory,
    MonthNotCovered,
    LengthMismatch,
    EmptyDataset,
    EmptyInput,
    FeatureCountMismatch,
    LearnerFailure,
    EmptySample,
    ScheduleEmpty,
    DimensionMismatch,
    ConstantActualsForR2,
    ZeroPersistenceRmse,
    NoFeasibleCells,
    OutputUnwritable,
    BadModelFile,
    BadConfig,
};

const char* to_string(ErrorCode code) noexcept;

// True for errors caused by input data or configuration rather than by a model.
bool is_data_error(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace damf
