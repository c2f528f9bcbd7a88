#pragma once

#include <stdexcept>
#include <string>

namespace entrain {

// Every failure the toolkit can report. Parsers, feature extractors and
// statistical kernels all throw Error with one of these codes; warnings
// (non-fatal validation findings) travel as plain strings next to results.
enum class ErrorCode {
    // ingestion
    MissingColumn,
    NonNumericTime,
    UnsortedAfterMerge,
    MoreThanTwoSpeakers,
    UnsupportedEncoding,
    CorruptHeader,
    MissingAuColumn,
    NonMonotoneTimestamps,
    OutOfScaleRating,
    // features
    TooShort,
    InsufficientVoicedFrames,
    TurnOutOfRange,
    // turn dynamics
    EmptyTranscript,
    // entrainment
    InsufficientPartnerTurns,
    TooFewPairs,
    NoUsableWindows,
    // stats
    EmptySample,
    ZeroVarianceBothGroups,
    ZeroVarianceDifferences,
    ZeroVariance,
    LengthMismatch,
    SampleSizeOutOfRange,
    ConstantInput,
    OutOfRangeP,
    DegenerateMatrix,
    // pcs
    TooFewResponses,
    MissingConstruct,
    SingleResponseCohort,
    // synth + pipeline
    InvalidConfig,
    LayoutError,
    NoLabeledConversations,
    IoError,
};

inline const char* error_code_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::MissingColumn:            return "MissingColumn";
        case ErrorCode::NonNumericTime:           return "NonNumericTime";
        case ErrorCode::UnsortedAfterMerge:       return "UnsortedAfterMerge";
        case ErrorCode::MoreThanTwoSpeakers:      return "MoreThanTwoSpeakers";
        case ErrorCode::UnsupportedEncoding:      return "UnsupportedEncoding";
        case ErrorCode::CorruptHeader:            return "CorruptHeader";
        case ErrorCode::MissingAuColumn:          return "MissingAuColumn";
        case ErrorCode::NonMonotoneTimestamps:    return "NonMonotoneTimestamps";
        case ErrorCode::OutOfScaleRating:         return "OutOfScaleRating";
        case ErrorCode::TooShort:                 return "TooShort";
        case ErrorCode::InsufficientVoicedFrames: return "InsufficientVoicedFrames";
        case ErrorCode::TurnOutOfRange:           return "TurnOutOfRange";
        case ErrorCode::EmptyTranscript:          return "EmptyTranscript";
        case ErrorCode::InsufficientPartnerTurns: return "InsufficientPartnerTurns";
        case ErrorCode::TooFewPairs:              return "TooFewPairs";
        case ErrorCode::NoUsableWindows:          return "NoUsableWindows";
        case ErrorCode::EmptySample:              return "EmptySample";
        case ErrorCode::ZeroVarianceBothGroups:   return "ZeroVarianceBothGroups";
        case ErrorCode::ZeroVarianceDifferences:  return "ZeroVarianceDifferences";
        case ErrorCode::ZeroVariance:             return "ZeroVariance";
        case ErrorCode::LengthMismatch:           return "LengthMismatch";
        case ErrorCode::SampleSizeOutOfRange:     return "SampleSizeOutOfRange";
        case ErrorCode::ConstantInput:            return "ConstantInput";
        case ErrorCode::OutOfRangeP:              return "OutOfRangeP";
        case ErrorCode::DegenerateMatrix:         return "DegenerateMatrix";
        case ErrorCode::TooFewResponses:          return "TooFewResponses";
        case ErrorCode::MissingConstruct:         return "MissingConstruct";
        case ErrorCode::SingleResponseCohort:     return "SingleResponseCohort";
        case ErrorCode::InvalidConfig:            return "InvalidConfig";
        case ErrorCode::LayoutError:              return "LayoutError";
        case ErrorCode::NoLabeledConversations:   return "NoLabeledConversations";
        case ErrorCode::IoError:                  return "IoError";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
          code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace entrain
