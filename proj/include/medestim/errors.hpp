#pragma once

#include <stdexcept>
#include <string>

namespace medestim {

enum class ErrorCode {
    // dataset validation
    ShapeMismatch,
    NonBinaryTreatment,
    NonBinaryMediator,
    NonFiniteValue,
    SingleArm,
    // nuisance fitting
    DegenerateDesign,
    SingleClass,
    TooFewRows,
    EmptyArm,
    UnsupportedFamily,
    // estimators
    UnsupportedMediator,
    DegenerateWeights,
    // simulation / inference
    UnknownSetting,
    AllReplicatesFailed,
    EmptyGroup,
    // cli / io
    MissingColumn,
    EmptyAfterFiltering,
    ConfigError,
    IoError,
};

inline const char* error_code_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::NonBinaryTreatment: return "NonBinaryTreatment";
        case ErrorCode::NonBinaryMediator: return "NonBinaryMediator";
        case ErrorCode::NonFiniteValue: return "NonFiniteValue";
        case ErrorCode::SingleArm: return "SingleArm";
        case ErrorCode::DegenerateDesign: return "DegenerateDesign";
        case ErrorCode::SingleClass: return "SingleClass";
        case ErrorCode::TooFewRows: return "TooFewRows";
        case ErrorCode::EmptyArm: return "EmptyArm";
        case ErrorCode::UnsupportedFamily: return "UnsupportedFamily";
        case ErrorCode::UnsupportedMediator: return "UnsupportedMediator";
        case ErrorCode::DegenerateWeights: return "DegenerateWeights";
        case ErrorCode::UnknownSetting: return "UnknownSetting";
        case ErrorCode::AllReplicatesFailed: return "AllReplicatesFailed";
        case ErrorCode::EmptyGroup: return "EmptyGroup";
        case ErrorCode::MissingColumn: return "MissingColumn";
        case ErrorCode::EmptyAfterFiltering: return "EmptyAfterFiltering";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
    throw Error(code, what);
}

} // namespace medestim
