#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace spkemo {

enum class ErrorCode {
    InvalidArgument,
    Io,
    MalformedRiff,
    UnsupportedEncoding,
    EmptyAudio,
    TooShort,
    EmptyInput,
    DimMismatch,
    BadMagic,
    TruncatedFile,
    SingleClassInput,
    DegenerateInput,
    MissingClass,
    LengthMismatch,
    UnknownLabel,
    EmptyEval,
    TooFewSpeakers,
    ZeroVector,
    MissingNeutral,
    EmptyScores,
    EmptyManifest,
};

inline std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::Io: return "Io";
        case ErrorCode::MalformedRiff: return "MalformedRiff";
        case ErrorCode::UnsupportedEncoding: return "UnsupportedEncoding";
        case ErrorCode::EmptyAudio: return "EmptyAudio";
        case ErrorCode::TooShort: return "TooShort";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::DimMismatch: return "DimMismatch";
        case ErrorCode::BadMagic: return "BadMagic";
        case ErrorCode::TruncatedFile: return "TruncatedFile";
        case ErrorCode::SingleClassInput: return "SingleClassInput";
        case ErrorCode::DegenerateInput: return "DegenerateInput";
        case ErrorCode::MissingClass: return "MissingClass";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::UnknownLabel: return "UnknownLabel";
        case ErrorCode::EmptyEval: return "EmptyEval";
        case ErrorCode::TooFewSpeakers: return "TooFewSpeakers";
        case ErrorCode::ZeroVector: return "ZeroVector";
        case ErrorCode::MissingNeutral: return "MissingNeutral";
        case ErrorCode::EmptyScores: return "EmptyScores";
        case ErrorCode::EmptyManifest: return "EmptyManifest";
    }
    return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace spkemo
