#pragma once

#include <stdexcept>
#include <string>

namespace stylemem {

// Error categories, exposed verbatim by the CLI as machine-parseable tags.
enum class ErrorCode {
    shape_mismatch,
    bad_argument,
    data_format,
    data_missing,
    checkpoint_format,
    checkpoint_version,
    checksum_mismatch,
    training_diverged,
    io_failure,
};

inline const char* error_code_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::shape_mismatch:     return "shape-mismatch";
        case ErrorCode::bad_argument:       return "bad-argument";
        case ErrorCode::data_format:        return "data-format";
        case ErrorCode::data_missing:       return "data-missing";
        case ErrorCode::checkpoint_format:  return "checkpoint-format";
        case ErrorCode::checkpoint_version: return "checkpoint-version";
        case ErrorCode::checksum_mismatch:  return "checksum-mismatch";
        case ErrorCode::training_diverged:  return "training-diverged";
        case ErrorCode::io_failure:         return "io-failure";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }
    const char* code_name() const noexcept { return error_code_name(code_); }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
    throw Error(code, what);
}

}  // namespace stylemem
