#pragma once

#include <stdexcept>
#include <string>

namespace stationpulse {

enum class ErrorCode {
    io,
    parse,
    validation,
    referential,
    empty_input,
    parameter,
    degenerate,
    shape,
    length,
    all_missing,
    consistency,
    internal,
};

const char* error_code_name(ErrorCode code);

/// Every failure in the library is thrown as an Error; the C boundary maps
/// the code to a status value and keeps the message for sp_last_error().
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace stationpulse
