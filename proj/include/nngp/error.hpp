#pragma once

#include <stdexcept>
#include <string>

namespace nngp {

enum class ErrorCode {
    InvalidArgument = 1,
    DegenerateInput,
    VanishedSignal,
    Factorization,
    Precondition,
    Parse,
    Io,
};

/// Single exception type for the library; the code maps one-to-one onto
/// the status values of the C interface.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

inline void require(bool cond, ErrorCode code, const std::string& msg) {
    if (!cond) throw Error(code, msg);
}

}  // namespace nngp
