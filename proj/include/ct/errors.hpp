// SPDX-License-Identifier: Apache-2.0
// Exception hierarchy shared by all modules.
#pragma once

#include <stdexcept>
#include <string>

namespace ct {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DomainError : Error {
    using Error::Error;
};

struct RangeError : Error {
    using Error::Error;
};

// Provider or descriptor lacks data needed for the requested quantity.
struct CapabilityError : Error {
    using Error::Error;
};

struct ToleranceError : Error {
    using Error::Error;
};

struct FinitenessError : Error {
    using Error::Error;
};

struct UnsupportedError : Error {
    using Error::Error;
};

struct SyntaxError : Error {
    SyntaxError(const std::string& msg, int line_, int col_)
        : Error(msg + " at line " + std::to_string(line_) + ", column " + std::to_string(col_)),
          line(line_), col(col_) {}
    int line;
    int col;
};

}  // namespace ct
