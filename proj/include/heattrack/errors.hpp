#pragma once

#include <stdexcept>
#include <string>

namespace heat {

// Error taxonomy mirrors the CLI exit codes: validation = 2, numeric = 3, io = 4.
class Error : public std::runtime_error {
public:
    Error(int code, const std::string& what) : std::runtime_error(what), code_(code) {}
    int code() const noexcept { return code_; }

private:
    int code_;
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error(2, what) {}
};

class NumericError : public Error {
public:
    explicit NumericError(const std::string& what) : Error(3, what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(4, what) {}
};

} // namespace heat
