#pragma once

#include <stdexcept>
#include <string>

namespace helicable {

/// Base of all library errors. Each subclass maps to one CLI exit code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class MeshError : public Error {
public:
    using Error::Error;
};

/// MSH ingestion failure with the 1-based line number it was detected on.
class MshError : public MeshError {
public:
    MshError(int line, const std::string& what)
        : MeshError("line " + std::to_string(line) + ": " + what), line_(line), reason_(what)
    {
    }

    [[nodiscard]] int line() const { return line_; }
    [[nodiscard]] const std::string& reason() const { return reason_; }

private:
    int line_;
    std::string reason_;
};

class SingularSystemError : public Error {
public:
    using Error::Error;
};

class SolverToleranceError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace helicable
