#pragma once

#include <stdexcept>
#include <string>

namespace fastcox {

// Root of every error raised by the library. The CLI maps any Error to exit
// code 1; argument errors are detected before the library is called.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
public:
    using Error::Error;
};

// log of a nonpositive number was requested; means an upstream precondition broke.
class NumericalDomain : public Error {
public:
    using Error::Error;
};

// The requested quantity has an empty denominator (e.g. no comparable pairs).
class Undefined : public Error {
public:
    using Error::Error;
};

// The objective is flat or unbounded, e.g. fitting without any observed event.
class DegenerateObjective : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class EmptyDataset : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace fastcox
