#pragma once

#include <stdexcept>
#include <string>

namespace mauc {

// Base of every error raised by the library. The CLI maps these to exit code 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
public:
    using Error::Error;
};

// Stationary solves or root searches that did not converge.
class NumericalFailure : public Error {
public:
    using Error::Error;
};

class NoSolution : public Error {
public:
    using Error::Error;
};

// Malformed or truncated code stream.
class FormatError : public Error {
public:
    using Error::Error;
};

// Decoder memory digest differs from the one recorded by the encoder.
class MemoryDesync : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace mauc
