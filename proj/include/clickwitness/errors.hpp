#pragma once

#include <stdexcept>
#include <string>

namespace clickwitness {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid argument values, dimension mismatches, broken invariants.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Photon-number truncation left more probability mass above n_max than the
// caller-supplied tolerance allows.
class TruncationError : public Error {
public:
    using Error::Error;
};

// Malformed config or data files.
class ParseError : public Error {
public:
    using Error::Error;
};

} // namespace clickwitness
