#pragma once

#include <stdexcept>
#include <string>

namespace hornbill {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Head-on entry into a horn: the geodesic never returns.
class TrappedError : public Error {
public:
    using Error::Error;
};

/// No obstacle hit within the length cap.
class HorizonError : public Error {
public:
    using Error::Error;
};

/// Requested quantity lies outside the representable range.
class RangeError : public Error {
public:
    using Error::Error;
};

class GrazingError : public Error {
public:
    using Error::Error;
};

/// A finite-difference stencil straddles a singularity curve.
class SingularityError : public Error {
public:
    using Error::Error;
};

class OverlapError : public Error {
public:
    using Error::Error;
};

class DegenerateError : public Error {
public:
    using Error::Error;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// Malformed or schema-violating configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace hornbill
