#ifndef TSIRELSON_ERRORS_HPP
#define TSIRELSON_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace tsirelson {

/// Base class for every error raised by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Bad caller input: out-of-range index, alpha < 1, malformed weights, ...
class InvalidArgument : public Error
{
public:
    using Error::Error;
};

/// A vector that was supposed to be a behavior is not normalized or has
/// entries outside [0, 1].
class InvalidBehavior : public InvalidArgument
{
public:
    using InvalidArgument::InvalidArgument;
};

/// Bell functional with LB == NSB.
class DegenerateFunctional : public Error
{
public:
    using Error::Error;
};

/// A behavior exceeds the bound of one of the model's constraints.
class ConstraintViolated : public Error
{
public:
    using Error::Error;
};

/// No convex combination of the model's points reproduces the behavior.
class NotInPolytope : public Error
{
public:
    using Error::Error;
};

/// Numerical failure inside one of the solvers.
class SolverError : public Error
{
public:
    using Error::Error;
};

} // namespace tsirelson

#endif
