#pragma once

#include <stdexcept>
#include <string>

namespace bddcso {

/// Base class for every error raised by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Invalid user input (mesh sizes, partitions, configs).
class InvalidArgument : public Error
{
public:
  using Error::Error;
};

/// Symmetric factorization hit a non-positive pivot.
class NotSpdError : public Error
{
public:
  NotSpdError(std::string const& what, long pivot)
      : Error(what), pivot_(pivot)
  {}

  /// Row index (in the caller's numbering) of the offending pivot.
  long pivot() const noexcept { return pivot_; }

private:
  long pivot_;
};

/// Local constrained problem is singular: not enough constraints on a floating subdomain.
class UnderconstrainedError : public Error
{
public:
  UnderconstrainedError(std::string const& what, long subdomain)
      : Error(what), subdomain_(subdomain)
  {}

  long subdomain() const noexcept { return subdomain_; }

private:
  long subdomain_;
};

} // namespace bddcso
