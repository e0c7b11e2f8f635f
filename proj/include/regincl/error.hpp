#pragma once

#include <stdexcept>
#include <string>

namespace regincl {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Malformed input data. `field()` is a path such as "a_dims[1]" when known.
class ValidationError : public Error {
  public:
    explicit ValidationError(const std::string &what, std::string field = {})
        : Error(what), field_(std::move(field)) {}
    const std::string &field() const noexcept { return field_; }

  private:
    std::string field_;
};

/// An operation was called on data that does not satisfy its precondition.
/// Subclasses carry the certificate explaining why.
class PreconditionError : public Error {
  public:
    using Error::Error;
};

/// Elements or families whose shapes do not fit together.
class ShapeError : public Error {
  public:
    using Error::Error;
};

/// Exact combinatorial search refused because the instance is too large.
class SizeLimitError : public Error {
  public:
    using Error::Error;
};

} // namespace regincl
