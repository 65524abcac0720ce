#pragma once

#include <stdexcept>
#include <string>

namespace gclab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: non-finite entries, wrong dimensions, unknown names.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Two eigenvalues are too close for the requested derivative or eigenvector.
class DegenerateGapError : public Error {
 public:
  DegenerateGapError(const std::string& what, int first, int second, double gap)
      : Error(what), first_(first), second_(second), gap_(gap) {}

  int first() const noexcept { return first_; }
  int second() const noexcept { return second_; }
  double gap() const noexcept { return gap_; }

 private:
  int first_;
  int second_;
  double gap_;
};

/// A stencil was requested at a node without the required margin.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A quantity left the representable floating-point range.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// A set that must be non-empty (for example the localization set) is empty.
class EmptySetError : public Error {
 public:
  using Error::Error;
};

}  // namespace gclab
