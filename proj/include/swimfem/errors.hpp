#pragma once

#include <stdexcept>
#include <string>

namespace swimfem {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid input: malformed files, schema violations, broken preconditions.
/// The CLI maps it to exit code 2.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Failure of a numerical procedure (singular system, inverted element,
/// non-finite values). The CLI maps it to exit code 3.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class InvertedElementError : public NumericalError {
 public:
  InvertedElementError(int cell, const std::string& what)
      : NumericalError(what), cell_(cell) {}
  int cell() const noexcept { return cell_; }

 private:
  int cell_;
};

}  // namespace swimfem
