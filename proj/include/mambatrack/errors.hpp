#pragma once

#include <stdexcept>
#include <string>

namespace mambatrack {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class SingularMatrixError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

// Malformed input files, checkpoints and configuration.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace mambatrack
