#pragma once

#include <stdexcept>
#include <string>

namespace tnp {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shapes, ranks or dimensions that do not fit together.
class StructuralError : public Error {
 public:
  using Error::Error;
};

// A dense result would exceed the configured element budget.
class CapacityError : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

// Gradient descent blew up; the message names the learning rate.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

// NaN or Inf appeared somewhere it must not.
class NumericError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace tnp
