#pragma once

#include <stdexcept>
#include <string>

namespace satcav {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InvalidParams : public Error {
public:
  using Error::Error;
};

/// A forward-sweep pivot of the tridiagonal solver vanished.
class NumericalBreakdown : public Error {
public:
  using Error::Error;
};

class NonConvergence : public Error {
public:
  NonConvergence(const std::string& what, double best_residual, int iterations)
      : Error(what), best_residual_(best_residual), iterations_(iterations) {}
  double best_residual() const noexcept { return best_residual_; }
  int iterations() const noexcept { return iterations_; }

private:
  double best_residual_;
  int iterations_;
};

class UndefinedAtZeroDrive : public Error {
public:
  using Error::Error;
};

class ZeroSlope : public Error {
public:
  using Error::Error;
};

class BistableRange : public Error {
public:
  BistableRange(const std::string& what, double y_sq_low, double y_sq_high)
      : Error(what), low_(y_sq_low), high_(y_sq_high) {}
  double window_low() const noexcept { return low_; }
  double window_high() const noexcept { return high_; }

private:
  double low_, high_;
};

class BracketInvalid : public Error {
public:
  using Error::Error;
};

class StepUnstable : public Error {
public:
  using Error::Error;
};

class TransientNotSettled : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  ConfigError(const std::string& what, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const noexcept { return line_; }

private:
  int line_;
};

} // namespace satcav
