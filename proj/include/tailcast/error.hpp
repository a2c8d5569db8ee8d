#pragma once

#include <stdexcept>
#include <string>

namespace tailcast {

/// Base of every error raised by the library. `code()` is a stable
/// machine-readable tag used in the CLI's structured error objects.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}
  [[nodiscard]] const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

class InvalidInput : public Error {
 public:
  explicit InvalidInput(const std::string& what) : Error("invalid_input", what) {}
};

class DegenerateSample : public Error {
 public:
  explicit DegenerateSample(const std::string& what) : Error("degenerate_sample", what) {}
};

class NumericFailure : public Error {
 public:
  explicit NumericFailure(const std::string& what) : Error("numeric_failure", what) {}
};

class EmptyBall : public Error {
 public:
  EmptyBall(double x, const std::string& what) : Error("empty_ball", what), x_(x) {}
  [[nodiscard]] double point() const noexcept { return x_; }

 private:
  double x_;
};

/// ML search did not converge or hit a degenerate likelihood. Carries the best
/// point the optimizer found so callers can still report it.
class FitFailure : public Error {
 public:
  FitFailure(const std::string& what, double best_gamma, double best_sigma)
      : Error("fit_failure", what), gamma_(best_gamma), sigma_(best_sigma) {}
  [[nodiscard]] double best_gamma() const noexcept { return gamma_; }
  [[nodiscard]] double best_sigma() const noexcept { return sigma_; }

 private:
  double gamma_;
  double sigma_;
};

}  // namespace tailcast
