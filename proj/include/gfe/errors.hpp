#pragma once

#include <stdexcept>
#include <string>

namespace gfe {

/// An input file could not be parsed; carries the offending location.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::string file, long line)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + message),
        file_(std::move(file)),
        line_(line) {}

  const std::string& file() const noexcept { return file_; }
  long line() const noexcept { return line_; }

 private:
  std::string file_;
  long line_;
};

/// Non-finite values or a singular solve encountered mid-computation.
/// `step` identifies the recursion step (or epoch) that failed, -1 if n/a.
class NumericalFailure : public std::runtime_error {
 public:
  explicit NumericalFailure(const std::string& message, long step = -1)
      : std::runtime_error(step >= 0 ? message + " (step " + std::to_string(step) + ")"
                                     : message),
        step_(step) {}

  long step() const noexcept { return step_; }

 private:
  long step_;
};

/// An iteration hit its cap before reaching the requested tolerance.
class ConvergenceFailure : public std::runtime_error {
 public:
  ConvergenceFailure(const std::string& message, double last_delta, long iterations)
      : std::runtime_error(message + " (delta " + std::to_string(last_delta) + " after " +
                           std::to_string(iterations) + " iterations)"),
        last_delta_(last_delta),
        iterations_(iterations) {}

  double last_delta() const noexcept { return last_delta_; }
  long iterations() const noexcept { return iterations_; }

 private:
  double last_delta_;
  long iterations_;
};

}  // namespace gfe
