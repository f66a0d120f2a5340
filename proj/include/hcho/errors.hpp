#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

namespace hcho {

// Invalid sizes, mismatched grids, malformed run configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A numeric argument is outside the admissible range of an operation.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The operation is undefined on this input (e.g. negative Sobolev index on a
// field with nonzero mean).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Time or index window outside the available data.
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Broken Hermitian symmetry, corrupt checkpoint, truncated file.
class DataIntegrityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Resume attempted with a checkpoint produced by a different configuration.
class ConfigHashMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Least-squares fit refused (nonpositive data, too few points, degenerate).
class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Trajectory;

// Non-finite values or sup-norm above the blow-up threshold. Carries the
// offending time and, when raised from evolve(), the partial trajectory.
class BlowUpError : public std::runtime_error {
 public:
  explicit BlowUpError(const std::string& what, std::optional<double> time = std::nullopt)
      : std::runtime_error(what), time_(time) {}

  std::optional<double> time() const { return time_; }
  const std::shared_ptr<const Trajectory>& partial() const { return partial_; }

  BlowUpError with_context(double time, std::shared_ptr<const Trajectory> partial) const {
    BlowUpError e(std::string(what()), time);
    e.partial_ = std::move(partial);
    return e;
  }

 private:
  std::optional<double> time_;
  std::shared_ptr<const Trajectory> partial_;
};

}  // namespace hcho
