#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace bkm {

/// Base of every error the library throws. `kind()` is the short class
/// name the CLI prints on its diagnostic stream.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

/// Argument outside the supported domain of a function.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error("DomainError", what) {}
};

/// A kernel whose value is not finite at the requested radius.
class KernelSingularityError : public Error {
 public:
  explicit KernelSingularityError(const std::string& what)
      : Error("KernelSingularityError", what) {}
};

/// Field and source point closer than the coincidence tolerance.
class CoincidentPointError : public Error {
 public:
  explicit CoincidentPointError(const std::string& what)
      : Error("CoincidentPointError", what) {}
};

class SingularMatrixError : public Error {
 public:
  explicit SingularMatrixError(const std::string& what)
      : Error("SingularMatrixError", what) {}
};

class GeometryError : public Error {
 public:
  explicit GeometryError(const std::string& what) : Error("GeometryError", what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error("ConfigError", what) {}
};

/// Fixed-point iteration of the full solver did not reach its tolerance.
/// `history()` holds the max-norm update of every iteration performed.
class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, std::vector<double> history)
      : Error("NonConvergenceError", what), history_(std::move(history)) {}
  const std::vector<double>& history() const noexcept { return history_; }

 private:
  std::vector<double> history_;
};

}  // namespace bkm
