#pragma once

#include <stdexcept>
#include <string>

namespace evpde {

/// Time or point outside the range where a flow map is defined.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Degenerate geometry: non-positive Jacobian, inverted element, zero-length segment.
class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularLevelSetError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class SingularMatrixError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NoConvergenceError : public std::runtime_error {
 public:
  NoConvergenceError(const std::string& what, double residual, int iterations)
      : std::runtime_error(what), residual_(residual), iterations_(iterations) {}

  double residual() const noexcept { return residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

/// Surface mesh nodes do not coincide with the bulk boundary cycle.
class AlignmentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid or incomplete run configuration. `key_path()` names the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, std::string key_path)
      : std::runtime_error(what), key_path_(std::move(key_path)) {}

  const std::string& key_path() const noexcept { return key_path_; }

 private:
  std::string key_path_;
};

}  // namespace evpde
