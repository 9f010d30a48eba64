#pragma once

#include <stdexcept>
#include <string>

namespace dgraph {

/// Numerical failure inside a solver (non-convergence, breakdown).
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConvergenceError : public SolverError {
 public:
  ConvergenceError(const std::string& what, double achieved)
      : SolverError(what + " (achieved " + std::to_string(achieved) + ")"), achieved_(achieved) {}
  double achieved() const { return achieved_; }

 private:
  double achieved_;
};

/// A configured hypothesis does not hold for the requested problem.
class HypothesisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or out-of-range configuration; `path` is a JSON pointer.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

}  // namespace dgraph
