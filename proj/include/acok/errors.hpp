#pragma once

#include <stdexcept>
#include <string>

namespace acok {

/// Invalid configuration value or malformed configuration file.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Missing, unreadable, or malformed data file.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A loss, gradient, or solver state became non-finite.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, long iteration)
      : std::runtime_error(what), iteration_(iteration) {}

  long iteration() const noexcept { return iteration_; }

 private:
  long iteration_;
};

}  // namespace acok
