#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace tamed_ac {

// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

class NonFiniteError : public Error {
 public:
  using Error::Error;
};

class AlignmentError : public Error {
 public:
  using Error::Error;
};

class FitError : public Error {
 public:
  using Error::Error;
};

class InvalidParamsError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Config validation failure; `path` names the offending field, e.g.
// "discretization.tau_levels[2]".
class ConfigError : public Error {
 public:
  ConfigError(std::string path, const std::string& what)
      : Error(path.empty() ? what : path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

// Raised when a growth/coercivity constant cannot be certified on the grid.
class DerivationError : public Error {
 public:
  DerivationError(const std::string& what, double u, double v)
      : Error(what + " (u=" + std::to_string(u) + ", v=" + std::to_string(v) + ")"), u_(u), v_(v) {}
  double u() const noexcept { return u_; }
  double v() const noexcept { return v_; }

 private:
  double u_;
  double v_;
};

// A time step produced NaN/Inf.
class BlowUpError : public Error {
 public:
  BlowUpError(std::uint64_t step, std::uint64_t sample = 0)
      : Error("non-finite state at step " + std::to_string(step) + " of sample " +
              std::to_string(sample)),
        step_(step),
        sample_(sample) {}
  std::uint64_t step() const noexcept { return step_; }
  std::uint64_t sample() const noexcept { return sample_; }

 private:
  std::uint64_t step_;
  std::uint64_t sample_;
};

}  // namespace tamed_ac
