#ifndef PDC_ERRORS_HPP
#define PDC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace pdc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A wavelength or frequency outside the validity window of a model.
class RangeError : public Error {
 public:
  using Error::Error;
};

// An argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Integrator, fit, or estimator failure.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  ConfigError(std::string path, const std::string& what)
      : Error(path.empty() ? what : path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace pdc

#endif  // PDC_ERRORS_HPP
