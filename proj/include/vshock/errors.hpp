#pragma once

// Error types shared across the library.  Every failure that can reach a
// caller carries a kind (used by the CLI to pick an exit code), a short
// message, and a flat key/value context so tools can report failures in a
// machine-readable way.

#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

namespace vshock {

enum class error_kind {
  validation,  // bad user input: scenario files, CLI arguments, parameter ranges
  numerical,   // CFL violation, divergent iteration, NaN contamination, ...
  io           // filesystem failures while writing outputs
};

inline const char* to_string(error_kind k) {
  switch (k) {
    case error_kind::validation: return "validation";
    case error_kind::numerical: return "numerical";
    case error_kind::io: return "io";
  }
  return "unknown";
}

class error : public std::runtime_error {
 public:
  error(error_kind kind, std::string message,
        std::map<std::string, std::string> context = {})
      : std::runtime_error(message),
        kind_(kind),
        message_(std::move(message)),
        context_(std::move(context)) {}

  error_kind kind() const { return kind_; }
  const std::string& message() const { return message_; }
  const std::map<std::string, std::string>& context() const { return context_; }

 private:
  error_kind kind_;
  std::string message_;
  std::map<std::string, std::string> context_;
};

class validation_error : public error {
 public:
  explicit validation_error(std::string message,
                            std::map<std::string, std::string> context = {})
      : error(error_kind::validation, std::move(message), std::move(context)) {}
};

class numerical_error : public error {
 public:
  explicit numerical_error(std::string message,
                           std::map<std::string, std::string> context = {})
      : error(error_kind::numerical, std::move(message), std::move(context)) {}
};

class io_error : public error {
 public:
  explicit io_error(std::string message,
                    std::map<std::string, std::string> context = {})
      : error(error_kind::io, std::move(message), std::move(context)) {}
};

// Format a double with full precision for error contexts.
inline std::string ctx_num(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

}  // namespace vshock
