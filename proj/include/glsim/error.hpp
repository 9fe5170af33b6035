#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace glsim {

enum class ErrorKind {
  invalid_dimension,
  invalid_radii,
  too_coarse,
  non_convergence,
  zero_pivot,
  blowup,
  insufficient_data,
  parse_error,
  validation_error,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_dimension: return "InvalidDimension";
    case ErrorKind::invalid_radii: return "InvalidRadii";
    case ErrorKind::too_coarse: return "TooCoarse";
    case ErrorKind::non_convergence: return "NonConvergence";
    case ErrorKind::zero_pivot: return "ZeroPivot";
    case ErrorKind::blowup: return "Blowup";
    case ErrorKind::insufficient_data: return "InsufficientData";
    case ErrorKind::parse_error: return "ParseError";
    case ErrorKind::validation_error: return "ValidationError";
  }
  return "Unknown";
}

/// One failed constraint, keyed by the dotted config path it belongs to.
struct Issue {
  std::string key;
  std::string message;
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  Error(ErrorKind kind, std::vector<Issue> issues)
      : std::runtime_error(format_issues(kind, issues)), kind_(kind), issues_(std::move(issues)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::vector<Issue>& issues() const noexcept { return issues_; }

  /// Numerical failures map to CLI exit code 2, everything else to 1.
  bool is_numerical() const noexcept {
    return kind_ == ErrorKind::non_convergence || kind_ == ErrorKind::zero_pivot ||
           kind_ == ErrorKind::blowup;
  }

 private:
  static std::string format_issues(ErrorKind kind, const std::vector<Issue>& issues) {
    std::string out = to_string(kind);
    for (const auto& issue : issues) {
      out += "\n  " + issue.key + ": " + issue.message;
    }
    return out;
  }

  ErrorKind kind_;
  std::vector<Issue> issues_;
};

}  // namespace glsim
