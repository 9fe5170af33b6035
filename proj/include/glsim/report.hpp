#pragma once

// ExperimentReport and the JSON encodings shared by the studies and the CLI.
// Keys are emitted in insertion order so output is stable across runs.

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "glsim/error.hpp"
#include "glsim/geometry.hpp"
#include "glsim/initial_data.hpp"
#include "glsim/model.hpp"
#include "glsim/stepper.hpp"

namespace glsim {

using ojson = nlohmann::ordered_json;

inline constexpr const char* kReportSchema = "glsim-report-v1";

/// Non-finite doubles are written as null and read back as NaN.
inline ojson number(double v) { return std::isfinite(v) ? ojson(v) : ojson(nullptr); }
inline double read_number(const ojson& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

struct Check {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  std::string comparison;  // one of "<=", "<", ">=", ">"
  bool pass = false;

  static Check make(std::string name, double value, std::string comparison, double threshold) {
    bool ok = false;
    if (comparison == "<=") ok = value <= threshold;
    else if (comparison == "<") ok = value < threshold;
    else if (comparison == ">=") ok = value >= threshold;
    else if (comparison == ">") ok = value > threshold;
    return {std::move(name), value, threshold, std::move(comparison), ok};
  }

  bool operator==(const Check&) const = default;
};

struct ExperimentReport {
  std::string name;
  ojson parameters = ojson::object();
  std::vector<ojson> cases;
  ojson fits = ojson::object();  // fitted orders, slopes and rates
  std::vector<Check> checks;
  std::vector<std::string> notes;
  std::optional<double> wall_clock_seconds;

  /// True iff every check passes; a report without checks (all cases
  /// degenerate) passes vacuously.
  bool passed() const {
    for (const auto& c : checks) {
      if (!c.pass) return false;
    }
    return true;
  }

  void add_check(std::string check_name, double value, std::string comparison, double threshold) {
    checks.push_back(Check::make(std::move(check_name), value, std::move(comparison), threshold));
  }

  ojson to_json() const {
    ojson j;
    j["schema"] = kReportSchema;
    j["name"] = name;
    j["parameters"] = parameters;
    j["cases"] = cases;
    j["fits"] = fits;
    ojson cj = ojson::array();
    for (const auto& c : checks) {
      cj.push_back({{"name", c.name},
                    {"value", number(c.value)},
                    {"comparison", c.comparison},
                    {"threshold", number(c.threshold)},
                    {"pass", c.pass}});
    }
    j["checks"] = std::move(cj);
    j["notes"] = notes;
    j["passed"] = passed();
    if (wall_clock_seconds) j["wall_clock_seconds"] = *wall_clock_seconds;
    return j;
  }

  static ExperimentReport from_json(const ojson& j) {
    if (!j.is_object() || j.value("schema", "") != kReportSchema) {
      throw Error(ErrorKind::parse_error, std::string("report schema must be ") + kReportSchema);
    }
    ExperimentReport r;
    r.name = j.at("name").get<std::string>();
    r.parameters = j.at("parameters");
    for (const auto& c : j.at("cases")) r.cases.push_back(c);
    r.fits = j.at("fits");
    for (const auto& c : j.at("checks")) {
      r.checks.push_back({c.at("name").get<std::string>(), read_number(c.at("value")),
                          read_number(c.at("threshold")), c.at("comparison").get<std::string>(),
                          c.at("pass").get<bool>()});
    }
    for (const auto& n : j.at("notes")) r.notes.push_back(n.get<std::string>());
    if (j.contains("wall_clock_seconds")) r.wall_clock_seconds = j["wall_clock_seconds"].get<double>();
    return r;
  }
};

// ---------------------------------------------------------------------------
// Parameter encodings (write-only; the CLI owns parsing).

inline ojson to_json(const RadialGrid& grid) {
  return {{"N", grid.dim()}, {"r0", grid.r0()}, {"r1", grid.r1()}, {"M", grid.cells()}};
}

inline ojson to_json(const ModelParams& p) {
  return {{"lambda", p.lambda}, {"alpha", p.alpha}, {"kappa", p.kappa},
          {"beta", p.beta},     {"gamma", p.gamma}, {"p", p.p}};
}

inline ojson to_json(const FeedbackSpec& f) {
  return {{"family", to_string(f.family())}, {"m", f.m()}, {"M", f.M()}};
}

inline ojson to_json(const SchemeConfig& s) {
  return {{"bc_variant", to_string(s.variant)},
          {"dt", s.dt},
          {"T", s.T},
          {"boundary_order", s.boundary_order},
          {"nonlinear_treatment", to_string(s.nonlinear)},
          {"feedback", to_json(s.feedback)}};
}

inline ojson to_json(const InitialSpec& s) {
  ojson j{{"family", to_string(s.family)}};
  switch (s.family) {
    case InitialFamily::bump:
      j["amplitude"] = s.amplitude;
      j["phase"] = s.phase;
      j["center"] = s.center;
      j["width"] = s.width;
      break;
    case InitialFamily::mode:
      j["amplitude"] = s.amplitude;
      j["phase"] = s.phase;
      j["mode"] = s.mode;
      break;
    default: break;
  }
  if (s.noise > 0.0) {
    j["noise"] = s.noise;
    j["seed"] = s.seed;
  }
  return j;
}

}  // namespace glsim
