#pragma once

// RunConfig: the JSON front door. Every violation is collected before
// anything is thrown, so a bad file is reported in one pass.
//
// {
//   "domain":   {"N": 1, "r0": 0, "r1": 1, "M": 128},
//   "params":   {"lambda": 1, "alpha": 1, "kappa": 0, "beta": 0, "gamma": 0, "p": 3},
//   "scheme":   {"bc_variant": "dynamic", "dt": 1e-3, "T": 1, "boundary_order": 2,
//                "nonlinear_treatment": "explicit-AB2"},
//   "feedback": {"family": "identity", "m": 1, "M": 1, "coefficients": []},
//   "initial":  {"family": "bump", "parameters": {...}, "seed": 1},
//   "output":   {"csv_path": "", "json_path": "", "sample_stride": 10},
//   "experiment": {"gamma_values": [...], "epsilon_list": [...], "levels": 4, ...}
// }

#include <cmath>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "glsim/error.hpp"
#include "glsim/geometry.hpp"
#include "glsim/initial_data.hpp"
#include "glsim/model.hpp"
#include "glsim/stepper.hpp"

namespace glsim {

struct ExperimentSettings {
  std::vector<double> gamma_values;  // empty: use params.gamma
  std::vector<double> epsilon_list{1e-1, 3e-2, 1e-2, 3e-3, 1e-3};
  int levels = 4;
  double t_short = 4.0;
  double t_long = 8.0;
  double window_start = 0.25;
  double x0_offset = 0.0;
};

struct RunConfig {
  int dim = 1;
  double r0 = 0.0;
  double r1 = 1.0;
  std::size_t cells = 128;
  ModelParams params;
  SchemeConfig scheme;
  std::vector<double> feedback_coefficients;
  InitialSpec initial;
  std::string initial_path;
  std::string csv_path;
  std::string json_path;
  std::size_t sample_stride = 10;
  ExperimentSettings experiment;

  RadialGrid grid() const { return build_grid(dim, r0, r1, cells); }
};

namespace detail {

using json = nlohmann::json;

class ConfigReader {
 public:
  std::vector<Issue> issues;

  void only(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      bool known = false;
      for (const char* a : allowed) known = known || it.key() == a;
      if (!known) issues.push_back({join(path, it.key()), "unknown key"});
    }
  }

  /// Returns the sub-object at key, or an empty object if absent or mistyped.
  json section(const json& obj, const std::string& path, const char* key) {
    if (!obj.contains(key)) return json::object();
    const json& v = obj.at(key);
    if (!v.is_object()) {
      issues.push_back({join(path, key), "expected an object"});
      return json::object();
    }
    return v;
  }

  void number(const json& obj, const std::string& path, const char* key, double& out) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_number()) {
      issues.push_back({join(path, key), "expected a number"});
      return;
    }
    out = v.get<double>();
    if (!std::isfinite(out)) issues.push_back({join(path, key), "must be finite"});
  }

  template <typename Int>
  void integer(const json& obj, const std::string& path, const char* key, Int& out) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_number_integer()) {
      issues.push_back({join(path, key), "expected an integer"});
      return;
    }
    const auto raw = v.get<long long>();
    if constexpr (std::is_unsigned_v<Int>) {
      if (raw < 0) {
        issues.push_back({join(path, key), "must be >= 0"});
        return;
      }
    }
    out = static_cast<Int>(raw);
  }

  void text(const json& obj, const std::string& path, const char* key, std::string& out) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_string()) {
      issues.push_back({join(path, key), "expected a string"});
      return;
    }
    out = v.get<std::string>();
  }

  void numbers(const json& obj, const std::string& path, const char* key, std::vector<double>& out) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_array()) {
      issues.push_back({join(path, key), "expected an array of numbers"});
      return;
    }
    out.clear();
    for (const auto& x : v) {
      if (!x.is_number() || !std::isfinite(x.get<double>())) {
        issues.push_back({join(path, key), "expected an array of finite numbers"});
        return;
      }
      out.push_back(x.get<double>());
    }
  }

  void fail(std::string key, std::string message) { issues.push_back({std::move(key), std::move(message)}); }

 private:
  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }
};

inline ComplexField load_initial_values(const std::filesystem::path& file, std::vector<Issue>& issues) {
  std::ifstream in(file);
  if (!in) {
    issues.push_back({"initial.parameters.path", "cannot open " + file.string()});
    return {};
  }
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("re") || !j["re"].is_array()) {
    issues.push_back({"initial.parameters.path", "expected a JSON object with arrays \"re\" and \"im\""});
    return {};
  }
  const json& re = j["re"];
  const json im = j.value("im", json::array());
  if (!im.is_array() || (!im.empty() && im.size() != re.size())) {
    issues.push_back({"initial.parameters.path", "\"im\" must match \"re\" in length"});
    return {};
  }
  ComplexField u(re.size());
  for (std::size_t k = 0; k < re.size(); ++k) {
    if (!re[k].is_number() || (!im.empty() && !im[k].is_number())) {
      issues.push_back({"initial.parameters.path", "non-numeric entry at index " + std::to_string(k)});
      return {};
    }
    u[k] = {re[k].get<double>(), im.empty() ? 0.0 : im[k].get<double>()};
  }
  return u;
}

}  // namespace detail

/// Parses and validates a configuration. Relative file paths inside the
/// config resolve against `base_dir`. Throws ParseError for malformed JSON and
/// ValidationError listing every violation otherwise.
inline RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {}) {
  using detail::json;
  json root = json::parse(text, nullptr, false);
  if (root.is_discarded()) throw Error(ErrorKind::parse_error, "malformed JSON");
  if (!root.is_object()) throw Error(ErrorKind::parse_error, "top level must be an object");

  RunConfig cfg;
  detail::ConfigReader rd;
  rd.only(root, "", {"domain", "params", "scheme", "feedback", "initial", "output", "experiment"});

  // domain
  const json domain = rd.section(root, "", "domain");
  rd.only(domain, "domain", {"N", "r0", "r1", "M"});
  rd.integer(domain, "domain", "N", cfg.dim);
  rd.number(domain, "domain", "r0", cfg.r0);
  rd.number(domain, "domain", "r1", cfg.r1);
  rd.integer(domain, "domain", "M", cfg.cells);
  if (cfg.dim < 1 || cfg.dim > 3) rd.fail("domain.N", "must be 1, 2 or 3");
  if (!(cfg.r0 >= 0.0)) rd.fail("domain.r0", "must be >= 0");
  if (!(cfg.r1 > cfg.r0)) rd.fail("domain.r1", "must exceed r0");
  if (cfg.dim >= 2 && cfg.r0 == 0.0) rd.fail("domain.r0", "must be > 0 for N >= 2 (annulus)");
  if (cfg.cells < 4) rd.fail("domain.M", "must be >= 4");

  // params
  const json params = rd.section(root, "", "params");
  rd.only(params, "params", {"lambda", "alpha", "kappa", "beta", "gamma", "p"});
  rd.number(params, "params", "lambda", cfg.params.lambda);
  rd.number(params, "params", "alpha", cfg.params.alpha);
  rd.number(params, "params", "kappa", cfg.params.kappa);
  rd.number(params, "params", "beta", cfg.params.beta);
  rd.number(params, "params", "gamma", cfg.params.gamma);
  rd.number(params, "params", "p", cfg.params.p);
  cfg.params.dim = cfg.dim;
  for (auto& issue : validate(cfg.params)) rd.issues.push_back(std::move(issue));

  // scheme
  const json scheme = rd.section(root, "", "scheme");
  rd.only(scheme, "scheme", {"bc_variant", "dt", "T", "boundary_order", "nonlinear_treatment"});
  std::string variant = "dynamic", nonlinear = "explicit-AB2";
  rd.text(scheme, "scheme", "bc_variant", variant);
  rd.text(scheme, "scheme", "nonlinear_treatment", nonlinear);
  rd.number(scheme, "scheme", "dt", cfg.scheme.dt);
  rd.number(scheme, "scheme", "T", cfg.scheme.T);
  rd.integer(scheme, "scheme", "boundary_order", cfg.scheme.boundary_order);
  if (variant == "dynamic") cfg.scheme.variant = BcVariant::dynamic;
  else if (variant == "wentzell") cfg.scheme.variant = BcVariant::wentzell;
  else rd.fail("scheme.bc_variant", "must be \"dynamic\" or \"wentzell\"");
  if (nonlinear == "explicit-AB2") cfg.scheme.nonlinear = NonlinearTreatment::ab2;
  else if (nonlinear == "picard-1") cfg.scheme.nonlinear = NonlinearTreatment::picard1;
  else rd.fail("scheme.nonlinear_treatment", "must be \"explicit-AB2\" or \"picard-1\"");

  // feedback
  const json feedback = rd.section(root, "", "feedback");
  rd.only(feedback, "feedback", {"family", "m", "M", "coefficients"});
  std::string family = "identity";
  double m = 1.0, M = 1.0;
  rd.text(feedback, "feedback", "family", family);
  rd.number(feedback, "feedback", "m", m);
  rd.number(feedback, "feedback", "M", M);
  rd.numbers(feedback, "feedback", "coefficients", cfg.feedback_coefficients);
  if (family == "identity") {
    cfg.scheme.feedback = FeedbackSpec::identity();
  } else if (family == "saturating" || family == "custom") {
    if (!(m > 0.0)) rd.fail("feedback.m", "must be > 0");
    if (!(M >= m)) rd.fail("feedback.M", "must be >= m");
    if (family == "saturating") {
      cfg.scheme.feedback = FeedbackSpec::saturating(m, M);
    } else {
      if (cfg.feedback_coefficients.empty()) {
        rd.fail("feedback.coefficients", "custom feedback needs polynomial coefficients");
      }
      cfg.scheme.feedback = FeedbackSpec::polynomial(cfg.feedback_coefficients, m, M);
    }
  } else {
    rd.fail("feedback.family", "must be \"identity\", \"saturating\" or \"custom\"");
  }
  for (auto& issue : validate(cfg.scheme)) {
    if (issue.key == "scheme.bc_variant" && family != "identity") issue.key = "feedback.family";
    rd.issues.push_back(std::move(issue));
  }

  // initial
  const json initial = rd.section(root, "", "initial");
  rd.only(initial, "initial", {"family", "parameters", "seed"});
  std::string ifamily = "bump";
  rd.text(initial, "initial", "family", ifamily);
  rd.integer(initial, "initial", "seed", cfg.initial.seed);
  const json ip = rd.section(initial, "initial", "parameters");
  if (ifamily == "bump") {
    cfg.initial.family = InitialFamily::bump;
    rd.only(ip, "initial.parameters", {"amplitude", "phase", "center", "width", "noise"});
    rd.number(ip, "initial.parameters", "center", cfg.initial.center);
    rd.number(ip, "initial.parameters", "width", cfg.initial.width);
    if (!(cfg.initial.width > 0.0)) rd.fail("initial.parameters.width", "must be > 0");
  } else if (ifamily == "mode") {
    cfg.initial.family = InitialFamily::mode;
    rd.only(ip, "initial.parameters", {"amplitude", "phase", "mode", "noise"});
    rd.integer(ip, "initial.parameters", "mode", cfg.initial.mode);
    if (cfg.initial.mode < 1) rd.fail("initial.parameters.mode", "must be >= 1");
  } else if (ifamily == "zero") {
    cfg.initial.family = InitialFamily::zero;
    rd.only(ip, "initial.parameters", {"noise"});
  } else if (ifamily == "file") {
    cfg.initial.family = InitialFamily::values;
    rd.only(ip, "initial.parameters", {"path"});
    rd.text(ip, "initial.parameters", "path", cfg.initial_path);
    if (cfg.initial_path.empty()) {
      rd.fail("initial.parameters.path", "file family needs a path");
    } else {
      std::filesystem::path file(cfg.initial_path);
      if (file.is_relative()) file = base_dir / file;
      cfg.initial.values = detail::load_initial_values(file, rd.issues);
      if (!cfg.initial.values.empty() && cfg.initial.values.size() != cfg.cells + 1) {
        rd.fail("initial.parameters.path", "file has " + std::to_string(cfg.initial.values.size()) +
                                               " values, grid has " + std::to_string(cfg.cells + 1) + " nodes");
      }
    }
  } else {
    rd.fail("initial.family", "must be \"bump\", \"mode\", \"zero\" or \"file\"");
  }
  rd.number(ip, "initial.parameters", "amplitude", cfg.initial.amplitude);
  rd.number(ip, "initial.parameters", "phase", cfg.initial.phase);
  rd.number(ip, "initial.parameters", "noise", cfg.initial.noise);
  if (!(cfg.initial.noise >= 0.0)) rd.fail("initial.parameters.noise", "must be >= 0");

  // output
  const json output = rd.section(root, "", "output");
  rd.only(output, "output", {"csv_path", "json_path", "sample_stride"});
  rd.text(output, "output", "csv_path", cfg.csv_path);
  rd.text(output, "output", "json_path", cfg.json_path);
  rd.integer(output, "output", "sample_stride", cfg.sample_stride);
  if (cfg.sample_stride < 1) rd.fail("output.sample_stride", "must be >= 1");

  // experiment
  const json ex = rd.section(root, "", "experiment");
  rd.only(ex, "experiment",
          {"gamma_values", "epsilon_list", "levels", "t_short", "t_long", "window_start", "x0_offset"});
  rd.numbers(ex, "experiment", "gamma_values", cfg.experiment.gamma_values);
  rd.numbers(ex, "experiment", "epsilon_list", cfg.experiment.epsilon_list);
  rd.integer(ex, "experiment", "levels", cfg.experiment.levels);
  rd.number(ex, "experiment", "t_short", cfg.experiment.t_short);
  rd.number(ex, "experiment", "t_long", cfg.experiment.t_long);
  rd.number(ex, "experiment", "window_start", cfg.experiment.window_start);
  rd.number(ex, "experiment", "x0_offset", cfg.experiment.x0_offset);
  if (cfg.experiment.levels < 3 || cfg.experiment.levels > 8) rd.fail("experiment.levels", "must be in [3, 8]");
  if (!(cfg.experiment.window_start >= 0.0 && cfg.experiment.window_start < 1.0)) {
    rd.fail("experiment.window_start", "must be in [0, 1)");
  }

  if (!rd.issues.empty()) throw Error(ErrorKind::validation_error, std::move(rd.issues));
  return cfg;
}

inline RunConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorKind::parse_error, "cannot read " + file.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), file.parent_path());
}

}  // namespace glsim
