#pragma once

// Command implementations behind tools/glsim.cpp. They take a parsed config
// and output streams so tests can drive them in-process.
//
// Exit codes: 0 success or all checks pass; 1 usage, config or failed
// feedback assumption; 2 numerical failure (Blowup, NonConvergence,
// ZeroPivot) or an experiment whose checks fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "glsim/config.hpp"
#include "glsim/diagnostics.hpp"
#include "glsim/discrete_ops.hpp"
#include "glsim/error.hpp"
#include "glsim/experiments.hpp"
#include "glsim/geometry.hpp"
#include "glsim/model.hpp"
#include "glsim/report.hpp"
#include "glsim/stepper.hpp"

namespace glsim {

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitNumerical = 2 };

struct CommandOptions {
  std::string csv_path;   // overrides output.csv_path when set
  std::string json_path;  // overrides output.json_path when set
  bool verbose = false;
  bool timing = false;  // adds wall-clock fields; off by default for reproducible output
};

inline const char* kCsvHeader =
    "t,V_norm,F,E,L2_interior,Lp1_interior,bd_L2,bd_Lp1,cum_ut_bd,cum_lap,cum_L2p,cum_flux";

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// One CSV line (no newline). Norm columns are plain norms; cum_* columns
/// are the time integrals of the squared or powered norms kept by the ledger.
inline std::string csv_row(const LedgerRow& r, double p) {
  const double e = 1.0 / (p + 1.0);
  const double fields[] = {r.t,
                           r.v_norm,
                           r.F,
                           r.E,
                           r.l2_interior,
                           std::pow(r.lp1_interior, e),
                           std::sqrt(r.bd_l2_sq),
                           std::pow(r.bd_lp1, e),
                           r.cum_ut_bd,
                           r.cum_lap,
                           r.cum_l2p,
                           r.cum_flux};
  std::string line;
  for (std::size_t k = 0; k < std::size(fields); ++k) {
    if (k) line += ',';
    line += format_double(fields[k]);
  }
  return line;
}

/// Writes rows at every `stride`-th step (including step 0) and the final step.
inline void write_csv(std::ostream& out, const EnergyLedger& ledger, std::size_t stride) {
  out << kCsvHeader << '\n';
  const auto& rows = ledger.rows();
  for (std::size_t n = 0; n < rows.size(); ++n) {
    if (n % stride == 0 || n + 1 == rows.size()) out << csv_row(rows[n], ledger.params().p) << '\n';
  }
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::validation_error, std::vector<Issue>{{"output", "cannot write " + path.string()}});
  f << content;
  if (!f) throw Error(ErrorKind::validation_error, std::vector<Issue>{{"output", "write failed for " + path.string()}});
}

inline std::string dump(const ojson& j) { return j.dump(2) + "\n"; }

/// Maps an exception escaping a command to an exit code with a message on err.
inline int report_failure(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.is_numerical() ? kExitNumerical : kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}

inline ojson config_json(const RunConfig& cfg, const RadialGrid& grid) {
  return {{"domain", to_json(grid)},
          {"params", to_json(cfg.params)},
          {"scheme", to_json(cfg.scheme)},
          {"initial", to_json(cfg.initial)},
          {"sample_stride", cfg.sample_stride}};
}

// ---------------------------------------------------------------------------

inline int cmd_simulate(const RunConfig& cfg, const CommandOptions& opt, std::ostream& out,
                        std::ostream& err) {
  return report_failure(err, [&] {
    const auto t0 = std::chrono::steady_clock::now();
    const RadialGrid grid = cfg.grid();
    ModelParams params = cfg.params;
    params.dim = grid.dim();
    const ComplexField u0 = make_initial(grid, cfg.initial);
    const double compat = compatibility_residual(u0, grid, params);
    if (compat > 1e-8) {
      err << "warning: initial data violate the compatibility condition at r1 (residual "
          << format_double(compat) << ")\n";
    }

    StepObserver observer;
    if (opt.verbose) {
      observer = [&](const StepState& s, std::size_t n) {
        err << "step " << n << " t=" << format_double(s.t) << " V=" << format_double(norm_v(s.u, grid))
            << '\n';
      };
    }
    const RunResult r = run(grid, params, cfg.scheme, u0, cfg.sample_stride, observer);
    const auto& rows = r.ledger.rows();

    const std::string csv_path = opt.csv_path.empty() ? cfg.csv_path : opt.csv_path;
    const std::string json_path = opt.json_path.empty() ? cfg.json_path : opt.json_path;
    if (!csv_path.empty()) {
      std::ostringstream csv;
      write_csv(csv, r.ledger, cfg.sample_stride);
      write_text_file(csv_path, csv.str());
    }

    const LedgerRow& last = rows.back();
    ojson summary;
    summary["schema"] = kReportSchema;
    summary["kind"] = "simulation";
    summary["config"] = config_json(cfg, grid);
    summary["steps"] = rows.size() - 1;
    summary["final"] = {{"t", last.t},
                        {"V_norm", last.v_norm},
                        {"F", last.F},
                        {"E", last.E},
                        {"L2_interior", last.l2_interior},
                        {"bd_L2", std::sqrt(last.bd_l2_sq)},
                        {"cum_flux", last.cum_flux}};

    const auto t = r.ledger.column(&LedgerRow::t);
    const auto F = r.ledger.column(&LedgerRow::F);
    try {
      const DecayFit fit = decay_rate_fit(t, F, 1e-10 * std::max(F.front(), 1e-300));
      summary["decay_fit"] = {{"rate", fit.rate}, {"r_squared", fit.r_squared}, {"samples", fit.samples}};
    } catch (const Error&) {
      summary["decay_fit"] = nullptr;
    }

    ojson violations;
    violations["compatibility_residual"] = compat;
    double max_e = -std::numeric_limits<double>::infinity();
    for (std::size_t n = 1; n < rows.size(); ++n) max_e = std::max(max_e, rows[n].E - rows[n - 1].E);
    violations["max_E_step_increase"] = number(max_e);
    if (params.gamma < 0.0) {
      const double E0 = rows.front().E;
      const double rate = -params.gamma;
      const BoundCheck bc = bound_check(t, F, [&](double s) { return E0 * std::exp(-rate * s); });
      violations["decay_bound_relative_violation"] = number(bc.max_relative_violation);
    }
    summary["violations"] = violations;
    if (opt.timing) {
      summary["runtime_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }

    if (!json_path.empty()) write_text_file(json_path, dump(summary));
    else out << dump(summary);
    return static_cast<int>(kExitOk);
  });
}

inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"linear", "stabilization", "inviscid", "equivalence",
                                              "manufactured", "energy"};
  return names;
}

/// Runs the named study on the config and returns its report.
inline ExperimentReport run_experiment(const std::string& name, const RunConfig& cfg, bool timing) {
  const RadialGrid grid = cfg.grid();
  const ExperimentSettings& ex = cfg.experiment;
  return timed_study(timing, [&]() -> ExperimentReport {
    if (name == "linear") {
      LinearSuiteOptions o;
      o.t_short = ex.t_short;
      o.t_long = ex.t_long;
      return linear_suite(grid, cfg.params, cfg.scheme, cfg.initial, o);
    }
    if (name == "stabilization") {
      StabilizationOptions o;
      o.window_start = ex.window_start;
      o.x0_offset = ex.x0_offset;
      const std::vector<double> gammas =
          ex.gamma_values.empty() ? std::vector<double>{cfg.params.gamma} : ex.gamma_values;
      return stabilization_study(grid, cfg.params, cfg.scheme, cfg.initial, gammas, o);
    }
    if (name == "inviscid") return inviscid_study(grid, cfg.params, cfg.scheme, cfg.initial, ex.epsilon_list);
    if (name == "equivalence") {
      return equivalence_study(grid, cfg.params, cfg.scheme, cfg.initial, {ex.levels, 1.0});
    }
    if (name == "manufactured") {
      const double min_order = cfg.scheme.boundary_order == 2 ? 1.8 : 0.9;
      return manufactured_solution_study(grid, cfg.params, cfg.scheme, {ex.levels, min_order});
    }
    if (name == "energy") {
      return energy_monotonicity_study(grid, cfg.params, cfg.scheme, cfg.initial, {std::min(ex.levels, 3)});
    }
    throw Error(ErrorKind::validation_error, std::vector<Issue>{{"experiment", "unknown experiment \"" + name + "\""}});
  });
}

inline int cmd_experiment(const std::string& name, const RunConfig& cfg, const CommandOptions& opt,
                          std::ostream& out, std::ostream& err) {
  return report_failure(err, [&] {
    const ExperimentReport rep = run_experiment(name, cfg, opt.timing);
    const std::string json_path = opt.json_path.empty() ? cfg.json_path : opt.json_path;
    if (!json_path.empty()) write_text_file(json_path, dump(rep.to_json()));
    else out << dump(rep.to_json());
    if (opt.verbose) {
      for (const auto& c : rep.checks) {
        err << (c.pass ? "PASS " : "FAIL ") << c.name << " = " << format_double(c.value) << ' '
            << c.comparison << ' ' << format_double(c.threshold) << '\n';
      }
    }
    return rep.passed() ? static_cast<int>(kExitOk) : static_cast<int>(kExitNumerical);
  });
}

inline int cmd_check(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return report_failure(err, [&] {
    const RadialGrid grid = cfg.grid();
    ModelParams params = cfg.params;
    params.dim = grid.dim();
    const AssumptionReport fb = assumption_check(cfg.scheme.feedback, 2000);
    const ComplexField u0 = make_initial(grid, cfg.initial);
    const double compat = compatibility_residual(u0, grid, params);
    const GeometricConditionReport geo = geometric_condition_check(grid, cfg.experiment.x0_offset);

    out << "feedback: family=" << to_string(cfg.scheme.feedback.family()) << " m_est=" << format_double(fb.m_est)
        << " M_est=" << format_double(fb.M_est) << " inverse_m_est=" << format_double(fb.inverse_m_est)
        << " inverse_M_est=" << format_double(fb.inverse_M_est) << " max_imag=" << format_double(fb.max_imag)
        << " inverse_ok=" << (fb.inverse_ok ? "true" : "false") << " -> " << (fb.pass ? "pass" : "FAIL")
        << '\n';
    out << "compatibility: residual=" << format_double(compat)
        << (compat > 1e-8 ? " (warning: incompatible initial data)" : "") << '\n';
    out << "geometric: inner_max=" << format_double(geo.inner_max) << " outer_min=" << format_double(geo.outer_min)
        << " -> " << (geo.holds ? "holds" : "fails") << '\n';
    return fb.pass ? static_cast<int>(kExitOk) : static_cast<int>(kExitConfig);
  });
}

}  // namespace glsim
