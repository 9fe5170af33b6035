#pragma once

// Studies that turn each qualitative property of the model into pass/fail
// checks backed by stored metrics. Independent simulations inside a study run
// concurrently; results are reduced in case order, so reports are identical
// for any thread count.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "glsim/diagnostics.hpp"
#include "glsim/discrete_ops.hpp"
#include "glsim/error.hpp"
#include "glsim/geometry.hpp"
#include "glsim/initial_data.hpp"
#include "glsim/model.hpp"
#include "glsim/report.hpp"
#include "glsim/stepper.hpp"

namespace glsim {

// ---------------------------------------------------------------------------
// Case execution

template <typename R>
struct CaseOutcome {
  std::optional<R> value;
  std::exception_ptr error;

  const R& get() const {
    if (error) std::rethrow_exception(error);
    return *value;
  }
};

inline unsigned worker_count(std::size_t cases) {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::size_t>(cases, hw));
}

/// Runs fn(0..n-1) on up to hardware_concurrency threads.
template <typename R, typename Fn>
std::vector<CaseOutcome<R>> run_cases(std::size_t n, Fn&& fn) {
  std::vector<CaseOutcome<R>> out(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        out[i].value.emplace(fn(i));
      } catch (...) {
        out[i].error = std::current_exception();
      }
    }
  };
  const unsigned workers = worker_count(n);
  if (workers <= 1) {
    worker();
    return out;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  pool.clear();  // joins
  return out;
}

inline std::string describe(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const std::exception& ex) {
    return ex.what();
  } catch (...) {
    return "unknown error";
  }
}

inline RadialGrid refine(const RadialGrid& grid, int level) {
  return build_grid(grid.dim(), grid.r0(), grid.r1(), grid.cells() << level);
}

inline SchemeConfig refine(SchemeConfig scheme, int level) {
  scheme.dt /= static_cast<double>(1 << level);
  return scheme;
}

inline ModelParams with_dim(ModelParams p, const RadialGrid& grid) {
  p.dim = grid.dim();
  return p;
}

inline void require(std::vector<Issue>& issues, bool ok, const char* key, const char* message) {
  if (!ok) issues.push_back({key, message});
}

inline void throw_if(std::vector<Issue> issues) {
  if (!issues.empty()) throw Error(ErrorKind::validation_error, std::move(issues));
}

/// Forcing used by linear_suite when the scheme carries none: f vanishes on
/// Gamma_0 (so it lies in V) and g_b is a rotating boundary input.
inline Forcing default_linear_forcing(const RadialGrid& grid) {
  const double r0 = grid.r0();
  const double L = grid.r1() - r0;
  Forcing f;
  f.interior = [r0, L](double r, double t) {
    const double s = (r - r0) / L;
    return cplx{1.0, 0.5} * (s * (1.5 - s) * std::cos(3.0 * t));
  };
  f.boundary = [](double t) { return 0.5 * std::exp(cplx{0.0, 2.0 * t}); };
  return f;
}

// ---------------------------------------------------------------------------
// Linear suite

struct LinearSuiteOptions {
  double t_short = 4.0;
  double t_long = 8.0;
  double contraction_tol = 1e-10;
  double trace_change_tol = 0.01;
};

inline ExperimentReport linear_suite(const RadialGrid& grid, const ModelParams& params_in,
                                     const SchemeConfig& scheme, const InitialSpec& initial,
                                     const LinearSuiteOptions& opt = {}) {
  const ModelParams params = with_dim(params_in, grid);
  std::vector<Issue> issues;
  require(issues, params.kappa == 0.0 && params.beta == 0.0 && params.gamma == 0.0, "params",
          "linear suite needs kappa = beta = gamma = 0");
  require(issues, opt.t_long > opt.t_short && opt.t_short > 0.0, "experiment.t_long",
          "need 0 < t_short < t_long");
  throw_if(std::move(issues));

  ExperimentReport rep;
  rep.name = "linear";
  rep.parameters = {{"domain", to_json(grid)},
                    {"params", to_json(params)},
                    {"scheme", to_json(scheme)},
                    {"initial", to_json(initial)},
                    {"t_short", opt.t_short},
                    {"t_long", opt.t_long}};
  const ComplexField u0 = make_initial(grid, initial);
  const double v0 = norm_v(u0, grid);
  const double h = grid.h();

  SchemeConfig unforced = scheme;
  unforced.forcing = {};
  SchemeConfig forced = scheme;
  if (!forced.forcing.active()) forced.forcing = default_linear_forcing(grid);

  auto outcomes = run_cases<ojson>(3, [&](std::size_t i) -> ojson {
    if (i == 0) {
      double prev = v0, worst = -std::numeric_limits<double>::infinity();
      double worst_t = 0.0;
      run(grid, params, unforced, u0, 0, [&](const StepState& s, std::size_t) {
        const double v = norm_v(s.u, grid);
        if (v - prev > worst) {
          worst = v - prev;
          worst_t = s.t;
        }
        prev = v;
      });
      const double rel = v0 > 0.0 ? worst / v0 : worst;
      return {{"case", "contraction"}, {"max_step_increase", number(rel)}, {"at_t", worst_t},
              {"v_norm_0", v0}, {"v_norm_T", prev}};
    }
    if (i == 1) {
      SchemeConfig s = unforced;
      s.T = opt.t_long;
      const RunResult r = run(grid, params, s, u0, 0);
      double at_short = 0.0, t_found = 0.0;
      for (const auto& row : r.ledger.rows()) {
        if (row.t <= opt.t_short + 0.5 * s.dt) {
          at_short = row.cum_flux;
          t_found = row.t;
        }
      }
      const double at_long = r.ledger.back().cum_flux;
      const double change = at_long > 0.0 ? std::abs(at_long - at_short) / at_long : 0.0;
      return {{"case", "hidden_regularity"}, {"t_short", t_found}, {"t_long", r.ledger.back().t},
              {"cum_flux_short", at_short}, {"cum_flux_long", at_long}, {"relative_change", change}};
    }
    // Forced estimate with eta = 1/2, checked after every step.
    double int_f = 0.0, int_g = 0.0, min_slack = std::numeric_limits<double>::infinity();
    double worst_t = 0.0, lhs_T = 0.0, rhs_T = 0.0;
    const double S = grid.surface_measure();
    RunResult r = run(grid, params, forced, u0, 0, {});
    // Replay the ledger against the forcing integrals; forcing is sampled at
    // the step midpoints exactly as the stepper sampled it.
    const auto& rows = r.ledger.rows();
    for (std::size_t n = 1; n < rows.size(); ++n) {
      const double dt = rows[n].t - rows[n - 1].t;
      const double tm = rows[n - 1].t + 0.5 * dt;
      ComplexField f = sample(grid, [&](double rr) { return forced.forcing.f(rr, tm); });
      f[0] = 0.0;
      const double nf = norm_v(f, grid);
      int_f += dt * nf * nf;
      int_g += dt * S * std::norm(forced.forcing.g(tm));
      const double lhs = 0.25 * rows[n].v_norm * rows[n].v_norm + params.lambda * rows[n].cum_lap +
                         0.5 * rows[n].cum_flux;
      const double rhs = 0.5 * v0 * v0 + 0.5 * int_g + int_f;
      const double slack = rhs > 0.0 ? (rhs - lhs) / rhs : (lhs > 0.0 ? -1.0 : 0.0);
      if (slack < min_slack) {
        min_slack = slack;
        worst_t = rows[n].t;
      }
      lhs_T = lhs;
      rhs_T = rhs;
    }
    return {{"case", "forced_estimate"}, {"min_relative_slack", number(min_slack)}, {"at_t", worst_t},
            {"lhs_T", lhs_T}, {"rhs_T", rhs_T}};
  });

  for (const auto& o : outcomes) rep.cases.push_back(o.get());
  rep.add_check("contraction.max_step_increase", rep.cases[0]["max_step_increase"].get<double>(), "<=",
                opt.contraction_tol);
  rep.add_check("hidden_regularity.relative_change", rep.cases[1]["relative_change"].get<double>(), "<",
                opt.trace_change_tol);
  rep.add_check("forced_estimate.min_relative_slack",
                read_number(rep.cases[2]["min_relative_slack"]), ">=", -(h + scheme.dt));
  return rep;
}

// ---------------------------------------------------------------------------
// Energy monotonicity under joint refinement

struct EnergyStudyOptions {
  int levels = 3;
};

inline ExperimentReport energy_monotonicity_study(const RadialGrid& grid, const ModelParams& params_in,
                                                  const SchemeConfig& scheme, const InitialSpec& initial,
                                                  const EnergyStudyOptions& opt = {}) {
  const ModelParams params = with_dim(params_in, grid);
  std::vector<Issue> issues;
  require(issues, params.gamma == 0.0, "params.gamma", "energy study needs gamma = 0");
  require(issues, opt.levels >= 3, "experiment.levels", "need at least 3 levels");
  throw_if(std::move(issues));

  ExperimentReport rep;
  rep.name = "energy";
  rep.parameters = {{"domain", to_json(grid)},   {"params", to_json(params)},
                    {"scheme", to_json(scheme)}, {"initial", to_json(initial)},
                    {"levels", opt.levels}};

  struct Level {
    double h, dt, e0, max_increase;
  };
  auto outcomes = run_cases<Level>(static_cast<std::size_t>(opt.levels), [&](std::size_t k) {
    const RadialGrid g = refine(grid, static_cast<int>(k));
    const SchemeConfig s = refine(scheme, static_cast<int>(k));
    const ComplexField u0 = make_initial(g, initial);
    const RunResult r = run(g, params, s, u0, 0);
    const auto E = r.ledger.column(&LedgerRow::E);
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t n = 1; n < E.size(); ++n) worst = std::max(worst, E[n] - E[n - 1]);
    return Level{g.h(), s.dt, E.front(), worst};
  });

  std::vector<double> hs, inc;
  double e0 = 0.0;
  for (const auto& o : outcomes) {
    const Level& l = o.get();
    rep.cases.push_back({{"h", l.h}, {"dt", l.dt}, {"E_0", l.e0}, {"max_step_increase", l.max_increase}});
    hs.push_back(l.h);
    inc.push_back(l.max_increase);
    e0 = std::max(e0, l.e0);
  }
  const double floor = 1e-13 * std::max(e0, 1.0);
  const double largest = *std::max_element(inc.begin(), inc.end());
  if (largest <= floor) {
    rep.notes.push_back("E never increased beyond round-off at any level");
    rep.add_check("max_step_increase", largest, "<=", floor);
  } else {
    std::vector<double> clipped;
    for (double v : inc) clipped.push_back(std::max(v, floor));
    const double order = convergence_order(hs, clipped);
    rep.fits["increase_order"] = order;
    rep.add_check("increase_order", order, ">=", 1.0);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Stabilization

struct StabilizationOptions {
  double window_start = 0.25;  // fraction of T where the gamma = 0 fit begins
  double max_violation = 0.05;
  double rate_fraction = 0.9;  // gamma < 0: fitted rate must reach this fraction of |gamma|
  double r_squared_min = 0.99;
  double x0_offset = 0.0;
};

inline ExperimentReport stabilization_study(const RadialGrid& grid, const ModelParams& params_in,
                                            const SchemeConfig& scheme, const InitialSpec& initial,
                                            const std::vector<double>& gamma_values,
                                            const StabilizationOptions& opt = {}) {
  const ModelParams params = with_dim(params_in, grid);
  std::vector<Issue> issues;
  require(issues, params.beta > 0.0, "params.beta", "stabilization needs beta > 0");
  require(issues, params.kappa > 0.0, "params.kappa", "stabilization needs kappa > 0");
  require(issues, params.lambda > 0.0, "params.lambda", "stabilization needs lambda > 0");
  require(issues, global_exponent_range(params.p, params.dim), "params.p",
          "p outside the global existence range for this N");
  require(issues, !gamma_values.empty(), "experiment.gamma_values", "need at least one gamma");
  for (double g : gamma_values) {
    require(issues, g <= 0.0 && std::isfinite(g), "experiment.gamma_values", "every gamma must be <= 0");
  }
  const GeometricConditionReport geo = geometric_condition_check(grid, opt.x0_offset);
  const bool has_zero = std::find(gamma_values.begin(), gamma_values.end(), 0.0) != gamma_values.end();
  require(issues, !has_zero || geo.holds, "domain", "gamma = 0 needs the geometric condition");
  throw_if(std::move(issues));

  ExperimentReport rep;
  rep.name = "stabilization";
  rep.parameters = {{"domain", to_json(grid)},   {"params", to_json(params)},
                    {"scheme", to_json(scheme)}, {"initial", to_json(initial)},
                    {"gamma_values", gamma_values}, {"window_start", opt.window_start},
                    {"geometric_condition", {{"inner_max", geo.inner_max}, {"outer_min", geo.outer_min},
                                             {"holds", geo.holds}}}};
  const ComplexField u0 = make_initial(grid, initial);

  auto outcomes = run_cases<ojson>(gamma_values.size(), [&](std::size_t i) -> ojson {
    ModelParams p = params;
    p.gamma = gamma_values[i];
    const RunResult r = run(grid, p, scheme, u0, 0);
    const auto t = r.ledger.column(&LedgerRow::t);
    const auto F = r.ledger.column(&LedgerRow::F);
    const double F0 = F.front();
    ojson c{{"gamma", p.gamma}, {"F_0", F0}, {"F_T", F.back()}};
    if (!(F0 > 0.0)) {
      c["degenerate"] = true;
      return c;
    }
    c["degenerate"] = false;
    const double floor = 1e-10 * F0;
    if (p.gamma < 0.0) {
      const double E0 = initial_energy(u0, grid, p);
      const double rate = -p.gamma;
      const BoundCheck bc = bound_check(t, F, [&](double s) { return E0 * std::exp(-rate * s); });
      const DecayFit fit = decay_rate_fit(t, F, floor);
      c["E_0"] = E0;
      c["max_relative_violation"] = number(bc.max_relative_violation);
      c["worst_time"] = bc.worst_time;
      c["fitted_rate"] = fit.rate;
      c["r_squared"] = fit.r_squared;
      c["fit_samples"] = fit.samples;
    } else {
      std::vector<double> tw, Fw;
      const double t_start = opt.window_start * scheme.T;
      for (std::size_t n = 0; n < t.size(); ++n) {
        if (t[n] >= t_start - 1e-12) {
          tw.push_back(t[n]);
          Fw.push_back(F[n]);
        }
      }
      const DecayFit fit = decay_rate_fit(tw, Fw, floor);
      c["window"] = {t_start, scheme.T};
      c["fitted_rate"] = fit.rate;
      c["r_squared"] = fit.r_squared;
      c["fit_samples"] = fit.samples;
    }
    return c;
  });

  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const ojson& c = outcomes[i].get();
    rep.cases.push_back(c);
    if (c["degenerate"].get<bool>()) {
      rep.notes.push_back("gamma = " + std::to_string(gamma_values[i]) +
                          ": zero initial energy, excluded from the fits");
      continue;
    }
    const std::string tag = "gamma[" + std::to_string(i) + "]";
    const double g = gamma_values[i];
    rep.fits[tag] = {{"rate", c["fitted_rate"]}, {"r_squared", c["r_squared"]}};
    if (g < 0.0) {
      rep.add_check(tag + ".max_relative_violation", read_number(c["max_relative_violation"]), "<=",
                    opt.max_violation);
      rep.add_check(tag + ".fitted_rate", c["fitted_rate"].get<double>(), ">=", opt.rate_fraction * -g);
    } else {
      rep.add_check(tag + ".fitted_rate", c["fitted_rate"].get<double>(), ">", 0.0);
      rep.add_check(tag + ".r_squared", c["r_squared"].get<double>(), ">=", opt.r_squared_min);
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Inviscid limit

struct InviscidOptions {
  double slope_min = 0.8;
  double slope_max = 1.2;
};

inline ExperimentReport inviscid_study(const RadialGrid& grid, const ModelParams& params_in,
                                       const SchemeConfig& scheme, const InitialSpec& initial,
                                       const std::vector<double>& epsilons,
                                       const InviscidOptions& opt = {}) {
  const ModelParams params = with_dim(params_in, grid);
  std::vector<Issue> issues;
  require(issues, grid.dim() == 2, "domain.N", "inviscid study needs N = 2");
  require(issues, params.p == 3.0, "params.p", "inviscid study needs p = 3");
  require(issues, params.beta > 0.0, "params.beta", "inviscid study needs beta > 0");
  require(issues, epsilons.size() >= 3, "experiment.epsilon_list", "need at least 3 values");
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    require(issues, epsilons[i] > 0.0 && (i == 0 || epsilons[i] < epsilons[i - 1]),
            "experiment.epsilon_list", "values must be positive and strictly decreasing");
  }
  throw_if(std::move(issues));

  ExperimentReport rep;
  rep.name = "inviscid";
  rep.parameters = {{"domain", to_json(grid)},   {"params", to_json(params)},
                    {"scheme", to_json(scheme)}, {"initial", to_json(initial)},
                    {"epsilon_list", epsilons}};
  const ComplexField u0 = make_initial(grid, initial);

  // Case 0 is the Schrodinger reference (lambda = kappa = 0).
  auto outcomes = run_cases<ComplexField>(epsilons.size() + 1, [&](std::size_t i) {
    ModelParams p = params;
    p.lambda = i == 0 ? 0.0 : epsilons[i - 1];
    p.kappa = p.lambda;
    return run(grid, p, scheme, u0, 0).final_state;
  });

  if (outcomes[0].error) {
    rep.cases.push_back({{"epsilon", 0.0}, {"error", describe(outcomes[0].error)}});
    rep.add_check("slope_lower", std::numeric_limits<double>::quiet_NaN(), ">=", opt.slope_min);
    return rep;
  }
  const ComplexField& reference = *outcomes[0].value;
  rep.cases.push_back({{"epsilon", 0.0}, {"v_norm_T", norm_v(reference, grid)}});
  std::vector<double> eps, errs;
  bool failed = false;
  for (std::size_t i = 1; i < outcomes.size(); ++i) {
    if (outcomes[i].error) {
      rep.cases.push_back({{"epsilon", epsilons[i - 1]}, {"error", describe(outcomes[i].error)}});
      failed = true;
      continue;
    }
    const double e = norm_v_diff(*outcomes[i].value, reference, grid);
    rep.cases.push_back({{"epsilon", epsilons[i - 1]}, {"v_distance", e}});
    eps.push_back(epsilons[i - 1]);
    errs.push_back(e);
  }
  const bool all_zero = std::all_of(errs.begin(), errs.end(), [](double e) { return e == 0.0; });
  if (!failed && all_zero) {
    rep.notes.push_back("zero initial data: every run stays at zero");
    return rep;
  }
  double slope = std::numeric_limits<double>::quiet_NaN();
  if (!failed) slope = convergence_order(eps, errs);
  rep.fits["slope"] = number(slope);
  rep.add_check("slope_lower", slope, ">=", opt.slope_min);
  rep.add_check("slope_upper", slope, "<=", opt.slope_max);
  return rep;
}

// ---------------------------------------------------------------------------
// Dynamic / Wentzell equivalence

struct RefinementOptions {
  int levels = 4;
  double min_order = 1.0;
};

inline ExperimentReport equivalence_study(const RadialGrid& grid, const ModelParams& params_in,
                                          const SchemeConfig& scheme, const InitialSpec& initial,
                                          const RefinementOptions& opt = {}) {
  const ModelParams params = with_dim(params_in, grid);
  std::vector<Issue> issues;
  require(issues, scheme.feedback.is_identity(), "feedback.family", "equivalence needs identity feedback");
  require(issues, opt.levels >= 3, "experiment.levels", "need at least 3 levels");
  throw_if(std::move(issues));

  ExperimentReport rep;
  rep.name = "equivalence";
  rep.parameters = {{"domain", to_json(grid)},   {"params", to_json(params)},
                    {"scheme", to_json(scheme)}, {"initial", to_json(initial)},
                    {"levels", opt.levels}};

  struct Level {
    double h, dt, distance, at_t;
  };
  auto outcomes = run_cases<Level>(static_cast<std::size_t>(opt.levels), [&](std::size_t k) {
    const RadialGrid g = refine(grid, static_cast<int>(k));
    SchemeConfig dyn = refine(scheme, static_cast<int>(k));
    dyn.variant = BcVariant::dynamic;
    SchemeConfig wen = dyn;
    wen.variant = BcVariant::wentzell;
    const StepOperator op_d = assemble_step_operator(g, params, dyn);
    const StepOperator op_w = assemble_step_operator(g, params, wen);
    const ComplexField u0 = make_initial(g, initial);
    StepState a = StepState::initial(u0), b = StepState::initial(u0);
    double d = 0.0, at = 0.0;
    for (std::size_t n = 0; n < dyn.steps(); ++n) {
      a = step(a, op_d);
      b = step(b, op_w);
      const double va = norm_v(a.u, g), vb = norm_v(b.u, g);
      if (!std::isfinite(va) || !std::isfinite(vb) || va > kBlowupThreshold || vb > kBlowupThreshold) {
        throw Error(ErrorKind::blowup, "norm exceeded 1e12 at t = " + std::to_string(a.t));
      }
      const double dist = norm_v_diff(a.u, b.u, g);
      if (dist > d) {
        d = dist;
        at = a.t;
      }
    }
    return Level{g.h(), dyn.dt, d, at};
  });

  std::vector<double> hs, ds;
  for (const auto& o : outcomes) {
    const Level& l = o.get();
    rep.cases.push_back({{"h", l.h}, {"dt", l.dt}, {"max_v_distance", l.distance}, {"at_t", l.at_t}});
    hs.push_back(l.h);
    ds.push_back(l.distance);
  }
  if (std::all_of(ds.begin(), ds.end(), [](double d) { return d == 0.0; })) {
    rep.notes.push_back("both variants identical at every level");
    return rep;
  }
  const double order = convergence_order(hs, ds);
  rep.fits["order"] = order;
  rep.add_check("order", order, ">=", opt.min_order);
  return rep;
}

// ---------------------------------------------------------------------------
// Manufactured solution u*(r, t) = e^{-t} sin(pi (r - r0) / (r1 - r0))

struct ManufacturedSolution {
  double r0, L;
  int dim;

  double k() const { return std::numbers::pi / L; }
  double phi(double r) const { return std::sin(k() * (r - r0)); }
  double dphi(double r) const { return k() * std::cos(k() * (r - r0)); }
  double lap_phi(double r) const {
    const double radial = dim > 1 ? (dim - 1) / r * dphi(r) : 0.0;
    return -k() * k() * phi(r) + radial;
  }
  cplx u(double r, double t) const { return std::exp(-t) * phi(r); }
};

/// Forcing that makes the manufactured solution exact for (params, scheme).
inline Forcing manufactured_forcing(const ManufacturedSolution& ms, const ModelParams& params,
                                    const SchemeConfig& scheme) {
  const cplx A = params.diffusion();
  Forcing f;
  f.interior = [ms, params, A](double r, double t) {
    const cplx u = ms.u(r, t);
    return -u - A * (std::exp(-t) * ms.lap_phi(r)) - nonlinearity(u, params);
  };
  const double r1 = ms.r0 + ms.L;
  const FeedbackSpec fb = scheme.feedback;
  const bool wentzell_form = scheme.variant == BcVariant::wentzell || fb.is_identity();
  f.boundary = [ms, params, A, r1, fb, wentzell_form, interior = f.interior](double t) {
    const cplx u = ms.u(r1, t);
    const cplx dn = std::exp(-t) * ms.dphi(r1);
    if (wentzell_form) return dn + A * (std::exp(-t) * ms.lap_phi(r1)) + nonlinearity(u, params);
    // d_nu u = -g(u_t) + f + g_b with u_t = -u
    return dn + feedback_eval(-u, fb) - interior(r1, t);
  };
  return f;
}

inline ExperimentReport manufactured_solution_study(const RadialGrid& grid, const ModelParams& params_in,
                                                    const SchemeConfig& scheme,
                                                    const RefinementOptions& opt = {4, 1.8}) {
  const ModelParams params = with_dim(params_in, grid);
  std::vector<Issue> issues;
  require(issues, opt.levels >= 3, "experiment.levels", "need at least 3 levels");
  throw_if(std::move(issues));

  const ManufacturedSolution ms{grid.r0(), grid.r1() - grid.r0(), grid.dim()};
  ExperimentReport rep;
  rep.name = "manufactured";
  rep.parameters = {{"domain", to_json(grid)},
                    {"params", to_json(params)},
                    {"scheme", to_json(scheme)},
                    {"solution", "exp(-t) sin(pi (r - r0) / (r1 - r0))"},
                    {"levels", opt.levels}};

  struct Level {
    double h, dt, error;
  };
  auto outcomes = run_cases<Level>(static_cast<std::size_t>(opt.levels), [&](std::size_t k) {
    const RadialGrid g = refine(grid, static_cast<int>(k));
    SchemeConfig s = refine(scheme, static_cast<int>(k));
    s.forcing = manufactured_forcing(ms, params, s);
    const ComplexField u0 = sample(g, [&](double r) { return ms.u(r, 0.0); });
    const RunResult r = run(g, params, s, u0, 0);
    const double T = r.ledger.back().t;
    const ComplexField exact = sample(g, [&](double rr) { return ms.u(rr, T); });
    return Level{g.h(), s.dt, norm_v_diff(r.final_state, exact, g)};
  });

  std::vector<double> hs, es;
  for (const auto& o : outcomes) {
    const Level& l = o.get();
    rep.cases.push_back({{"h", l.h}, {"dt", l.dt}, {"v_error_T", l.error}});
    hs.push_back(l.h);
    es.push_back(l.error);
  }
  const double order = convergence_order(hs, es);
  rep.fits["observed_order"] = order;
  rep.add_check("observed_order", order, ">=", opt.min_order);
  return rep;
}

// ---------------------------------------------------------------------------

/// Runs fn and stores its wall-clock time on the report when `timed`.
inline ExperimentReport timed_study(bool timed, const std::function<ExperimentReport()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentReport rep = fn();
  if (timed) {
    rep.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
  return rep;
}

}  // namespace glsim
