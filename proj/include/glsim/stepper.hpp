#pragma once

// Crank-Nicolson IMEX time stepping for
//
//   u_t = (lambda + i alpha) Lap u + gamma u + P(u) + f      in Omega
//   u = 0                                                   on Gamma_0
//
// with P(u) = -(kappa + i beta)|u|^{p-1} u taken explicitly, closed on Gamma_1 by
//
//   dynamic:   d_nu u = -g(u_t) + f + g_b
//   wentzell:  d_nu u = -(lambda + i alpha) Lap u - F(u) + g_b
//
// Both describe the same problem: substituting the interior equation into the
// dynamic law (identity g) gives the Wentzell law.
//
// Dynamic closure, order 2: the last half cell [r1 - h/2, r1] balances
//   w_M u_M' = A (S q - F_{M-1/2}) + w_M (gamma u_M + P(u_M) + f_M),
// which keeps the summation-by-parts identity of discrete_ops.hpp, so the linear
// scheme contracts the discrete V-norm exactly. Order 1 replaces it by
// u_M' = -(u_M - u_{M-1})/h + f + g_b.
//
// Wentzell closure: an algebraic row at t_{n+1} with one-sided q and Lap,
// reduced to nodes M-2..M and solved with bordered_solve.
//
// Non-identity feedback: g(z) = c z + rho(z) with c = (m + M)/2; c z enters
// the matrix and rho is iterated to a fixed point per step.

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "glsim/diagnostics.hpp"
#include "glsim/discrete_ops.hpp"
#include "glsim/error.hpp"
#include "glsim/geometry.hpp"
#include "glsim/linsolve.hpp"
#include "glsim/model.hpp"

namespace glsim {

enum class BcVariant { dynamic, wentzell };
enum class NonlinearTreatment { ab2, picard1 };

inline const char* to_string(BcVariant v) { return v == BcVariant::dynamic ? "dynamic" : "wentzell"; }
inline const char* to_string(NonlinearTreatment n) {
  return n == NonlinearTreatment::ab2 ? "explicit-AB2" : "picard-1";
}

/// Interior source f(r, t) and boundary input g_b(t); either may be empty.
struct Forcing {
  std::function<cplx(double, double)> interior;
  std::function<cplx(double)> boundary;

  bool active() const noexcept { return static_cast<bool>(interior) || static_cast<bool>(boundary); }
  cplx f(double r, double t) const { return interior ? interior(r, t) : cplx{}; }
  cplx g(double t) const { return boundary ? boundary(t) : cplx{}; }
};

struct SchemeConfig {
  BcVariant variant = BcVariant::dynamic;
  double dt = 1e-3;
  double T = 1.0;
  int boundary_order = 2;
  NonlinearTreatment nonlinear = NonlinearTreatment::ab2;
  FeedbackSpec feedback;
  Forcing forcing;
  double feedback_tol = 1e-10;
  int feedback_max_iter = 50;

  std::size_t steps() const {
    const double n = std::round(T / dt);
    return n < 1.0 ? 1 : static_cast<std::size_t>(n);
  }
};

inline std::vector<Issue> validate(const SchemeConfig& scheme) {
  std::vector<Issue> issues;
  if (!(scheme.dt > 0.0)) issues.push_back({"scheme.dt", "dt must be > 0"});
  if (!(scheme.T >= scheme.dt)) issues.push_back({"scheme.T", "T must be >= dt"});
  if (scheme.boundary_order != 1 && scheme.boundary_order != 2) {
    issues.push_back({"scheme.boundary_order", "must be 1 or 2"});
  }
  if (scheme.variant == BcVariant::wentzell && !scheme.feedback.is_identity()) {
    issues.push_back({"scheme.bc_variant", "the Wentzell form requires identity feedback"});
  }
  return issues;
}

/// Crank-Nicolson matrices and boundary-row source weights for one (grid, params, scheme).
struct StepOperator {
  RadialGrid grid;
  ModelParams params;
  SchemeConfig scheme;
  TridiagonalSystem<cplx> generator;  // L; row M is meaningful for the dynamic closure only
  TridiagonalSystem<cplx> left;       // I - dt/2 L (Wentzell: algebraic last row)
  TridiagonalSystem<cplx> right;      // I + dt/2 L
  std::optional<OffBandEntry<cplx>> extra;
  double split = 1.0;
  cplx boundary_interior_weight{};  // multiplies P(u_M) + f_M in the dynamic row
  cplx boundary_input_weight{};     // multiplies f_M + g_b - rho in the dynamic row
  cplx fold{};                      // Wentzell: multiple of row M-2 removed from row M
};

inline StepOperator assemble_step_operator(const RadialGrid& grid, const ModelParams& params,
                                           const SchemeConfig& scheme) {
  if (auto issues = validate(scheme); !issues.empty()) {
    throw Error(ErrorKind::validation_error, std::move(issues));
  }
  StepOperator op{grid, params, scheme, {}, {}, {}, std::nullopt};
  const std::size_t n = grid.size();
  const std::size_t M = grid.cells();
  const double h = grid.h();
  const cplx A = params.diffusion();
  const double dt = scheme.dt;

  auto& L = op.generator;
  L = TridiagonalSystem<cplx>(n);
  for (std::size_t j = 1; j < M; ++j) {
    const cplx lo = A * grid.face_density(j - 1) / (grid.weight(j) * h);
    const cplx up = A * grid.face_density(j) / (grid.weight(j) * h);
    L.lower[j - 1] = lo;
    L.upper[j] = up;
    L.diag[j] = -(lo + up) + params.gamma;
  }

  op.split = scheme.feedback.is_identity() ? 1.0 : 0.5 * (scheme.feedback.m() + scheme.feedback.M());
  const double c = op.split;
  if (scheme.variant == BcVariant::dynamic) {
    if (scheme.boundary_order == 2) {
      const double W = grid.weight(M);
      const double S = grid.surface_measure();
      const double a = grid.face_density(M - 1);
      const cplx D = W + A * S * c;
      L.lower[M - 1] = A * a / (h * D);
      L.diag[M] = (-A * a / h + W * params.gamma) / D;
      op.boundary_interior_weight = W / D;
      op.boundary_input_weight = A * S / D;
    } else {
      L.lower[M - 1] = 1.0 / (c * h);
      L.diag[M] = -1.0 / (c * h);
      op.boundary_interior_weight = 0.0;
      op.boundary_input_weight = 1.0 / c;
    }
  }

  op.left = TridiagonalSystem<cplx>(n);
  op.right = TridiagonalSystem<cplx>(n);
  for (std::size_t i = 0; i < n; ++i) {
    op.left.diag[i] = 1.0 - 0.5 * dt * L.diag[i];
    op.right.diag[i] = 1.0 + 0.5 * dt * L.diag[i];
    if (i + 1 < n) {
      op.left.upper[i] = -0.5 * dt * L.upper[i];
      op.right.upper[i] = 0.5 * dt * L.upper[i];
      op.left.lower[i] = -0.5 * dt * L.lower[i];
      op.right.lower[i] = 0.5 * dt * L.lower[i];
    }
  }
  // Dirichlet row.
  op.left.diag[0] = 1.0;
  op.left.upper[0] = 0.0;
  op.right.diag[0] = 0.0;
  op.right.upper[0] = 0.0;

  if (scheme.variant == BcVariant::wentzell) {
    // Row q + A (u_rr + (N-1)/r1 q) on nodes M-3..M. Order 2 uses the
    // one-sided u_rr; its u_{M-3} entry is folded out against row M-2.
    const double ih = 1.0 / h;
    const double ih2 = ih * ih;
    std::array<double, 4> dq{0.0, 0.0, -ih, ih};
    std::array<double, 4> d2{0.0, ih2, -2.0 * ih2, ih2};
    if (scheme.boundary_order == 2) {
      dq = {0.0, 0.5 * ih, -2.0 * ih, 1.5 * ih};
      d2 = {-ih2, 4.0 * ih2, -5.0 * ih2, 2.0 * ih2};
    }
    const cplx radial = 1.0 + A * static_cast<double>(grid.dim() - 1) / grid.r1();
    std::array<cplx, 4> row;
    for (int k = 0; k < 4; ++k) row[k] = radial * dq[k] + A * d2[k];
    if (row[0] != cplx{}) {
      op.fold = row[0] / op.left.lower[M - 3];
      row[1] -= op.fold * op.left.diag[M - 2];
      row[2] -= op.fold * op.left.upper[M - 2];
    }
    op.extra = OffBandEntry<cplx>{M, M - 2, row[1]};
    op.left.lower[M - 1] = row[2];
    op.left.diag[M] = row[3];
    op.right.lower[M - 1] = 0.0;
    op.right.diag[M] = 0.0;
  }
  return op;
}

/// Solution state between steps. `prev_*` feed the AB2 extrapolation.
struct StepState {
  ComplexField u;
  double t = 0.0;
  ComplexField prev_power;  // P(u^{n-1}); empty before the first step
  cplx prev_boundary_F{};   // F(u_M^{n-1}), Wentzell row extrapolation
  cplx boundary_ut{};       // (u_M^{n} - u_M^{n-1}) / dt
  cplx boundary_flux{};     // d_nu u at Gamma_1 as seen by the last step

  static StepState initial(ComplexField u0, double t0 = 0.0) {
    StepState s;
    s.u = std::move(u0);
    s.u.front() = 0.0;
    s.t = t0;
    return s;
  }
};

namespace detail {

inline ComplexField power_field(std::span<const cplx> u, const ModelParams& params) {
  ComplexField out(u.size());
  if (params.kappa == 0.0 && params.beta == 0.0) return out;
  for (std::size_t j = 0; j < u.size(); ++j) out[j] = power_term(u[j], params);
  return out;
}

}  // namespace detail

/// One CN-IMEX step from state.t to state.t + dt.
inline StepState step(const StepState& state, const StepOperator& op) {
  const RadialGrid& grid = op.grid;
  const ModelParams& params = op.params;
  const SchemeConfig& scheme = op.scheme;
  const std::size_t M = grid.cells();
  const double dt = scheme.dt;
  const double t_mid = state.t + 0.5 * dt;
  const double t_next = state.t + dt;
  const std::span<const cplx> u = state.u;

  const ComplexField power_now = detail::power_field(u, params);
  const bool have_prev = !state.prev_power.empty();

  ComplexField f_mid(grid.size());
  if (scheme.forcing.interior) {
    for (std::size_t j = 1; j <= M; ++j) f_mid[j] = scheme.forcing.f(grid.node(j), t_mid);
  }
  const cplx gb_mid = scheme.forcing.g(t_mid);
  const cplx gb_next = scheme.forcing.g(t_next);

  const ComplexField base_rhs = op.right.apply(u);

  auto solve_with = [&](std::span<const cplx> power, cplx boundary_F_next, cplx rho) {
    ComplexField rhs = base_rhs;
    rhs[0] = 0.0;
    for (std::size_t j = 1; j < M; ++j) rhs[j] += dt * (power[j] + f_mid[j]);
    if (scheme.variant == BcVariant::dynamic) {
      rhs[M] += dt * (op.boundary_interior_weight * (power[M] + f_mid[M]) +
                      op.boundary_input_weight * (f_mid[M] + gb_mid - rho));
    } else {
      rhs[M] = -boundary_F_next + gb_next - op.fold * rhs[M - 2];
    }
    return robust_solve<cplx>(op.left, op.extra, rhs);
  };

  auto advance = [&](cplx rho) {
    // AB2 needs one history level; the first step is a picard-1 step so the
    // start-up error stays second order (CN does not damp it out).
    if (scheme.nonlinear == NonlinearTreatment::ab2 && have_prev) {
      ComplexField power(power_now.size());
      for (std::size_t j = 0; j < power.size(); ++j) {
        power[j] = 1.5 * power_now[j] - 0.5 * state.prev_power[j];
      }
      const cplx bF = 2.0 * nonlinearity(u[M], params) - state.prev_boundary_F;
      return solve_with(power, bF, rho);
    }
    ComplexField predictor = solve_with(power_now, nonlinearity(u[M], params), rho);
    ComplexField mid(u.size());
    for (std::size_t j = 0; j < mid.size(); ++j) mid[j] = 0.5 * (u[j] + predictor[j]);
    return solve_with(detail::power_field(mid, params), nonlinearity(predictor[M], params), rho);
  };

  ComplexField next;
  const bool iterate_feedback =
      scheme.variant == BcVariant::dynamic && !scheme.feedback.is_identity();
  if (!iterate_feedback) {
    next = advance(0.0);
  } else {
    cplx v = state.boundary_ut;
    bool converged = false;
    for (int k = 0; k < scheme.feedback_max_iter; ++k) {
      const cplx rho = feedback_eval(v, scheme.feedback) - op.split * v;
      next = advance(rho);
      const cplx v_new = (next[M] - u[M]) / dt;
      const double change = std::abs(v_new - v);
      v = v_new;
      if (change <= scheme.feedback_tol * (1.0 + std::abs(v))) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      throw Error(ErrorKind::non_convergence, "feedback fixed point did not converge at t = " +
                                                  std::to_string(state.t));
    }
  }

  StepState out;
  out.u = std::move(next);
  out.u[0] = 0.0;
  out.t = t_next;
  out.prev_power = power_now;
  out.prev_boundary_F = nonlinearity(u[M], params);
  out.boundary_ut = (out.u[M] - u[M]) / dt;
  if (scheme.variant == BcVariant::dynamic) {
    out.boundary_flux = -feedback_eval(out.boundary_ut, scheme.feedback) + f_mid[M] + gb_mid;
  } else {
    out.boundary_flux = normal_derivative(out.u, grid, Boundary::outer, scheme.boundary_order);
  }
  return out;
}

// ---------------------------------------------------------------------------

struct Trajectory {
  std::vector<double> times;
  std::vector<ComplexField> samples;
  std::vector<std::size_t> sample_steps;
  std::vector<double> step_times;     // t_{n+1} for each step
  std::vector<cplx> boundary_ut;      // backward-difference u_t on Gamma_1
  std::vector<cplx> boundary_flux;    // d_nu u on Gamma_1
};

struct RunResult {
  Trajectory trajectory;
  EnergyLedger ledger;
  ComplexField final_state;
};

/// Called after every step with the new state and its step index (1-based).
using StepObserver = std::function<void(const StepState&, std::size_t)>;

inline constexpr double kBlowupThreshold = 1e12;

/// Advances u0 to time T. Samples are kept at every `sample_stride`-th step
/// (and always at t = 0 and the final step); stride 0 keeps only the ends.
inline RunResult run(const RadialGrid& grid, const ModelParams& params, const SchemeConfig& scheme,
                     std::span<const cplx> u0, std::size_t sample_stride,
                     const StepObserver& observer = {}) {
  const StepOperator op = assemble_step_operator(grid, params, scheme);
  StepState state = StepState::initial(ComplexField(u0.begin(), u0.end()));

  RunResult result{{}, EnergyLedger(grid, params), {}};
  Trajectory& traj = result.trajectory;
  result.ledger.start(state.u, 0.0);
  traj.times.push_back(0.0);
  traj.samples.push_back(state.u);
  traj.sample_steps.push_back(0);

  const std::size_t n_steps = scheme.steps();
  for (std::size_t n = 1; n <= n_steps; ++n) {
    state = step(state, op);
    result.ledger.record_step(state.u, state.t, state.boundary_ut, state.boundary_flux);
    const LedgerRow& row = result.ledger.back();
    if (!std::isfinite(row.v_norm) || row.v_norm > kBlowupThreshold ||
        !(row.l2_interior <= kBlowupThreshold)) {
      throw Error(ErrorKind::blowup, "norm exceeded 1e12 at t = " + std::to_string(state.t));
    }
    traj.step_times.push_back(state.t);
    traj.boundary_ut.push_back(state.boundary_ut);
    traj.boundary_flux.push_back(state.boundary_flux);
    if (n == n_steps || (sample_stride > 0 && n % sample_stride == 0)) {
      traj.times.push_back(state.t);
      traj.samples.push_back(state.u);
      traj.sample_steps.push_back(n);
    }
    if (observer) observer(state, n);
  }
  result.final_state = state.u;
  return result;
}

/// Harmonic lift with value 0 on Gamma_0 and outward normal derivative g on Gamma_1.
inline ComplexField neumann_map(cplx g, const RadialGrid& grid) {
  const double r0 = grid.r0();
  const double r1 = grid.r1();
  if (grid.dim() >= 2 && r0 <= 0.0) {
    throw Error(ErrorKind::invalid_radii, "neumann_map: r0 must be positive for N >= 2");
  }
  switch (grid.dim()) {
    case 1: return sample(grid, [&](double r) { return g * (r - r0); });
    case 2: return sample(grid, [&](double r) { return g * r1 * std::log(r / r0); });
    default: return sample(grid, [&](double r) { return g * r1 * r1 * (1.0 / r0 - 1.0 / r); });
  }
}

}  // namespace glsim
