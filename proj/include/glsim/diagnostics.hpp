#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "glsim/discrete_ops.hpp"
#include "glsim/error.hpp"
#include "glsim/geometry.hpp"
#include "glsim/model.hpp"

namespace glsim {

/// F = (alpha/2) ||grad u||^2 + beta/(p+1) ||u||_{p+1}^{p+1}
inline double energy_F(std::span<const cplx> u, const RadialGrid& grid, const ModelParams& params) {
  const double v = norm_v(u, grid);
  return 0.5 * params.alpha * v * v +
         params.beta / (params.p + 1.0) * power_integral(u, grid, params.p + 1.0);
}

/// One ledger sample. Norms carrying a power are stored with that power.
struct LedgerRow {
  double t = 0.0;
  double v_norm = 0.0;        // ||u||_V
  double l2_interior = 0.0;   // ||u||_{L^2(Omega)}
  double lp1_interior = 0.0;  // ||u||_{L^{p+1}(Omega)}^{p+1}
  double bd_l2_sq = 0.0;      // ||u||_{L^2(Gamma_1)}^2
  double bd_lp1 = 0.0;        // ||u||_{L^{p+1}(Gamma_1)}^{p+1}
  double cum_ut_bd = 0.0;     // int ||u_t||^2_{L^2(Gamma_1)}
  double cum_lap = 0.0;       // int ||Lap u||^2_{L^2(Omega)}
  double cum_l2p = 0.0;       // int ||u||_{L^{2p}(Omega)}^{2p}
  double cum_flux = 0.0;      // int ||d_nu u||^2_{L^2(Gamma_1)}
  double F = 0.0;
  double E = 0.0;
};

/// E(t) assembled from a ledger row. The -(alpha gamma / 2)||u||^2_{Gamma_1}
/// term is present only for gamma <= 0, following the two printed forms.
inline double energy_E(const LedgerRow& row, const ModelParams& params) {
  const double pp1 = params.p + 1.0;
  double e = 0.5 * params.alpha * row.v_norm * row.v_norm + params.beta / pp1 * row.lp1_interior +
             (params.alpha * params.kappa + params.beta * params.lambda) / pp1 * row.bd_lp1 +
             params.alpha * row.cum_ut_bd + params.alpha * params.lambda * row.cum_lap +
             params.kappa * params.beta * row.cum_l2p;
  if (params.gamma <= 0.0) e -= 0.5 * params.alpha * params.gamma * row.bd_l2_sq;
  return e;
}

/// E_0, i.e. E evaluated on the initial data with all time integrals zero.
inline double initial_energy(std::span<const cplx> u0, const RadialGrid& grid,
                             const ModelParams& params) {
  LedgerRow row;
  row.v_norm = norm_v(u0, grid);
  row.lp1_interior = power_integral(u0, grid, params.p + 1.0);
  const cplx trace = u0[grid.cells()];
  row.bd_l2_sq = grid.surface_measure() * std::norm(trace);
  row.bd_lp1 = grid.surface_measure() * detail::abs_pow(trace, params.p + 1.0);
  return energy_E(row, params);
}

/// Time series of the energy functionals and their cumulative integrals.
/// Cumulative Lap and L^{2p} integrals use the trapezoid rule in time; the
/// boundary u_t and flux integrals use the per-step values, which live at
/// step midpoints.
class EnergyLedger {
 public:
  EnergyLedger(RadialGrid grid, ModelParams params)
      : grid_(std::move(grid)), params_(params) {}

  void start(std::span<const cplx> u0, double t0) {
    rows_.clear();
    LedgerRow row = instantaneous(u0, t0);
    last_lap_sq_ = lap_sq(u0);
    last_l2p_ = power_integral(u0, grid_, 2.0 * params_.p);
    finalize(row);
    rows_.push_back(row);
  }

  void record_step(std::span<const cplx> u, double t, cplx ut_boundary, cplx flux_boundary) {
    const LedgerRow& prev = rows_.back();
    const double dt = t - prev.t;
    LedgerRow row = instantaneous(u, t);
    const double S = grid_.surface_measure();
    const double lap = lap_sq(u);
    const double l2p = power_integral(u, grid_, 2.0 * params_.p);
    row.cum_ut_bd = prev.cum_ut_bd + dt * S * std::norm(ut_boundary);
    row.cum_flux = prev.cum_flux + dt * S * std::norm(flux_boundary);
    row.cum_lap = prev.cum_lap + 0.5 * dt * (last_lap_sq_ + lap);
    row.cum_l2p = prev.cum_l2p + 0.5 * dt * (last_l2p_ + l2p);
    last_lap_sq_ = lap;
    last_l2p_ = l2p;
    finalize(row);
    rows_.push_back(row);
  }

  const std::vector<LedgerRow>& rows() const noexcept { return rows_; }
  const LedgerRow& back() const { return rows_.back(); }
  const ModelParams& params() const noexcept { return params_; }

  std::vector<double> column(double LedgerRow::*member) const {
    std::vector<double> out;
    out.reserve(rows_.size());
    for (const auto& r : rows_) out.push_back(r.*member);
    return out;
  }

 private:
  LedgerRow instantaneous(std::span<const cplx> u, double t) const {
    LedgerRow row;
    row.t = t;
    row.v_norm = norm_v(u, grid_);
    row.l2_interior = norm_lp_interior(u, grid_, 2.0);
    row.lp1_interior = power_integral(u, grid_, params_.p + 1.0);
    const cplx trace = u[grid_.cells()];
    row.bd_l2_sq = grid_.surface_measure() * std::norm(trace);
    row.bd_lp1 = grid_.surface_measure() * detail::abs_pow(trace, params_.p + 1.0);
    return row;
  }

  double lap_sq(std::span<const cplx> u) const {
    const ComplexField lap = laplacian_apply(u, grid_);
    return l2_norm_squared(lap, grid_);
  }

  void finalize(LedgerRow& row) const {
    row.F = 0.5 * params_.alpha * row.v_norm * row.v_norm +
            params_.beta / (params_.p + 1.0) * row.lp1_interior;
    row.E = energy_E(row, params_);
  }

  RadialGrid grid_;
  ModelParams params_;
  std::vector<LedgerRow> rows_;
  double last_lap_sq_ = 0.0;
  double last_l2p_ = 0.0;
};

// ---------------------------------------------------------------------------
// Fits and bound checks.

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

inline LineFit least_squares_line(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LineFit fit;
  fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  fit.intercept = my - fit.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = y[i] - (fit.intercept + fit.slope * x[i]);
    sse += e * e;
  }
  // A constant series is fitted perfectly by the horizontal line.
  fit.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  return fit;
}

struct DecayFit {
  double rate = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t samples = 0;
};

/// Least-squares line through (t, ln value) over values above `floor`; rate = -slope.
inline DecayFit decay_rate_fit(std::span<const double> times, std::span<const double> values,
                               double floor = 1e-12) {
  std::vector<double> x, y;
  for (std::size_t i = 0; i < times.size() && i < values.size(); ++i) {
    if (values[i] > floor) {
      x.push_back(times[i]);
      y.push_back(std::log(values[i]));
    }
  }
  if (x.size() < 10) {
    throw Error(ErrorKind::insufficient_data,
                "decay_rate_fit: " + std::to_string(x.size()) + " samples above floor, need 10");
  }
  const LineFit fit = least_squares_line(x, y);
  return {-fit.slope, fit.intercept, fit.r_squared, x.size()};
}

struct BoundCheck {
  double max_relative_violation = -std::numeric_limits<double>::infinity();
  double worst_time = 0.0;
};

inline BoundCheck bound_check(std::span<const double> times, std::span<const double> values,
                              const std::function<double(double)>& bound, double floor = 1e-300) {
  BoundCheck out;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double b = bound(times[i]);
    const double v = (values[i] - b) / std::max(b, floor);
    if (v > out.max_relative_violation) {
      out.max_relative_violation = v;
      out.worst_time = times[i];
    }
  }
  return out;
}

/// Slope of ln(error) against ln(h) by least squares.
inline double convergence_order(std::span<const double> h, std::span<const double> errors) {
  if (h.size() < 3 || errors.size() != h.size()) {
    throw Error(ErrorKind::insufficient_data, "convergence_order: need >= 3 levels");
  }
  std::vector<double> x, y;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (!(errors[i] > 0.0) || !(h[i] > 0.0)) {
      throw Error(ErrorKind::insufficient_data, "convergence_order: errors must be positive");
    }
    x.push_back(std::log(h[i]));
    y.push_back(std::log(errors[i]));
  }
  return least_squares_line(x, y).slope;
}

}  // namespace glsim
