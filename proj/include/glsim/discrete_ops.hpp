#pragma once

// Flux-form radial operators. With face densities a_{j+1/2} = omega r_{j+1/2}^{N-1}
// and fluxes F_{j+1/2} = a_{j+1/2} (u_{j+1} - u_j) / h, the interior Laplacian is
// (F_{j+1/2} - F_{j-1/2}) / w_j with the trapezoid weights w_j, and for v_0 = 0
//
//   (u, v)_V = -sum_{j=1}^{M-1} w_j (Lap_h u)_j conj(v_j) + F_{M-1/2} conj(v_M)
//
// holds exactly. Closing the last half cell with a boundary flux S q gives the
// half-cell Laplacian (S q - F_{M-1/2}) / w_M, and the identity extends to j = M
// with the boundary term S q conj(v_M).

#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "glsim/geometry.hpp"
#include "glsim/model.hpp"

namespace glsim {

using ComplexField = std::vector<cplx>;

template <typename Fn>
ComplexField sample(const RadialGrid& grid, Fn&& fn) {
  ComplexField u(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) u[j] = fn(grid.node(j));
  return u;
}

/// F_{j+1/2}, the weighted flux across the face between nodes j and j+1.
inline cplx face_flux(std::span<const cplx> u, const RadialGrid& grid, std::size_t j) {
  return grid.face_density(j) * (u[j + 1] - u[j]) / grid.h();
}

namespace detail {

// Second-order one-sided u_r and u_rr at an end node; `s` = +1 at r1, -1 at r0.
inline cplx one_sided_dr(cplx a0, cplx a1, cplx a2, double h, double s) {
  return s * (3.0 * a0 - 4.0 * a1 + a2) / (2.0 * h);
}
inline cplx one_sided_drr(cplx a0, cplx a1, cplx a2, cplx a3, double h) {
  return (2.0 * a0 - 5.0 * a1 + 4.0 * a2 - a3) / (h * h);
}

}  // namespace detail

/// Diagnostic Laplacian at an end node from second-order one-sided stencils.
inline cplx boundary_laplacian(std::span<const cplx> u, const RadialGrid& grid, Boundary end) {
  const std::size_t M = grid.cells();
  const double h = grid.h();
  const int n1 = grid.dim() - 1;
  if (end == Boundary::outer) {
    const cplx ur = detail::one_sided_dr(u[M], u[M - 1], u[M - 2], h, 1.0);
    const cplx urr = detail::one_sided_drr(u[M], u[M - 1], u[M - 2], u[M - 3], h);
    return urr + (n1 > 0 ? n1 / grid.r1() * ur : cplx{});
  }
  const cplx ur = detail::one_sided_dr(u[0], u[1], u[2], h, -1.0);
  const cplx urr = detail::one_sided_drr(u[0], u[1], u[2], u[3], h);
  return urr + (n1 > 0 ? n1 / grid.r0() * ur : cplx{});
}

/// Flux-form Laplacian at interior nodes; one-sided second-order values at both ends.
inline ComplexField laplacian_apply(std::span<const cplx> u, const RadialGrid& grid) {
  const std::size_t M = grid.cells();
  ComplexField out(grid.size());
  cplx left = face_flux(u, grid, 0);
  for (std::size_t j = 1; j < M; ++j) {
    const cplx right = face_flux(u, grid, j);
    out[j] = (right - left) / grid.weight(j);
    left = right;
  }
  out[0] = boundary_laplacian(u, grid, Boundary::inner);
  out[M] = boundary_laplacian(u, grid, Boundary::outer);
  return out;
}

/// Outward normal derivative; at Gamma_0 the normal points toward decreasing r.
inline cplx normal_derivative(std::span<const cplx> u, const RadialGrid& grid, Boundary end,
                              int order) {
  const std::size_t M = grid.cells();
  const double h = grid.h();
  if (end == Boundary::outer) {
    if (order == 1) return (u[M] - u[M - 1]) / h;
    return (3.0 * u[M] - 4.0 * u[M - 1] + u[M - 2]) / (2.0 * h);
  }
  if (order == 1) return (u[0] - u[1]) / h;
  return (3.0 * u[0] - 4.0 * u[1] + u[2]) / (2.0 * h);
}

/// Half-cell Laplacian at r1 given a boundary normal derivative q.
inline cplx halfcell_laplacian(std::span<const cplx> u, const RadialGrid& grid, cplx q) {
  const std::size_t M = grid.cells();
  return (grid.surface_measure() * q - face_flux(u, grid, M - 1)) / grid.weight(M);
}

/// (u, v)_V = sum over faces of a_{j+1/2} h (Du)_{j+1/2} conj((Dv)_{j+1/2}).
inline cplx v_inner(std::span<const cplx> u, std::span<const cplx> v, const RadialGrid& grid) {
  cplx acc{};
  const double h = grid.h();
  for (std::size_t j = 0; j < grid.cells(); ++j) {
    acc += grid.face_density(j) * (u[j + 1] - u[j]) * std::conj(v[j + 1] - v[j]) / h;
  }
  return acc;
}

inline double norm_v(std::span<const cplx> u, const RadialGrid& grid) {
  double acc = 0.0;
  const double h = grid.h();
  for (std::size_t j = 0; j < grid.cells(); ++j) {
    acc += grid.face_density(j) * std::norm(u[j + 1] - u[j]) / h;
  }
  return std::sqrt(acc);
}

inline double norm_v_diff(std::span<const cplx> u, std::span<const cplx> v,
                          const RadialGrid& grid) {
  double acc = 0.0;
  const double h = grid.h();
  for (std::size_t j = 0; j < grid.cells(); ++j) {
    acc += grid.face_density(j) * std::norm((u[j + 1] - v[j + 1]) - (u[j] - v[j])) / h;
  }
  return std::sqrt(acc);
}

/// sum_j w_j |u_j|^e, the trapezoid value of the integral of |u|^e.
inline double power_integral(std::span<const cplx> u, const RadialGrid& grid, double e) {
  double acc = 0.0;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    acc += grid.weight(j) * detail::abs_pow(u[j], e);
  }
  return acc;
}

inline double norm_lp_interior(std::span<const cplx> u, const RadialGrid& grid, double p_exp) {
  const double s = power_integral(u, grid, p_exp);
  return p_exp == 2.0 ? std::sqrt(s) : std::pow(s, 1.0 / p_exp);
}

/// L^p(Gamma_1) norm of a radially symmetric trace: |Gamma_1|^{1/p} |trace|.
inline double boundary_value_norm(cplx trace, const RadialGrid& grid, double p_exp) {
  return std::pow(grid.surface_measure(), 1.0 / p_exp) * std::abs(trace);
}

/// Weighted L^2 norm of an array of nodal values (e.g. a Laplacian), squared.
inline double l2_norm_squared(std::span<const cplx> u, const RadialGrid& grid) {
  return power_integral(u, grid, 2.0);
}

/// Boundary row of the discrete Wentzell domain at r1:
/// q + (lambda + i alpha) Lap_half(q) = 0 with q the three-point normal derivative.
/// Returns the value u_M that satisfies it for the given u_0 .. u_{M-1}.
inline cplx wentzell_boundary_value(std::span<const cplx> u, const RadialGrid& grid,
                                    const ModelParams& params) {
  const std::size_t M = grid.cells();
  const double h = grid.h();
  const cplx A = params.diffusion();
  const double S = grid.surface_measure();
  const double W = grid.weight(M);
  const double a = grid.face_density(M - 1);
  // q = (3 x - 4 u_{M-1} + u_{M-2}) / (2h); Lap = (S q - a (x - u_{M-1}) / h) / W
  // Row is linear in x: c1 x + c0 = 0.
  const cplx q_x = 1.5 / h;
  const cplx q_0 = (-4.0 * u[M - 1] + u[M - 2]) / (2.0 * h);
  const cplx lap_x = (S * q_x - a / h) / W;
  const cplx lap_0 = (S * q_0 + a * u[M - 1] / h) / W;
  return -(q_0 + A * lap_0) / (q_x + A * lap_x);
}

/// Smooth field in the continuum Wentzell domain built from modal coefficients
///   w(r) = sum_k c_k sin((k + 1/2) pi s) + b2 s^2 + b3 s^3,  s = (r - r0) / (r1 - r0).
/// b2 makes Lap w vanish at r0 (so Lap w is in V), b3 enforces
/// d_nu w + (lambda + i alpha) Lap w = 0 at r1; the last node is then moved onto
/// the discrete boundary row.
inline ComplexField wentzell_constrained_field(const RadialGrid& grid, const ModelParams& params,
                                               std::span<const cplx> coeffs) {
  const double L = grid.r1() - grid.r0();
  const int n1 = grid.dim() - 1;
  const cplx A = params.diffusion();
  const double r0 = grid.r0();
  const double r1 = grid.r1();
  auto wavenumber = [&](std::size_t k) {
    return (static_cast<double>(k) + 0.5) * std::numbers::pi / L;
  };
  auto radial_term = [&](double r) { return r > 0.0 && n1 > 0 ? n1 / r : 0.0; };

  // Lap of the modes at r0 reduces to (N-1)/r0 times their slope.
  cplx lap_r0{};
  for (std::size_t k = 0; k < coeffs.size(); ++k) lap_r0 += coeffs[k] * radial_term(r0) * wavenumber(k);
  const cplx b2 = -lap_r0 * L * L / 2.0;

  cplx wr{}, wlap{};
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    const double kk = wavenumber(k);
    const double x = kk * L;
    wr += coeffs[k] * kk * std::cos(x);
    wlap += coeffs[k] * (-kk * kk * std::sin(x) + radial_term(r1) * kk * std::cos(x));
  }
  wr += b2 * 2.0 / L;
  wlap += b2 * (2.0 / (L * L) + radial_term(r1) * 2.0 / L);
  const double cubic_r = 3.0 / L;
  const double cubic_lap = 6.0 / (L * L) + radial_term(r1) * 3.0 / L;
  const cplx b3 = -(wr + A * wlap) / (cubic_r + A * cubic_lap);

  ComplexField u = sample(grid, [&](double r) {
    const double s = (r - r0) / L;
    cplx v{};
    for (std::size_t k = 0; k < coeffs.size(); ++k) v += coeffs[k] * std::sin(wavenumber(k) * (r - r0));
    return v + b2 * s * s + b3 * s * s * s;
  });
  u[0] = 0.0;
  u[grid.cells()] = wentzell_boundary_value(u, grid, params);
  return u;
}

/// Compares the scheme's V-dissipation Re(A_h u, u)_V with independent
/// estimates of -lambda ||Lap u||^2 - ||d_nu u||^2_{Gamma_1}.
///
/// A_h u is (lambda + i alpha) times the flux Laplacian on 1..M-1, the
/// half-cell Laplacian at M (closed with the three-point q), and 0 at the
/// Dirichlet node. The comparison terms use the diagnostic one-sided Laplacian
/// at both ends and the same q. For u on the discrete Wentzell row the scheme
/// identity is exact, so the residual isolates the boundary-closure discrepancy.
inline double dissipativity_residual(const RadialGrid& grid, const ModelParams& params,
                                     std::span<const cplx> u) {
  const std::size_t M = grid.cells();
  const cplx A = params.diffusion();
  const cplx q = normal_derivative(u, grid, Boundary::outer, 2);

  ComplexField lap = laplacian_apply(u, grid);
  ComplexField Au(grid.size());
  for (std::size_t j = 1; j < M; ++j) Au[j] = A * lap[j];
  Au[M] = A * halfcell_laplacian(u, grid, q);
  Au[0] = 0.0;

  const double dissipation = std::real(v_inner(Au, u, grid));
  const double lap_sq = l2_norm_squared(lap, grid);
  const double flux_sq = grid.surface_measure() * std::norm(q);
  return std::abs(dissipation + params.lambda * lap_sq + flux_sq);
}

/// |d_nu u0 + (lambda + i alpha) Lap u0 + F(u0)| at r1 from one-sided stencils.
/// The sign of F matches the dynamic law d_nu u = -u_t with u_t = A Lap u + F(u).
inline double compatibility_residual(std::span<const cplx> u0, const RadialGrid& grid,
                                     const ModelParams& params) {
  const std::size_t M = grid.cells();
  const cplx dn = normal_derivative(u0, grid, Boundary::outer, 2);
  const cplx lap = boundary_laplacian(u0, grid, Boundary::outer);
  return std::abs(dn + params.diffusion() * lap + nonlinearity(u0[M], params));
}

}  // namespace glsim
