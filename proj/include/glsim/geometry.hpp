#pragma once

// Radially symmetric domains: the interval [r0, r1] for N = 1 and the
// annulus/spherical shell r0 < |x| < r1 for N = 2, 3. The inner boundary
// (node 0) carries the Dirichlet condition, the outer one (node M) the
// dynamic condition.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "glsim/error.hpp"

namespace glsim {

enum class Boundary { inner, outer };

/// Surface measure of the unit sphere in R^N restricted to radial symmetry:
/// 1 for the interval, 2*pi for the circle, 4*pi for the sphere.
inline double sphere_measure(int dim) {
  switch (dim) {
    case 1: return 1.0;
    case 2: return 2.0 * std::numbers::pi;
    case 3: return 4.0 * std::numbers::pi;
    default: throw Error(ErrorKind::invalid_dimension, "N must be 1, 2 or 3");
  }
}

class RadialGrid {
 public:
  int dim() const noexcept { return dim_; }
  double r0() const noexcept { return r0_; }
  double r1() const noexcept { return r1_; }
  double h() const noexcept { return h_; }
  double omega() const noexcept { return omega_; }
  /// Number of cells M; there are M + 1 nodes.
  std::size_t cells() const noexcept { return nodes_.size() - 1; }
  std::size_t size() const noexcept { return nodes_.size(); }

  std::span<const double> nodes() const noexcept { return nodes_; }
  double node(std::size_t j) const noexcept { return nodes_[j]; }

  /// Trapezoid weights of the measure omega_N r^{N-1} dr.
  std::span<const double> volume_weights() const noexcept { return weights_; }
  double weight(std::size_t j) const noexcept { return weights_[j]; }

  /// omega_N r^{N-1}
  double density(double r) const noexcept { return omega_ * std::pow(r, dim_ - 1); }

  /// omega_N r_{j+1/2}^{N-1}, the flux weight between nodes j and j+1.
  double face_density(std::size_t j) const noexcept { return faces_[j]; }

  /// |Gamma_1| = omega_N r1^{N-1}.
  double surface_measure() const noexcept { return density(r1_); }

  /// Exact |Omega| = omega_N (r1^N - r0^N) / N.
  double exact_volume() const noexcept {
    return omega_ * (std::pow(r1_, dim_) - std::pow(r0_, dim_)) / dim_;
  }

  friend RadialGrid build_grid(int dim, double r0, double r1, std::size_t cells);

 private:
  RadialGrid() = default;

  int dim_ = 1;
  double r0_ = 0.0;
  double r1_ = 1.0;
  double h_ = 0.0;
  double omega_ = 1.0;
  std::vector<double> nodes_;
  std::vector<double> weights_;
  std::vector<double> faces_;
};

inline RadialGrid build_grid(int dim, double r0, double r1, std::size_t cells) {
  if (dim < 1 || dim > 3) {
    throw Error(ErrorKind::invalid_dimension, "N = " + std::to_string(dim) + " not in {1,2,3}");
  }
  if (!std::isfinite(r0) || !std::isfinite(r1) || r0 < 0.0 || r1 <= r0) {
    throw Error(ErrorKind::invalid_radii, "need 0 <= r0 < r1");
  }
  if (dim >= 2 && r0 == 0.0) {
    throw Error(ErrorKind::invalid_radii, "r0 must be positive for N >= 2 (annulus)");
  }
  if (cells < 4) {
    throw Error(ErrorKind::too_coarse, "M = " + std::to_string(cells) + " < 4");
  }

  RadialGrid g;
  g.dim_ = dim;
  g.r0_ = r0;
  g.r1_ = r1;
  g.omega_ = sphere_measure(dim);
  g.h_ = (r1 - r0) / static_cast<double>(cells);

  g.nodes_.resize(cells + 1);
  for (std::size_t j = 0; j <= cells; ++j) {
    g.nodes_[j] = r0 + static_cast<double>(j) * g.h_;
  }
  g.nodes_[cells] = r1;

  g.weights_.resize(cells + 1);
  for (std::size_t j = 0; j <= cells; ++j) {
    g.weights_[j] = g.h_ * g.density(g.nodes_[j]);
  }
  g.weights_.front() *= 0.5;
  g.weights_.back() *= 0.5;

  g.faces_.resize(cells);
  for (std::size_t j = 0; j < cells; ++j) {
    g.faces_[j] = g.density(r0 + (static_cast<double>(j) + 0.5) * g.h_);
  }
  return g;
}

struct GeometricConditionReport {
  /// max over Gamma_0 of (x - x0) . nu; must be <= 0
  double inner_max = 0.0;
  /// min over Gamma_1 of (x - x0) . nu; must be > 0
  double outer_min = 0.0;
  bool holds = false;
};

/// Multiplier condition for boundary stabilization with x0 placed on the
/// symmetry axis at signed distance `x0_offset` from the origin.
inline GeometricConditionReport geometric_condition_check(const RadialGrid& grid,
                                                          double x0_offset) {
  GeometricConditionReport rep;
  if (grid.dim() == 1) {
    // Gamma_0 = {r0} with nu = -1, Gamma_1 = {r1} with nu = +1.
    rep.inner_max = x0_offset - grid.r0();
    rep.outer_min = grid.r1() - x0_offset;
  } else {
    // On a sphere of radius R, (R e - x0) . e ranges over R +- |x0|.
    const double d = std::abs(x0_offset);
    rep.inner_max = -grid.r0() + d;
    rep.outer_min = grid.r1() - d;
  }
  rep.holds = rep.inner_max <= 0.0 && rep.outer_min > 0.0;
  return rep;
}

}  // namespace glsim
