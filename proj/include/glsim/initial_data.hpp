#pragma once

// Initial data families on a RadialGrid. With s = (r - r0)/(r1 - r0):
//
//   bump: a e^{i phase} exp(-((s - c)/w)^2), multiplied by smooth cutoffs that
//         vanish identically near r0 and within max(0.1, 2h/L) of r1
//   mode: a e^{i phase} sin^3(n pi s)
//   zero
//
// Both nonzero families have u, d_nu u and Lap u all vanishing on Gamma_1, so
// they satisfy the compatibility condition for any parameters. Setting
// `noise` > 0 adds sum_{k=1..4} c_k sin^3(k pi s) with complex Gaussian c_k
// drawn from `seed`.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "glsim/discrete_ops.hpp"
#include "glsim/error.hpp"
#include "glsim/geometry.hpp"

namespace glsim {

enum class InitialFamily { zero, bump, mode, values };

inline const char* to_string(InitialFamily f) {
  switch (f) {
    case InitialFamily::zero: return "zero";
    case InitialFamily::bump: return "bump";
    case InitialFamily::mode: return "mode";
    case InitialFamily::values: return "file";
  }
  return "?";
}

struct InitialSpec {
  InitialFamily family = InitialFamily::bump;
  double amplitude = 1.0;
  double phase = 0.0;
  double center = 0.4;  // bump, fraction of r1 - r0
  double width = 0.15;  // bump, fraction of r1 - r0
  int mode = 1;
  double noise = 0.0;
  std::uint64_t seed = 1;
  ComplexField values;  // family "file": nodal values, one per grid node
};

namespace detail {

// C-infinity step: 0 for x <= 0, 1 for x >= 1.
inline double smooth_step(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / x);
  const double b = std::exp(-1.0 / (1.0 - x));
  return a / (a + b);
}

inline double sin_cubed(double x) {
  const double s = std::sin(x);
  return s * s * s;
}

}  // namespace detail

inline ComplexField make_initial(const RadialGrid& grid, const InitialSpec& spec) {
  const double r0 = grid.r0();
  const double L = grid.r1() - r0;
  const cplx scale = std::polar(spec.amplitude, spec.phase);
  ComplexField u;

  switch (spec.family) {
    case InitialFamily::zero:
      u.assign(grid.size(), cplx{});
      break;
    case InitialFamily::bump: {
      const double ramp = 0.1;
      const double cut = std::max(0.1, 2.0 * grid.h() / L);
      u = sample(grid, [&](double r) {
        const double s = (r - r0) / L;
        const double window = detail::smooth_step(s / ramp) * detail::smooth_step((1.0 - cut - s) / ramp);
        const double z = (s - spec.center) / spec.width;
        return scale * (std::exp(-z * z) * window);
      });
      break;
    }
    case InitialFamily::mode:
      u = sample(grid, [&](double r) {
        return scale * detail::sin_cubed(spec.mode * std::numbers::pi * (r - r0) / L);
      });
      break;
    case InitialFamily::values:
      if (spec.values.size() != grid.size()) {
        throw Error(ErrorKind::validation_error,
                    std::vector<Issue>{{"initial.values", "expected " + std::to_string(grid.size()) +
                                                              " nodal values, got " +
                                                              std::to_string(spec.values.size())}});
      }
      u = spec.values;
      break;
  }

  if (spec.noise > 0.0 && spec.family != InitialFamily::values) {
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> normal(0.0, spec.noise);
    std::vector<cplx> c(4);
    for (auto& ck : c) {
      const double re = normal(rng);
      ck = {re, normal(rng)};
    }
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const double s = (grid.node(j) - r0) / L;
      for (std::size_t k = 0; k < c.size(); ++k) {
        u[j] += c[k] * detail::sin_cubed((k + 1.0) * std::numbers::pi * s);
      }
    }
  }
  u.front() = 0.0;
  return u;
}

}  // namespace glsim
