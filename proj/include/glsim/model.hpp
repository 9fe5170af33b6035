#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/tools/toms748_solve.hpp>

#include "glsim/error.hpp"
#include "glsim/geometry.hpp"

namespace glsim {

using cplx = std::complex<double>;

/// Coefficients of u_t - (lambda + i alpha) Lap u + (kappa + i beta)|u|^{p-1} u - gamma u = 0.
struct ModelParams {
  double lambda = 1.0;
  double alpha = 1.0;
  double kappa = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double p = 3.0;
  int dim = 1;

  cplx diffusion() const noexcept { return {lambda, alpha}; }
  cplx source_coefficient() const noexcept { return {kappa, beta}; }
  bool is_linear() const noexcept { return kappa == 0.0 && beta == 0.0 && gamma == 0.0; }
};

/// Construction-level constraints; per-experiment ones are checked by the studies.
inline std::vector<Issue> validate(const ModelParams& params) {
  std::vector<Issue> issues;
  if (!(params.alpha > 0.0)) issues.push_back({"params.alpha", "alpha must be > 0"});
  if (!(params.lambda >= 0.0)) issues.push_back({"params.lambda", "lambda must be >= 0"});
  if (!(params.kappa >= 0.0)) issues.push_back({"params.kappa", "kappa must be >= 0"});
  if (!std::isfinite(params.beta)) issues.push_back({"params.beta", "beta must be finite"});
  if (!std::isfinite(params.gamma)) issues.push_back({"params.gamma", "gamma must be finite"});
  if (!(params.p >= 2.0) || !std::isfinite(params.p)) {
    issues.push_back({"params.p", "p must be >= 2"});
  }
  return issues;
}

/// Admissible (p, N) pairs for global strong solutions when beta > 0.
inline bool global_exponent_range(double p, int dim) {
  switch (dim) {
    case 1: return p >= 2.0;
    case 2: return p >= 2.0 && p <= 5.0;
    case 3: return p >= 2.0 && p <= 11.0 / 3.0;
    default: return false;
  }
}

namespace detail {

// |u|^e for e >= 0 with fast paths for the integer exponents used in practice.
inline double abs_pow(cplx u, double e) {
  const double a2 = std::norm(u);
  if (e == 2.0) return a2;
  if (e == 1.0) return std::sqrt(a2);
  if (e == 4.0) return a2 * a2;
  if (e == 0.0) return 1.0;
  return std::pow(std::sqrt(a2), e);
}

}  // namespace detail

/// F(u) = -(kappa + i beta)|u|^{p-1} u + gamma u
inline cplx nonlinearity(cplx u, const ModelParams& params) {
  return -params.source_coefficient() * detail::abs_pow(u, params.p - 1.0) * u + params.gamma * u;
}

/// Only the power part -(kappa + i beta)|u|^{p-1} u; the stepper treats gamma u implicitly.
inline cplx power_term(cplx u, const ModelParams& params) {
  return -params.source_coefficient() * detail::abs_pow(u, params.p - 1.0) * u;
}

/// Directional derivative of F at u along w (conjugate-linear in w through w-bar).
inline cplx nonlinearity_tangent(cplx u, cplx w, const ModelParams& params) {
  const double p = params.p;
  const double a = std::abs(u);
  const double pm1 = detail::abs_pow(u, p - 1.0);
  // |u|^{p-3} u^2 has modulus |u|^{p-1}; at u = 0 its limit is 0.
  cplx conj_part{0.0, 0.0};
  if (a > 0.0) {
    conj_part = (pm1 / (a * a)) * u * u * std::conj(w);
  }
  const cplx braces = 0.5 * (p + 1.0) * pm1 * w + 0.5 * (p - 1.0) * conj_part;
  return -params.source_coefficient() * braces + params.gamma * w;
}

// ---------------------------------------------------------------------------
// Boundary feedback g(z) = phi(|z|) z with real phi in [m, M].

enum class FeedbackFamily { identity, saturating, custom };

inline const char* to_string(FeedbackFamily f) {
  switch (f) {
    case FeedbackFamily::identity: return "identity";
    case FeedbackFamily::saturating: return "saturating";
    case FeedbackFamily::custom: return "custom";
  }
  return "?";
}

class FeedbackSpec {
 public:
  FeedbackSpec() = default;

  static FeedbackSpec identity() { return FeedbackSpec{}; }

  /// phi(s) = m + (M - m) / (1 + s): equals M at the origin and tends to m.
  static FeedbackSpec saturating(double m, double M) {
    FeedbackSpec spec;
    spec.family_ = FeedbackFamily::saturating;
    spec.m_ = m;
    spec.M_ = M;
    spec.phi_ = [m, M](double s) { return m + (M - m) / (1.0 + s); };
    return spec;
  }

  /// Arbitrary real profile; m and M are the claimed bounds, not enforced.
  static FeedbackSpec custom(std::function<double(double)> phi, double m, double M) {
    FeedbackSpec spec;
    spec.family_ = FeedbackFamily::custom;
    spec.m_ = m;
    spec.M_ = M;
    spec.phi_ = std::move(phi);
    return spec;
  }

  /// Custom profile given by polynomial coefficients c0 + c1 s + c2 s^2 + ...
  static FeedbackSpec polynomial(std::vector<double> coeffs, double m, double M) {
    return custom(
        [c = std::move(coeffs)](double s) {
          double acc = 0.0;
          for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * s + *it;
          return acc;
        },
        m, M);
  }

  FeedbackFamily family() const noexcept { return family_; }
  double m() const noexcept { return m_; }
  double M() const noexcept { return M_; }
  bool is_identity() const noexcept { return family_ == FeedbackFamily::identity; }
  double profile(double s) const { return phi_ ? phi_(s) : 1.0; }

 private:
  FeedbackFamily family_ = FeedbackFamily::identity;
  double m_ = 1.0;
  double M_ = 1.0;
  std::function<double(double)> phi_;
};

inline cplx feedback_eval(cplx z, const FeedbackSpec& spec) {
  if (spec.is_identity()) return z;
  return spec.profile(std::abs(z)) * z;
}

/// Solves g(z) = y by a bracketed root solve of phi(s) s = |y| and restoring the phase of y.
inline cplx feedback_invert(cplx y, const FeedbackSpec& spec) {
  if (spec.is_identity()) return y;
  const double target = std::abs(y);
  if (target == 0.0) return {0.0, 0.0};

  auto residual = [&](double s) { return spec.profile(s) * s - target; };

  double lo = 0.0;
  double hi = spec.m() > 0.0 ? target / spec.m() : target;
  double f_lo = -target;
  double f_hi = residual(hi);
  // phi >= m makes [0, |y|/m] a bracket; custom profiles may need widening.
  for (int k = 0; k < 60 && f_hi < 0.0; ++k) {
    lo = hi;
    f_lo = f_hi;
    hi *= 2.0;
    f_hi = residual(hi);
  }
  if (!(f_hi >= 0.0)) {
    throw Error(ErrorKind::non_convergence, "feedback_invert: no bracket for |y| = " +
                                                std::to_string(target));
  }
  if (f_hi == 0.0) return hi * (y / target);

  std::uintmax_t max_iter = 100;
  const auto [a, b] = boost::math::tools::toms748_solve(
      residual, lo, hi, f_lo, f_hi, boost::math::tools::eps_tolerance<double>(50), max_iter);
  if (max_iter >= 100) {
    throw Error(ErrorKind::non_convergence, "feedback_invert: modulus solve did not converge");
  }
  const double s = 0.5 * (a + b);
  return s * (y / target);
}

struct AssumptionReport {
  double m_est = 0.0;
  double M_est = 0.0;
  double inverse_m_est = 0.0;
  double inverse_M_est = 0.0;
  double max_imag = 0.0;
  bool inverse_ok = true;
  bool pass = false;
};

/// Sampled check of monotonicity, linear growth and Im(g(z) conj z) = 0 for g
/// and for its numerical inverse, whose constants are estimated separately.
inline AssumptionReport assumption_check(const FeedbackSpec& spec, std::size_t samples,
                                         std::uint64_t seed = 20240611, double radius = 5.0) {
  AssumptionReport rep;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> mod(0.0, radius);
  std::uniform_real_distribution<double> arg(-std::numbers::pi, std::numbers::pi);
  auto draw = [&] { return std::polar(mod(rng), arg(rng)); };

  constexpr double inf = std::numeric_limits<double>::infinity();
  double m_est = inf, M_est = 0.0, mi_est = inf, Mi_est = 0.0, max_imag = 0.0;

  // Im(g z-bar) relative to |g||z|; phi real makes it vanish up to rounding.
  auto relative_imag = [](cplx g, cplx z) {
    const double scale = std::abs(g) * std::abs(z);
    return scale > 0.0 ? std::abs(std::imag(g * std::conj(z))) / scale : 0.0;
  };
  auto monotone_ratio = [](cplx gz, cplx gv, cplx z, cplx v) {
    return std::real((gz - gv) * std::conj(z - v)) / std::norm(z - v);
  };

  for (std::size_t k = 0; k < samples; ++k) {
    const cplx z = draw();
    const cplx v = draw();
    if (z == v) continue;
    const cplx gz = feedback_eval(z, spec);
    const cplx gv = feedback_eval(v, spec);
    m_est = std::min(m_est, monotone_ratio(gz, gv, z, v));
    if (std::abs(z) > 0.0) M_est = std::max(M_est, std::abs(gz) / std::abs(z));
    max_imag = std::max(max_imag, relative_imag(gz, z));

    if (rep.inverse_ok) {
      try {
        const cplx iz = feedback_invert(z, spec);
        const cplx iv = feedback_invert(v, spec);
        mi_est = std::min(mi_est, monotone_ratio(iz, iv, z, v));
        if (std::abs(z) > 0.0) Mi_est = std::max(Mi_est, std::abs(iz) / std::abs(z));
        max_imag = std::max(max_imag, relative_imag(iz, z));
      } catch (const Error&) {
        rep.inverse_ok = false;
      }
    }
  }

  rep.m_est = m_est;
  rep.M_est = M_est;
  rep.inverse_m_est = mi_est;
  rep.inverse_M_est = Mi_est;
  rep.max_imag = max_imag;
  rep.pass = m_est > 0.0 && std::isfinite(M_est) && rep.inverse_ok && mi_est > 0.0 &&
             std::isfinite(Mi_est) && max_imag <= 1e-14;
  return rep;
}

}  // namespace glsim
