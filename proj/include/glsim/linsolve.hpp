#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "glsim/error.hpp"

namespace glsim {

/// Tridiagonal matrix: row i holds lower[i-1], diag[i], upper[i].
template <typename T>
struct TridiagonalSystem {
  std::vector<T> lower;
  std::vector<T> diag;
  std::vector<T> upper;

  TridiagonalSystem() = default;
  explicit TridiagonalSystem(std::size_t n) : lower(n ? n - 1 : 0), diag(n), upper(n ? n - 1 : 0) {}

  std::size_t size() const noexcept { return diag.size(); }

  /// y = A x
  std::vector<T> apply(std::span<const T> x) const {
    const std::size_t n = size();
    std::vector<T> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      T acc = diag[i] * x[i];
      if (i > 0) acc += lower[i - 1] * x[i - 1];
      if (i + 1 < n) acc += upper[i] * x[i + 1];
      y[i] = acc;
    }
    return y;
  }
};

/// Single entry outside the tridiagonal band.
template <typename T>
struct OffBandEntry {
  std::size_t row = 0;
  std::size_t col = 0;
  T value{};
};

namespace detail {

template <typename T>
bool negligible_pivot(const T& pivot, double scale) {
  return std::abs(pivot) <= 64.0 * std::numeric_limits<double>::epsilon() * scale;
}

}  // namespace detail

/// Thomas elimination without pivoting. Throws ZeroPivot when a pivot
/// vanishes relative to the row it came from.
template <typename T>
std::vector<T> thomas_solve(const TridiagonalSystem<T>& sys, std::span<const T> rhs) {
  const std::size_t n = sys.size();
  if (rhs.size() != n || sys.lower.size() + 1 != n || sys.upper.size() + 1 != n) {
    throw Error(ErrorKind::validation_error, "thomas_solve: size mismatch");
  }
  std::vector<T> c(n), d(n);
  T pivot = sys.diag[0];
  if (detail::negligible_pivot(pivot, std::abs(sys.diag[0]) + (n > 1 ? std::abs(sys.upper[0]) : 0.0))) {
    throw Error(ErrorKind::zero_pivot, "thomas_solve: zero pivot in row 0");
  }
  if (n > 1) c[0] = sys.upper[0] / pivot;
  d[0] = rhs[0] / pivot;
  for (std::size_t i = 1; i < n; ++i) {
    const T coupling = sys.lower[i - 1] * c[i - 1];
    pivot = sys.diag[i] - coupling;
    if (detail::negligible_pivot(pivot, std::abs(sys.diag[i]) + std::abs(coupling))) {
      throw Error(ErrorKind::zero_pivot, "thomas_solve: zero pivot in row " + std::to_string(i));
    }
    if (i + 1 < n) c[i] = sys.upper[i] / pivot;
    d[i] = (rhs[i] - sys.lower[i - 1] * d[i - 1]) / pivot;
  }
  std::vector<T> x(n);
  x[n - 1] = d[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
  return x;
}

/// Tridiagonal system plus one entry in the last row at column n-3. The entry
/// is eliminated against row n-2, then the Thomas sweep runs.
template <typename T>
std::vector<T> bordered_solve(TridiagonalSystem<T> sys, const OffBandEntry<T>& extra,
                              std::span<const T> rhs) {
  const std::size_t n = sys.size();
  if (n < 3 || extra.row != n - 1 || extra.col != n - 3) {
    throw Error(ErrorKind::validation_error, "bordered_solve: extra entry must sit at (n-1, n-3)");
  }
  std::vector<T> b(rhs.begin(), rhs.end());
  if (extra.value != T{}) {
    // Row n-2 has lower[n-3] in column n-3.
    const T anchor = sys.lower[n - 3];
    if (detail::negligible_pivot(anchor, std::abs(extra.value))) {
      throw Error(ErrorKind::zero_pivot, "bordered_solve: cannot eliminate off-band entry");
    }
    const T mu = extra.value / anchor;
    sys.lower[n - 2] -= mu * sys.diag[n - 2];
    sys.diag[n - 1] -= mu * sys.upper[n - 2];
    b[n - 1] -= mu * b[n - 2];
  }
  return thomas_solve<T>(sys, b);
}

/// Banded Gaussian elimination with partial pivoting for the tridiagonal (+1)
/// pattern; used when the unpivoted sweep hits a zero pivot.
template <typename T>
std::vector<T> pivoted_band_solve(const TridiagonalSystem<T>& sys,
                                  const std::optional<OffBandEntry<T>>& extra,
                                  std::span<const T> rhs) {
  const std::size_t n = sys.size();
  // Row i stores columns i-kl .. i+ku+kl; pivoting can add kl super-diagonals.
  const std::size_t kl = extra ? 2 : 1;
  const std::size_t ku = 1;
  const std::size_t width = 2 * kl + ku + 1;
  std::vector<T> band(n * width, T{});
  auto at = [&](std::size_t i, std::size_t j) -> T& { return band[i * width + (j + kl - i)]; };

  for (std::size_t i = 0; i < n; ++i) {
    at(i, i) = sys.diag[i];
    if (i > 0) at(i, i - 1) = sys.lower[i - 1];
    if (i + 1 < n) at(i, i + 1) = sys.upper[i];
  }
  if (extra) at(extra->row, extra->col) += extra->value;

  std::vector<T> b(rhs.begin(), rhs.end());
  std::vector<std::size_t> perm_row(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t last = std::min(n - 1, k + kl);
    std::size_t piv = k;
    double best = std::abs(at(k, k));
    for (std::size_t i = k + 1; i <= last; ++i) {
      if (std::abs(at(i, k)) > best) {
        best = std::abs(at(i, k));
        piv = i;
      }
    }
    if (best == 0.0) {
      throw Error(ErrorKind::zero_pivot, "pivoted_band_solve: singular matrix");
    }
    const std::size_t col_end = std::min(n - 1, k + ku + kl);
    if (piv != k) {
      for (std::size_t j = k; j <= col_end; ++j) std::swap(at(k, j), at(piv, j));
      std::swap(b[k], b[piv]);
    }
    for (std::size_t i = k + 1; i <= last; ++i) {
      const T f = at(i, k) / at(k, k);
      if (f == T{}) continue;
      at(i, k) = T{};
      for (std::size_t j = k + 1; j <= col_end; ++j) at(i, j) -= f * at(k, j);
      b[i] -= f * b[k];
    }
  }
  std::vector<T> x(n);
  for (std::size_t k = n; k-- > 0;) {
    T acc = b[k];
    const std::size_t col_end = std::min(n - 1, k + ku + kl);
    for (std::size_t j = k + 1; j <= col_end; ++j) acc -= at(k, j) * x[j];
    x[k] = acc / at(k, k);
  }
  return x;
}

/// Fast path first, pivoted elimination if the fast path reports ZeroPivot.
template <typename T>
std::vector<T> robust_solve(const TridiagonalSystem<T>& sys,
                            const std::optional<OffBandEntry<T>>& extra, std::span<const T> rhs) {
  try {
    return extra ? bordered_solve<T>(sys, *extra, rhs) : thomas_solve<T>(sys, rhs);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::zero_pivot) throw;
  }
  return pivoted_band_solve<T>(sys, extra, rhs);
}

}  // namespace glsim
