#pragma once

// Adaptive composite Gauss-Legendre quadrature.  A 12-point rule is applied
// on n equal panels and n is doubled until two successive composite values
// agree to the requested absolute tolerance.  The integrands in this library
// are smooth and rapidly decaying, so convergence is fast; failure to
// converge indicates corrupted inputs and is reported as a numerical error.

#include <cmath>
#include <cstddef>

#include "vshock/errors.hpp"

namespace vshock {

namespace detail {
// Nodes/weights of the 12-point Gauss-Legendre rule on [-1, 1] (positive
// half; the rule is symmetric).
inline constexpr double gl12_x[6] = {
    0.1252334085114689155, 0.3678314989981801937, 0.5873179542866174473,
    0.7699026741943046870, 0.9041172563704748566, 0.9815606342467192506};
inline constexpr double gl12_w[6] = {
    0.2491470458134027850, 0.2334925365383548087, 0.2031674267230659217,
    0.1600783285433462263, 0.1069393259953184266, 0.0471753363865118271};
}  // namespace detail

// One 12-point panel over [a, b].
template <typename F>
double gl12_panel(F&& f, double a, double b) {
  double mid = 0.5 * (a + b);
  double half = 0.5 * (b - a);
  double acc = 0.0;
  for (int k = 0; k < 6; ++k) {
    double dx = half * detail::gl12_x[k];
    acc += detail::gl12_w[k] * (f(mid - dx) + f(mid + dx));
  }
  return half * acc;
}

template <typename F>
double gl12_composite(F&& f, double a, double b, std::size_t panels) {
  double h = (b - a) / static_cast<double>(panels);
  double acc = 0.0;
  for (std::size_t p = 0; p < panels; ++p)
    acc += gl12_panel(f, a + h * static_cast<double>(p),
                      a + h * static_cast<double>(p + 1));
  return acc;
}

// Integrate f over [a, b] to absolute tolerance tol by panel doubling.
template <typename F>
double integrate_adaptive(F&& f, double a, double b, double tol) {
  if (a == b) return 0.0;
  double sign = 1.0;
  if (b < a) {
    std::swap(a, b);
    sign = -1.0;
  }
  // Initial resolution: roughly one panel per unit length.
  double len = b - a;
  std::size_t panels = static_cast<std::size_t>(len) + 1;
  if (panels < 2) panels = 2;
  if (panels > 32) panels = 32;
  double prev = gl12_composite(f, a, b, panels);
  constexpr std::size_t kMaxPanels = std::size_t(1) << 17;
  while (panels <= kMaxPanels) {
    panels *= 2;
    double cur = gl12_composite(f, a, b, panels);
    if (std::abs(cur - prev) < tol && std::isfinite(cur)) return sign * cur;
    prev = cur;
  }
  throw numerical_error(
      "quadrature did not converge",
      {{"a", ctx_num(a)}, {"b", ctx_num(b)}, {"tol", ctx_num(tol)},
       {"last_value", ctx_num(prev)}});
}

}  // namespace vshock
