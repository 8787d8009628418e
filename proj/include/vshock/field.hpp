#pragma once

// Scalar fields on the half-plane (r, z) in [0, inf) x R.
//
// ScalarField wraps a point evaluator plus optional analytic derivative
// closures.  Fields are assumed to decay: |f| < tail_tol outside the ball
// r^2 + z^2 < R_sup^2, which lets radial antiderivatives truncate the
// integral to [r, R_sup].  When a field carries analytic z-derivatives the
// derived fields (antiderivative, diff_z) propagate them by integrating /
// forwarding the closures; otherwise centered finite differences with the
// h_fd step rule are used.  The finite-difference fallback differentiates
// quadrature-backed evaluations and therefore carries O(quad_tol / h) noise;
// all built-in presets provide analytic closures so the accurate path is the
// one exercised by default.

#include <cmath>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "vshock/errors.hpp"
#include "vshock/grid.hpp"
#include "vshock/parallel.hpp"
#include "vshock/quadrature.hpp"

namespace vshock {

using field_fn = std::function<double(double, double)>;

struct ScalarField {
  field_fn eval;        // required
  field_fn d_dr;        // optional: partial_r
  field_fn d_dz;        // optional: partial_z
  field_fn d_dz2;       // optional: partial_z^2
  double R_sup = 10.0;  // decay radius
  double tail_tol = 1e-12;

  double operator()(double r, double z) const { return eval(r, z); }
  bool has_dr() const { return static_cast<bool>(d_dr); }
  bool has_dz() const { return static_cast<bool>(d_dz); }
  bool has_dz2() const { return static_cast<bool>(d_dz2); }
};

// Finite-difference step: never below 1e-5 so that differences of
// quadrature-backed values stay above the quadrature noise floor.
inline double h_fd(double x) {
  double eps_root = std::sqrt(std::numeric_limits<double>::epsilon());
  double h = eps_root * (1.0 + std::abs(x));
  return h > 1e-5 ? h : 1e-5;
}

// Centered 2nd-order difference of a 1D callable.
template <typename F>
double fd_central(F&& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

// Centered 4th-order (5-point) difference; used where 1e-8-level accuracy is
// required from sampled values.
template <typename F>
double fd_central4(F&& f, double x, double h) {
  return (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) /
         (12.0 * h);
}

struct GriddedField {
  Grid2D grid;
  std::vector<double> values;  // r-major, size grid.n_r * grid.n_z

  GriddedField() = default;
  explicit GriddedField(const Grid2D& g) : grid(g), values(g.size(), 0.0) {}
  GriddedField(const Grid2D& g, std::vector<double> v)
      : grid(g), values(std::move(v)) {
    if (values.size() != grid.size())
      throw validation_error("gridded field size mismatch",
                             {{"expected", std::to_string(grid.size())},
                              {"got", std::to_string(values.size())}});
  }

  double& at(std::size_t j, std::size_t i) { return values[grid.index(j, i)]; }
  double at(std::size_t j, std::size_t i) const {
    return values[grid.index(j, i)];
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : values) {
      double a = std::abs(v);
      if (a > m) m = a;
    }
    return m;
  }
};

inline double linf_distance(const GriddedField& a, const GriddedField& b) {
  if (!(a.grid == b.grid))
    throw validation_error("L-inf distance requires identical grids");
  double m = 0.0;
  for (std::size_t k = 0; k < a.values.size(); ++k) {
    double d = std::abs(a.values[k] - b.values[k]);
    if (d > m) m = d;
  }
  return m;
}

// phi = antiderivative_r(omega):  phi(r, z) = -int_r^inf omega(rho, z) drho,
// truncated at omega.R_sup.  The radial derivative of the result is omega
// itself (exact identity); z-derivatives integrate omega's closures when
// available and fall back to finite differences of the evaluation otherwise.
inline ScalarField antiderivative_r(const ScalarField& omega,
                                    double quad_tol = 1e-10) {
  if (!omega.eval) throw validation_error("antiderivative_r: field has no evaluator");
  double R = omega.R_sup;
  ScalarField phi;
  phi.R_sup = R;
  phi.tail_tol = omega.tail_tol;
  auto omega_eval = omega.eval;
  phi.eval = [omega_eval, R, quad_tol](double r, double z) -> double {
    if (r >= R) return 0.0;
    return -integrate_adaptive([&](double rho) { return omega_eval(rho, z); },
                               r, R, quad_tol);
  };
  phi.d_dr = omega.eval;
  if (omega.has_dz()) {
    auto dz = omega.d_dz;
    phi.d_dz = [dz, R, quad_tol](double r, double z) -> double {
      if (r >= R) return 0.0;
      return -integrate_adaptive([&](double rho) { return dz(rho, z); }, r, R,
                                 quad_tol);
    };
  } else {
    auto ev = phi.eval;
    phi.d_dz = [ev](double r, double z) {
      return fd_central([&](double zz) { return ev(r, zz); }, z, h_fd(z));
    };
  }
  if (omega.has_dz2()) {
    auto dz2 = omega.d_dz2;
    phi.d_dz2 = [dz2, R, quad_tol](double r, double z) -> double {
      if (r >= R) return 0.0;
      return -integrate_adaptive([&](double rho) { return dz2(rho, z); }, r, R,
                                 quad_tol);
    };
  } else {
    auto dz = phi.d_dz;
    phi.d_dz2 = [dz](double r, double z) {
      return fd_central([&](double zz) { return dz(r, zz); }, z, h_fd(z));
    };
  }
  return phi;
}

// partial_z as a field: forwards analytic closures when present.
inline ScalarField diff_z(const ScalarField& f) {
  if (!f.eval) throw validation_error("diff_z: field has no evaluator");
  ScalarField g;
  g.R_sup = f.R_sup;
  g.tail_tol = f.tail_tol;
  if (f.has_dz()) {
    g.eval = f.d_dz;
  } else {
    auto ev = f.eval;
    g.eval = [ev](double r, double z) {
      return fd_central([&](double zz) { return ev(r, zz); }, z, h_fd(z));
    };
  }
  if (f.has_dz2()) {
    g.d_dz = f.d_dz2;
  } else {
    auto ev = g.eval;
    g.d_dz = [ev](double r, double z) {
      return fd_central([&](double zz) { return ev(r, zz); }, z, h_fd(z));
    };
  }
  return g;
}

// Evaluate a field at every grid node (rows in parallel).
inline GriddedField sample(const ScalarField& f, const Grid2D& grid) {
  if (!f.eval) throw validation_error("sample: field has no evaluator");
  GriddedField out(grid);
  parallel_for(grid.n_r, [&](std::size_t j) {
    double r = grid.r(j);
    for (std::size_t i = 0; i < grid.n_z; ++i)
      out.at(j, i) = f.eval(r, grid.z(i));
  });
  return out;
}

}  // namespace vshock
