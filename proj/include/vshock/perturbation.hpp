#pragma once

// Finite-dimensional correction of the limit dynamics.  In dimension d the
// vorticity satisfies
//
//   dt(w) + phi dz(w) + w dz(phi) + e Q[w] = 0,     e = 1/(d - 2),
//
// where the correction transport
//
//   Q[w] = (-r dz(phi) + e dz(sigma)) dr(w)
//        + (phi + r w - sigma/r - e dr(sigma)) dz(w)
//        - (dz(sigma)/r) w
//
// couples the rows through the modified stream function sigma solved from
// the elliptic problem of elliptic.hpp.  Time stepping mirrors the direct
// solver (SSP-RK3, phi and sigma rebuilt every stage).  Velocities are
// reconstructed from psi = -r phi + e sigma via
//
//   u_r = -e r dz(phi) + e^2 dz(sigma),
//   u_z =  e r dr(phi) - e^2 dr(sigma) - e sigma / r + (1 + e) phi,
//
// and the renormalized divergence  e (dr(u_r) + dz(u_z)) + u_r / r  vanishes
// identically in the continuum; its discrete residual measures the scheme's
// consistency order.
//
// Ghost closures for the centered differences: across the axis w, sigma and
// u_r are odd while phi and u_z are even; beyond r_max and the z boundaries
// values are extended by zero (all fields decay).

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "vshock/direct_solver.hpp"
#include "vshock/elliptic.hpp"
#include "vshock/errors.hpp"
#include "vshock/field.hpp"
#include "vshock/grid.hpp"
#include "vshock/parallel.hpp"

namespace vshock {

// The perturbation strength e = 1/(d - 2) of dimension d.
struct Epsilon {
  double value = 1.0;

  explicit Epsilon(double v) : value(v) {
    if (!(v > 0.0) || v > 1.0 || !std::isfinite(v))
      throw validation_error("epsilon must lie in (0, 1]", {{"eps", ctx_num(v)}});
  }
  static Epsilon from_dimension(int d) {
    if (d < 3)
      throw validation_error("dimension must be at least 3",
                             {{"d", std::to_string(d)}});
    return Epsilon(1.0 / static_cast<double>(d - 2));
  }
};

struct PerturbedState {
  Grid2D grid;
  double eps = 1.0;
  double t = 0.0;
  std::vector<double> omega;
  std::vector<double> phi;    // trailing radial sum of omega
  std::vector<double> sigma;  // elliptic solve for the current phi
};

namespace stencil {

// Centered z derivative, zero ghosts outside [z_min, z_max].
inline double dz(const Grid2D& g, const std::vector<double>& v, std::size_t j,
                 std::size_t i) {
  double vm = i > 0 ? v[g.index(j, i - 1)] : 0.0;
  double vp = i + 1 < g.n_z ? v[g.index(j, i + 1)] : 0.0;
  return (vp - vm) / (2.0 * g.dz());
}

// Centered r derivative; parity = -1 for odd fields, +1 for even fields
// across the axis; zero ghost beyond r_max.
inline double dr(const Grid2D& g, const std::vector<double>& v, std::size_t j,
                 std::size_t i, double parity) {
  double vm = j > 0 ? v[g.index(j - 1, i)] : parity * v[g.index(0, i)];
  double vp = j + 1 < g.n_r ? v[g.index(j + 1, i)] : 0.0;
  return (vp - vm) / (2.0 * g.dr());
}

}  // namespace stencil

inline PerturbedState init_perturbed(const ScalarField& w0,
                                     const EllipticProblem& prob,
                                     const Epsilon& eps) {
  PerturbedState s;
  s.grid = prob.grid;
  s.eps = eps.value;
  s.t = 0.0;
  s.omega = sample(w0, prob.grid).values;
  compute_phi(s.grid, s.omega, s.phi);
  s.sigma = solve_with_rhs(prob, elliptic_rhs(s.grid, s.phi));
  return s;
}

// The correction transport Q[w] for the state's (w, phi, sigma).
inline GriddedField assemble_Q(const PerturbedState& s) {
  const Grid2D& g = s.grid;
  GriddedField q(g);
  const double eps = s.eps;
  parallel_for(g.n_r, [&](std::size_t j) {
    double r = g.r(j);
    for (std::size_t i = 0; i < g.n_z; ++i) {
      double w = s.omega[g.index(j, i)];
      double phi = s.phi[g.index(j, i)];
      double sig = s.sigma[g.index(j, i)];
      double dz_phi = stencil::dz(g, s.phi, j, i);
      double dz_sig = stencil::dz(g, s.sigma, j, i);
      double dr_sig = stencil::dr(g, s.sigma, j, i, -1.0);
      double dr_w = stencil::dr(g, s.omega, j, i, -1.0);
      double dz_w = stencil::dz(g, s.omega, j, i);
      double a_r = -r * dz_phi + eps * dz_sig;
      double a_z = phi + r * w - sig / r - eps * dr_sig;
      q.at(j, i) = a_r * dr_w + a_z * dz_w - (dz_sig / r) * w;
    }
  });
  return q;
}

namespace detail {

// dw/dt = -(phi dz(w) + w dz(phi)) - e Q[w] for a scratch state.
inline void perturbed_rhs(const PerturbedState& s, const EllipticProblem& prob,
                          std::vector<double>& out, int threads) {
  const Grid2D& g = s.grid;
  const double eps = s.eps;
  out.resize(g.size());
  parallel_for(g.n_r, [&](std::size_t j) {
    double r = g.r(j);
    for (std::size_t i = 0; i < g.n_z; ++i) {
      std::size_t k = g.index(j, i);
      double w = s.omega[k];
      double phi = s.phi[k];
      double sig = s.sigma[k];
      double dz_phi = stencil::dz(g, s.phi, j, i);
      double dz_sig = stencil::dz(g, s.sigma, j, i);
      double dr_sig = stencil::dr(g, s.sigma, j, i, -1.0);
      double dr_w = stencil::dr(g, s.omega, j, i, -1.0);
      double dz_w = stencil::dz(g, s.omega, j, i);
      double a_r = -r * dz_phi + eps * dz_sig;
      double a_z = phi + r * w - sig / r - eps * dr_sig;
      double q = a_r * dr_w + a_z * dz_w - (dz_sig / r) * w;
      out[k] = -(phi * dz_w + w * dz_phi) - eps * q;
    }
  }, threads);
  (void)prob;
}

inline void refresh_derived(PerturbedState& s, const EllipticProblem& prob) {
  compute_phi(s.grid, s.omega, s.phi);
  s.sigma = solve_with_rhs(prob, elliptic_rhs(s.grid, s.phi));
}

// Largest admissible dt for the current state under the combined CFL bound
// dt (max|a_z|/dz + max|a_r|/dr) <= cfl.
inline double perturbed_dt_bound(const PerturbedState& s, double cfl) {
  const Grid2D& g = s.grid;
  const double eps = s.eps;
  double max_speed = 0.0;
  for (std::size_t j = 0; j < g.n_r; ++j) {
    double r = g.r(j);
    for (std::size_t i = 0; i < g.n_z; ++i) {
      std::size_t k = g.index(j, i);
      double a_z = s.phi[k] + eps * (s.phi[k] + r * s.omega[k] - s.sigma[k] / r -
                                     eps * stencil::dr(g, s.sigma, j, i, -1.0));
      double a_r = eps * (-r * stencil::dz(g, s.phi, j, i) +
                          eps * stencil::dz(g, s.sigma, j, i));
      double speed = std::abs(a_z) / g.dz() + std::abs(a_r) / g.dr();
      if (speed > max_speed) max_speed = speed;
    }
  }
  return max_speed > 0.0 ? cfl / max_speed
                         : std::numeric_limits<double>::infinity();
}

inline void check_perturbed(const PerturbedState& s, double boundary_tol) {
  const Grid2D& g = s.grid;
  double b = 0.0;
  for (std::size_t j = 0; j < g.n_r; ++j) {
    b = std::max(b, std::abs(s.omega[g.index(j, 0)]));
    b = std::max(b, std::abs(s.omega[g.index(j, g.n_z - 1)]));
  }
  // Radial transport exists here, so also watch the outer radial row.
  for (std::size_t i = 0; i < g.n_z; ++i)
    b = std::max(b, std::abs(s.omega[g.index(g.n_r - 1, i)]));
  if (b > boundary_tol)
    throw numerical_error(
        "vorticity reached the domain boundary; enlarge the domain",
        {{"t", ctx_num(s.t)}, {"boundary_value", ctx_num(b)},
         {"tol", ctx_num(boundary_tol)}});
  for (double v : s.omega)
    if (!std::isfinite(v))
      throw numerical_error("perturbed state is no longer finite",
                            {{"t", ctx_num(s.t)}});
}

}  // namespace detail

// One SSP-RK3 step of the perturbed dynamics; phi and sigma are rebuilt from
// the stage vorticity before every right-hand-side evaluation.
inline void step_perturbed(PerturbedState& s, double dt,
                           const EllipticProblem& prob,
                           const SolverOptions& opts = {}) {
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw validation_error("step_perturbed: dt must be positive and finite",
                           {{"dt", ctx_num(dt)}});
  if (!(prob.grid == s.grid))
    throw validation_error("step_perturbed: factorization grid mismatch");
  if (prob.eps != s.eps)
    throw validation_error("step_perturbed: factorization eps mismatch",
                           {{"state_eps", ctx_num(s.eps)},
                            {"problem_eps", ctx_num(prob.eps)}});
  double dt_max = detail::perturbed_dt_bound(s, opts.cfl);
  if (dt > dt_max * (1.0 + 1e-12))
    throw numerical_error("step_perturbed: CFL condition violated",
                          {{"dt", ctx_num(dt)}, {"dt_max", ctx_num(dt_max)},
                           {"cfl", ctx_num(opts.cfl)}});

  const std::size_t n = s.grid.size();
  std::vector<double> rhs;
  PerturbedState stage = s;

  detail::perturbed_rhs(s, prob, rhs, opts.threads);
  for (std::size_t k = 0; k < n; ++k)
    stage.omega[k] = s.omega[k] + dt * rhs[k];
  detail::refresh_derived(stage, prob);
  detail::perturbed_rhs(stage, prob, rhs, opts.threads);
  for (std::size_t k = 0; k < n; ++k)
    stage.omega[k] = 0.75 * s.omega[k] + 0.25 * (stage.omega[k] + dt * rhs[k]);
  detail::refresh_derived(stage, prob);
  detail::perturbed_rhs(stage, prob, rhs, opts.threads);
  for (std::size_t k = 0; k < n; ++k)
    s.omega[k] = s.omega[k] / 3.0 + 2.0 / 3.0 * (stage.omega[k] + dt * rhs[k]);

  s.t += dt;
  detail::refresh_derived(s, prob);
  detail::check_perturbed(s, opts.boundary_tol);
}

struct PerturbedSnapshot {
  double t = 0.0;
  GriddedField omega;
  GriddedField phi;
  GriddedField sigma;
  std::vector<double> mass;
};

struct PerturbedRunResult {
  std::vector<PerturbedSnapshot> snapshots;  // includes t = 0
  std::size_t steps = 0;
};

inline PerturbedRunResult run_perturbed(const ScalarField& w0, const Grid2D& grid,
                                        const Epsilon& eps, double horizon,
                                        const SolverOptions& opts = {},
                                        std::vector<double> snapshot_times = {}) {
  if (!(horizon > 0.0) || !std::isfinite(horizon))
    throw validation_error("run_perturbed: horizon must be positive and finite",
                           {{"horizon", ctx_num(horizon)}});
  for (double t : snapshot_times)
    if (!(t > 0.0) || t > horizon * (1.0 + 1e-12))
      throw validation_error("run_perturbed: snapshot times must lie in (0, horizon]",
                             {{"t", ctx_num(t)}, {"horizon", ctx_num(horizon)}});
  std::sort(snapshot_times.begin(), snapshot_times.end());
  snapshot_times.erase(std::unique(snapshot_times.begin(), snapshot_times.end()),
                       snapshot_times.end());
  if (snapshot_times.empty() || snapshot_times.back() < horizon)
    snapshot_times.push_back(horizon);

  EllipticProblem prob = make_elliptic_problem(grid, eps.value);
  PerturbedState s = init_perturbed(w0, prob, eps);
  detail::check_perturbed(s, opts.boundary_tol);

  PerturbedRunResult result;
  auto record = [&](const PerturbedState& st) {
    PerturbedSnapshot snap;
    snap.t = st.t;
    snap.omega = GriddedField(grid, st.omega);
    snap.phi = GriddedField(grid, st.phi);
    snap.sigma = GriddedField(grid, st.sigma);
    snap.mass = row_mass(grid, st.omega);
    result.snapshots.push_back(std::move(snap));
  };
  record(s);

  for (double target : snapshot_times) {
    while (s.t < target) {
      if (result.steps >= opts.max_steps)
        throw numerical_error(
            "run_perturbed: step budget exhausted before the horizon",
            {{"t", ctx_num(s.t)}, {"horizon", ctx_num(horizon)}});
      double dt = std::min(detail::perturbed_dt_bound(s, opts.cfl), target - s.t);
      step_perturbed(s, dt, prob, opts);
      ++result.steps;
    }
    s.t = target;
    record(s);
  }
  return result;
}

// Velocities from the stream function psi = -r phi + e sigma, written out
// per component so each derivative is a plain centered difference.
inline std::pair<GriddedField, GriddedField> reconstruct_velocity(
    const PerturbedState& s) {
  const Grid2D& g = s.grid;
  const double eps = s.eps;
  GriddedField ur(g), uz(g);
  parallel_for(g.n_r, [&](std::size_t j) {
    double r = g.r(j);
    for (std::size_t i = 0; i < g.n_z; ++i) {
      std::size_t k = g.index(j, i);
      double dz_phi = stencil::dz(g, s.phi, j, i);
      double dz_sig = stencil::dz(g, s.sigma, j, i);
      double dr_phi = stencil::dr(g, s.phi, j, i, +1.0);
      double dr_sig = stencil::dr(g, s.sigma, j, i, -1.0);
      ur.values[k] = -eps * r * dz_phi + eps * eps * dz_sig;
      uz.values[k] = eps * r * dr_phi - eps * eps * dr_sig -
                     eps * s.sigma[k] / r + (1.0 + eps) * s.phi[k];
    }
  });
  return {std::move(ur), std::move(uz)};
}

// Renormalized divergence  e (dr(u_r) + dz(u_z)) + u_r / r  of gridded
// velocities (u_r odd, u_z even across the axis).
inline GriddedField divergence_residual(const GriddedField& ur,
                                        const GriddedField& uz, double eps) {
  if (!(ur.grid == uz.grid))
    throw validation_error("divergence_residual: velocity grids differ");
  const Grid2D& g = ur.grid;
  GriddedField res(g);
  for (std::size_t j = 0; j < g.n_r; ++j) {
    double r = g.r(j);
    for (std::size_t i = 0; i < g.n_z; ++i) {
      double dr_ur = stencil::dr(g, ur.values, j, i, -1.0);
      double dz_uz = stencil::dz(g, uz.values, j, i);
      res.at(j, i) = eps * (dr_ur + dz_uz) + ur.at(j, i) / r;
    }
  }
  return res;
}

inline GriddedField divergence_residual(const PerturbedState& s) {
  auto [ur, uz] = reconstruct_velocity(s);
  return divergence_residual(ur, uz, s.eps);
}

// Same residual for velocity fields with analytic derivative closures
// (bypasses all grid differencing; exact up to roundoff for an exact
// stream function).
inline GriddedField divergence_residual(const ScalarField& ur,
                                        const ScalarField& uz, double eps,
                                        const Grid2D& g) {
  if (!ur.has_dr() || !uz.has_dz())
    throw validation_error(
        "analytic divergence residual needs d_dr on u_r and d_dz on u_z");
  GriddedField res(g);
  for (std::size_t j = 0; j < g.n_r; ++j) {
    double r = g.r(j);
    for (std::size_t i = 0; i < g.n_z; ++i) {
      double z = g.z(i);
      res.at(j, i) =
          eps * (ur.d_dr(r, z) + uz.d_dz(r, z)) + ur.eval(r, z) / r;
    }
  }
  return res;
}

}  // namespace vshock
