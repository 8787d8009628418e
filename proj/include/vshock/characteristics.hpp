#pragma once

// Exact solution of  dt(w) + phi dz(w) + w dz(phi) = 0,  dr(phi) = w,
// phi(r, z) -> 0 as r -> inf, by the method of characteristics.
//
// For each fixed r the transport is a 1D Burgers flow in z: labels move
// along straight lines g(y) = y + t phi0(r, y), and as long as
// jac = 1 + t dz(phi0) stays positive the map is invertible.  The solution
// is then
//
//   phi(r, z, t) = phi0(r, h),   w(r, z, t) = w0(r, h) / (1 + t dz(phi0)(r, h)),
//
// with h = h(r, z, t) the back-to-labels map.  The first shock happens at
// t_max = -1 / inf dz(phi0) (infinite when the infimum is >= 0).
//
// build_solution scans dz(phi0) on a dense grid (row-cumulative quadrature,
// so a full scan costs one pass over the integrand per z row), refines every
// candidate basin with a safeguarded Newton iteration on the gradient, and
// records all near-minimizers.  Point evaluation solves g(y) = z with a
// bracketed Newton iteration; grid evaluation warms each solve with the
// label found at the neighboring node.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "vshock/errors.hpp"
#include "vshock/field.hpp"
#include "vshock/grid.hpp"
#include "vshock/parallel.hpp"

namespace vshock {

struct SolutionOptions {
  double quad_tol = 1e-10;   // absolute tolerance of radial quadratures
  double root_tol = 1e-12;   // |g(y) - z| tolerance of the label solve
  double shock_guard = 1e-3; // reject times t > (1 - guard) * t_max
  std::size_t scan_nr = 512; // radial intervals of the blow-up scan
  std::size_t scan_nz = 1024;// axial intervals of the blow-up scan
  int threads = 0;           // 0 = library default
};

struct FlowPoint {
  double y;    // label: h(r, z, t)
  double jac;  // 1 + t dz(phi0)(r, y)
};

struct Gradients {
  double dz_phi;  // dz(phi)(r, z, t)
  double dz_h;    // dz of the back-to-labels map
  double dr_h;    // dr of the back-to-labels map
  double dt_h;    // dt of the back-to-labels map
};

struct Minimizer {
  double r = 0.0;
  double z = 0.0;
  double value = 0.0;   // dz(phi0) at the minimizer
  double omega0 = 0.0;  // w0 at the minimizer
  double phi0 = 0.0;    // phi0 at the minimizer (transport speed of the label)
};

struct CharacteristicSolution {
  ScalarField omega0;
  ScalarField phi0;      // dr^{-1} w0 by quadrature
  ScalarField dzphi0;
  ScalarField dz2phi0;
  SolutionOptions opts;
  double inf_dzphi = 0.0;   // m* = inf dz(phi0)
  double t_max = std::numeric_limits<double>::infinity();
  std::vector<Minimizer> minimizers;  // all minima within 1e-9 of m*, sorted by (r, z)
  Minimizer bkm_point;                // minimizer with the largest |w0|
  double phi_sup = 0.0;               // certified upper bound for sup |phi0|
  double omega0_sup = 0.0;            // scanned sup |w0|
};

namespace detail {

// Refined minima within this distance of the best value are reported as
// co-minimizers.
inline constexpr double kTieBand = 1e-9;

struct ScanResult {
  std::size_t nr, nz;
  double R;
  std::vector<double> values;  // dz(phi0) at (k, l), index l * (nr + 1) + k
  double phi_sup = 0.0;
  double omega_sup = 0.0;
  double min_value = 0.0;
};

// Row-cumulative scan: for every z row, integrate dz(w0) and w0 over the
// radial intervals with a single 12-point panel each and suffix-sum, giving
// dz(phi0) and phi0 at every scan node in one pass.
inline ScanResult scan_dzphi(const ScalarField& omega0, const SolutionOptions& opts) {
  ScanResult scan;
  scan.nr = opts.scan_nr;
  scan.nz = opts.scan_nz;
  scan.R = omega0.R_sup;
  const std::size_t nr = scan.nr, nz = scan.nz;
  const double R = scan.R;
  scan.values.assign((nr + 1) * (nz + 1), 0.0);
  std::vector<double> row_phi_sup(nz + 1, 0.0), row_omega_sup(nz + 1, 0.0);

  field_fn domega = omega0.d_dz;
  auto omega_eval = omega0.eval;
  const bool have_dz = static_cast<bool>(domega);

  parallel_for(nz + 1, [&](std::size_t l) {
    double z = -R + 2.0 * R * static_cast<double>(l) / static_cast<double>(nz);
    auto dz_at = [&](double rho) {
      if (have_dz) return domega(rho, z);
      return fd_central([&](double zz) { return omega_eval(rho, zz); }, z,
                        h_fd(z));
    };
    // Interval integrals, then suffix sums from the far edge inward.
    std::vector<double> seg_dz(nr), seg_w(nr);
    double omax = 0.0;
    for (std::size_t k = 0; k < nr; ++k) {
      double a = R * static_cast<double>(k) / static_cast<double>(nr);
      double b = R * static_cast<double>(k + 1) / static_cast<double>(nr);
      seg_dz[k] = gl12_panel(dz_at, a, b);
      seg_w[k] = gl12_panel([&](double rho) { return omega_eval(rho, z); }, a, b);
      double w_node = std::abs(omega_eval(a, z));
      if (w_node > omax) omax = w_node;
    }
    double acc_dz = 0.0, acc_w = 0.0, pmax = 0.0;
    for (std::size_t k = nr; k-- > 0;) {
      acc_dz += seg_dz[k];
      acc_w += seg_w[k];
      scan.values[l * (nr + 1) + k] = -acc_dz;
      double p = std::abs(acc_w);
      if (p > pmax) pmax = p;
    }
    row_phi_sup[l] = pmax;
    row_omega_sup[l] = omax;
  }, opts.threads);

  scan.min_value = *std::min_element(scan.values.begin(), scan.values.end());
  for (double v : row_phi_sup) scan.phi_sup = std::max(scan.phi_sup, v);
  for (double v : row_omega_sup) scan.omega_sup = std::max(scan.omega_sup, v);
  return scan;
}

struct Candidate {
  double value, r, z;
};

// Strict 4-neighbor local minima of the scan below the pre-band.
inline std::vector<Candidate> scan_candidates(const ScanResult& scan) {
  const std::size_t nr = scan.nr, nz = scan.nz;
  const double band = std::max(1e-3, 0.02 * std::abs(scan.min_value));
  const double cutoff = std::min(scan.min_value + band, -1e-14);
  std::vector<Candidate> out;
  auto val = [&](std::size_t l, std::size_t k) {
    return scan.values[l * (nr + 1) + k];
  };
  for (std::size_t l = 0; l <= nz; ++l)
    for (std::size_t k = 0; k <= nr; ++k) {
      double v = val(l, k);
      if (v > cutoff) continue;
      if (k > 0 && val(l, k - 1) < v) continue;
      if (k < nr && val(l, k + 1) < v) continue;
      if (l > 0 && val(l - 1, k) < v) continue;
      if (l < nz && val(l + 1, k) < v) continue;
      out.push_back({v, scan.R * static_cast<double>(k) / static_cast<double>(nr),
                     -scan.R + 2.0 * scan.R * static_cast<double>(l) /
                                   static_cast<double>(nz)});
    }
  std::sort(out.begin(), out.end(),
            [](const Candidate& a, const Candidate& b) { return a.value < b.value; });
  if (out.size() > 32) out.resize(32);
  return out;
}

// Derivative-free fallback: shrink a box around the current minimum.
inline Candidate refine_shrink_box(const ScalarField& dzphi, double r0, double z0,
                                   double hr, double hz) {
  double cr = r0, cz = z0, best = dzphi.eval(std::max(cr, 0.0), cz);
  for (int round = 0; round < 24; ++round) {
    double br = cr, bz = cz;
    for (int a = -2; a <= 2; ++a)
      for (int b = -2; b <= 2; ++b) {
        double rr = cr + 0.5 * hr * a;
        double zz = cz + 0.5 * hz * b;
        if (rr < 0.0) rr = 0.0;
        double v = dzphi.eval(rr, zz);
        if (v < best) {
          best = v;
          br = rr;
          bz = zz;
        }
      }
    cr = br;
    cz = bz;
    hr *= 0.35;
    hz *= 0.35;
  }
  return {best, cr, cz};
}

// Newton refinement of a scan candidate.  The gradient of dz(phi0) has the
// closed components (dz(w0), dz2(phi0)); the Hessian is assembled from the
// available closures plus finite differences.  Candidates on the axis keep
// r = 0 (dz(w0) vanishes identically there by oddness) and refine in z only.
inline Candidate refine_candidate(const ScalarField& omega0,
                                  const ScalarField& dzphi0,
                                  const ScalarField& dz2phi0, Candidate c,
                                  double hr_box, double hz_box) {
  auto g1 = [&](double r, double z) {  // d/dr of dz(phi0) = dz(w0)
    if (omega0.has_dz()) return omega0.d_dz(r, z);
    return fd_central([&](double zz) { return omega0.eval(r, zz); }, z, h_fd(z));
  };
  auto g2 = [&](double r, double z) { return dz2phi0.eval(r, z); };

  const bool on_axis = c.r == 0.0;
  double r = c.r, z = c.z;
  const double r_lo = std::max(0.0, c.r - 3.0 * hr_box), r_hi = c.r + 3.0 * hr_box;
  const double z_lo = c.z - 3.0 * hz_box, z_hi = c.z + 3.0 * hz_box;
  bool ok = false;
  for (int it = 0; it < 40; ++it) {
    double G1 = on_axis ? 0.0 : g1(r, z);
    double G2 = g2(r, z);
    if (std::abs(G1) < 5e-11 && std::abs(G2) < 5e-11) {
      ok = true;
      break;
    }
    double hz = h_fd(z);
    double H22 = fd_central([&](double zz) { return g2(r, zz); }, z, hz);
    double dr_step = 0.0, dz_step = 0.0;
    if (on_axis) {
      if (std::abs(H22) < 1e-12) break;
      dz_step = -G2 / H22;
    } else {
      double hr = h_fd(r);
      double H11 = fd_central([&](double rr) { return g1(rr, z); }, r, hr);
      double H12 = omega0.has_dz2()
                       ? omega0.d_dz2(r, z)
                       : fd_central([&](double zz) { return g1(r, zz); }, z, hz);
      double det = H11 * H22 - H12 * H12;
      if (std::abs(det) < 1e-12) break;
      dr_step = -(H22 * G1 - H12 * G2) / det;
      dz_step = -(H11 * G2 - H12 * G1) / det;
    }
    r += dr_step;
    z += dz_step;
    if (r < r_lo || r > r_hi || z < z_lo || z > z_hi) break;
    if (std::abs(dr_step) < 1e-13 && std::abs(dz_step) < 1e-13) {
      ok = true;
      break;
    }
  }
  if (ok) {
    r = std::abs(r);  // symmetric extension can land a hair past the axis
    double v = dzphi0.eval(r, z);
    if (v <= c.value + 1e-6) return {v, r, z};
  }
  return refine_shrink_box(dzphi0, c.r, c.z, 2.0 * hr_box, 2.0 * hz_box);
}

}  // namespace detail

inline CharacteristicSolution build_solution(const ScalarField& omega0,
                                             const SolutionOptions& opts = {}) {
  if (!omega0.eval) throw validation_error("build_solution: field has no evaluator");
  if (!(omega0.R_sup > 0.0))
    throw validation_error("build_solution: field must declare a positive decay radius");
  CharacteristicSolution sol;
  sol.omega0 = omega0;
  sol.opts = opts;
  sol.phi0 = antiderivative_r(omega0, opts.quad_tol);
  sol.dzphi0 = diff_z(sol.phi0);
  sol.dz2phi0 = diff_z(sol.dzphi0);

  detail::ScanResult scan = detail::scan_dzphi(omega0, opts);
  sol.phi_sup = 1.05 * scan.phi_sup + 1e-6;
  sol.omega0_sup = scan.omega_sup;

  if (scan.min_value >= -1e-14) {
    sol.inf_dzphi = scan.min_value;
    sol.t_max = std::numeric_limits<double>::infinity();
    return sol;  // no compression anywhere: the flow never shocks
  }

  double hr = scan.R / static_cast<double>(scan.nr);
  double hz = 2.0 * scan.R / static_cast<double>(scan.nz);
  std::vector<detail::Candidate> refined;
  for (const auto& c : detail::scan_candidates(scan))
    refined.push_back(
        detail::refine_candidate(omega0, sol.dzphi0, sol.dz2phi0, c, hr, hz));

  double m_star = refined.front().value;
  for (const auto& c : refined) m_star = std::min(m_star, c.value);

  std::vector<detail::Candidate> kept;
  for (const auto& c : refined) {
    if (c.value > m_star + detail::kTieBand) continue;
    bool dup = false;
    for (const auto& k : kept)
      if (std::abs(k.r - c.r) < 1e-6 && std::abs(k.z - c.z) < 1e-6) dup = true;
    if (!dup) kept.push_back(c);
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    return a.r != b.r ? a.r < b.r : a.z < b.z;
  });

  sol.inf_dzphi = m_star;
  sol.t_max = -1.0 / m_star;
  for (const auto& c : kept) {
    Minimizer m;
    m.r = c.r;
    m.z = c.z;
    m.value = c.value;
    m.omega0 = omega0.eval(c.r, c.z);
    m.phi0 = sol.phi0.eval(c.r, c.z);
    sol.minimizers.push_back(m);
  }
  sol.bkm_point = sol.minimizers.front();
  for (const auto& m : sol.minimizers)
    if (std::abs(m.omega0) > std::abs(sol.bkm_point.omega0)) sol.bkm_point = m;
  return sol;
}

namespace detail {

inline void check_time(const CharacteristicSolution& sol, double t) {
  if (!(t >= 0.0) || !std::isfinite(t))
    throw validation_error("evaluation time must be finite and nonnegative",
                           {{"t", ctx_num(t)}});
  if (std::isfinite(sol.t_max)) {
    double bound = (1.0 - sol.opts.shock_guard) * sol.t_max;
    if (t > bound)
      throw validation_error(
          "evaluation time is inside the shock guard window",
          {{"t", ctx_num(t)}, {"t_max", ctx_num(sol.t_max)},
           {"guard", ctx_num(sol.opts.shock_guard)}, {"t_allowed", ctx_num(bound)}});
  }
}

}  // namespace detail

// Solve y + t phi0(r, y) = z for the label y.  `hint` warms the Newton
// iteration (used by grid sweeps); the bracket [z - tM, z + tM] with
// M >= sup |phi0| always contains the root and guards every step.
inline FlowPoint back_to_labels(const CharacteristicSolution& sol, double r,
                                double z, double t, const double* hint = nullptr) {
  detail::check_time(sol, t);
  if (t == 0.0) return {z, 1.0};
  const double root_tol = sol.opts.root_tol;
  double M = sol.phi_sup;
  double lo = z - t * M, hi = z + t * M;
  double y = hint ? std::clamp(*hint, lo, hi) : z;
  auto F = [&](double yy) { return yy + t * sol.phi0.eval(r, yy) - z; };
  double f = F(y);
  double jac = std::numeric_limits<double>::quiet_NaN();
  bool done = false;
  for (int it = 0; it < 50 && !done; ++it) {
    if (std::abs(f) <= root_tol) {
      done = true;
      break;
    }
    if (f < 0.0) lo = y; else hi = y;
    double fp = 1.0 + t * sol.dzphi0.eval(r, y);
    double y_next;
    if (fp > 1e-12) {
      y_next = y - f / fp;
      if (!(y_next > lo && y_next < hi)) y_next = 0.5 * (lo + hi);
    } else {
      y_next = 0.5 * (lo + hi);
    }
    y = y_next;
    f = F(y);
  }
  if (!done) {
    for (int it = 0; it < 200; ++it) {
      if (std::abs(f) <= root_tol) {
        done = true;
        break;
      }
      if (f < 0.0) lo = y; else hi = y;
      if (hi - lo < 8.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(y))) {
        // The bracket has collapsed to roundoff; the residual floor is set
        // by the quadrature tolerance of phi0.
        done = std::abs(f) <= 1e3 * root_tol;
        break;
      }
      y = 0.5 * (lo + hi);
      f = F(y);
    }
  }
  if (!done)
    throw numerical_error("back-to-labels iteration did not converge",
                          {{"r", ctx_num(r)}, {"z", ctx_num(z)}, {"t", ctx_num(t)},
                           {"residual", ctx_num(f)}});
  jac = 1.0 + t * sol.dzphi0.eval(r, y);
  return {y, jac};
}

inline double eval_phi(const CharacteristicSolution& sol, double r, double z,
                       double t) {
  FlowPoint p = back_to_labels(sol, r, z, t);
  return sol.phi0.eval(r, p.y);
}

inline double eval_omega(const CharacteristicSolution& sol, double r, double z,
                         double t) {
  FlowPoint p = back_to_labels(sol, r, z, t);
  return sol.omega0.eval(r, p.y) / p.jac;
}

inline Gradients eval_gradients(const CharacteristicSolution& sol, double r,
                                double z, double t) {
  FlowPoint p = back_to_labels(sol, r, z, t);
  Gradients g;
  g.dz_h = 1.0 / p.jac;
  g.dz_phi = sol.dzphi0.eval(r, p.y) / p.jac;
  g.dr_h = -t * sol.omega0.eval(r, p.y) / p.jac;
  g.dt_h = -sol.phi0.eval(r, p.y) / p.jac;
  return g;
}

struct ExactFields {
  GriddedField omega;
  GriddedField phi;
};

// Evaluate w and phi on a grid at time t.  Rows run in parallel; within a
// row the label solve is warmed by the previous node's label.
inline ExactFields exact_fields(const CharacteristicSolution& sol,
                                const Grid2D& grid, double t) {
  detail::check_time(sol, t);
  ExactFields out{GriddedField(grid), GriddedField(grid)};
  parallel_for(grid.n_r, [&](std::size_t j) {
    double r = grid.r(j);
    double y_prev = std::numeric_limits<double>::quiet_NaN();
    double dz = grid.dz();
    for (std::size_t i = 0; i < grid.n_z; ++i) {
      double z = grid.z(i);
      double hint = y_prev + dz;
      FlowPoint p = back_to_labels(sol, r, z, t,
                                   std::isnan(y_prev) ? nullptr : &hint);
      out.omega.at(j, i) = sol.omega0.eval(r, p.y) / p.jac;
      out.phi.at(j, i) = sol.phi0.eval(r, p.y);
      y_prev = p.y;
    }
  }, sol.opts.threads);
  return out;
}

inline GriddedField exact_omega(const CharacteristicSolution& sol,
                                const Grid2D& grid, double t) {
  return exact_fields(sol, grid, t).omega;
}

inline GriddedField exact_phi(const CharacteristicSolution& sol,
                              const Grid2D& grid, double t) {
  return exact_fields(sol, grid, t).phi;
}

struct BkmSample {
  double t = 0.0;
  double sup_omega = 0.0;      // max |w(t)| over grid nodes and transported minimizers
  double bound = 0.0;          // |w0(r0, z0)| / (1 - t / t_max)
  double integral_sup = 0.0;   // trapezoid of sup_omega over the samples so far
  double integral_bound = 0.0; // closed form |w0| t_max log(t_max / (t_max - t))
};

struct BkmDiagnostic {
  std::vector<BkmSample> samples;
  double fitted_c = 0.0;          // least-squares slope of sup vs 1/(1 - t/t_max)
  double reference_amplitude = 0.0;  // |w0| at the blow-up point
  Minimizer point;
};

// Tabulate the measured sup |w| against the predicted blow-up rate.  The
// transported blow-up labels are always included in the sup so the lower
// bound |w0(r0,z0)|/(1 - t/t_max) is realized by an actual sample.
inline BkmDiagnostic bkm_diagnostic(const CharacteristicSolution& sol,
                                    const Grid2D& grid,
                                    const std::vector<double>& times) {
  if (sol.minimizers.empty() || !std::isfinite(sol.t_max))
    throw validation_error("BKM diagnostic requires data with a finite shock time");
  if (times.empty())
    throw validation_error("BKM diagnostic requires at least one sample time");
  for (std::size_t k = 0; k + 1 < times.size(); ++k)
    if (!(times[k] < times[k + 1]))
      throw validation_error("BKM sample times must be strictly increasing");

  BkmDiagnostic diag;
  diag.point = sol.bkm_point;
  diag.reference_amplitude = std::abs(sol.bkm_point.omega0);
  double m_star = sol.inf_dzphi;
  double sum_xy = 0.0, sum_xx = 0.0;
  for (double t : times) {
    BkmSample s;
    s.t = t;
    GriddedField w = exact_omega(sol, grid, t);
    double sup = w.max_abs();
    for (const auto& m : sol.minimizers) {
      double local = std::abs(m.omega0) / (1.0 + t * m.value);
      if (local > sup) sup = local;
    }
    s.sup_omega = sup;
    double x = 1.0 / (1.0 + t * m_star);  // = 1 / (1 - t / t_max)
    s.bound = diag.reference_amplitude * x;
    s.integral_bound = -diag.reference_amplitude / m_star * std::log(x);
    if (!diag.samples.empty()) {
      const BkmSample& prev = diag.samples.back();
      s.integral_sup = prev.integral_sup +
                       0.5 * (prev.sup_omega + s.sup_omega) * (t - prev.t);
    }
    sum_xy += sup * x;
    sum_xx += x * x;
    diag.samples.push_back(s);
  }
  diag.fitted_c = sum_xy / sum_xx;
  return diag;
}

}  // namespace vshock
