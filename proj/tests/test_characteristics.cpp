#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "oracle_support.hpp"
#include "vshock/characteristics.hpp"
#include "vshock/presets.hpp"

using Catch::Matchers::WithinAbs;

namespace {

// Solutions are shared across test cases; the scan is the expensive part.
const vshock::CharacteristicSolution& gaussian_solution() {
  static const auto sol = vshock::build_solution(vshock::gaussian_ring());
  return sol;
}

const vshock::CharacteristicSolution& offset_solution() {
  static const auto sol = vshock::build_solution(vshock::offset_ring());
  return sol;
}

}  // namespace

TEST_CASE("blow-up scan: single ring shocks at t = 1/amplitude on the axis") {
  const auto& sol = gaussian_solution();
  REQUIRE_THAT(sol.inf_dzphi, WithinAbs(-1.0, 1e-9));
  REQUIRE_THAT(sol.t_max, WithinAbs(1.0, 1e-9));
  REQUIRE(sol.minimizers.size() == 1);
  const auto& m = sol.minimizers.front();
  REQUIRE(m.r == 0.0);
  REQUIRE_THAT(m.z, WithinAbs(0.0, 1e-9));
  REQUIRE(m.omega0 == 0.0);  // the vorticity vanishes at this shock point
  REQUIRE_THAT(m.phi0, WithinAbs(0.0, 1e-12));

  // The shock time scales like 1/amplitude and is width-independent; the
  // minimizer follows the center.
  auto sol2 = vshock::build_solution(vshock::gaussian_ring(2.0, 0.5, 0.3));
  REQUIRE_THAT(sol2.t_max, WithinAbs(0.5, 1e-9));
  REQUIRE(sol2.minimizers.size() == 1);
  REQUIRE(sol2.minimizers.front().r == 0.0);
  REQUIRE_THAT(sol2.minimizers.front().z, WithinAbs(0.3, 1e-9));
}

TEST_CASE("blow-up scan: certified bounds cover the true suprema") {
  const auto& sol = gaussian_solution();
  // sup |phi0| = (1/sqrt 2) exp(-1/2) for the default ring (axis, z = 1/sqrt 2).
  const double phi_sup_true = std::exp(-0.5) / std::sqrt(2.0);
  REQUIRE(sol.phi_sup >= phi_sup_true);
  REQUIRE(sol.phi_sup <= 1.1 * phi_sup_true);
  // sup |w0| = exp(-1); the scan reports a node maximum just below it.
  const double omega_sup_true = std::exp(-1.0);
  REQUIRE(sol.omega0_sup <= omega_sup_true + 1e-12);
  REQUIRE_THAT(sol.omega0_sup, WithinAbs(omega_sup_true, 1e-3));
}

TEST_CASE("blow-up scan: offset ring has an off-axis shock point") {
  // Frozen references for this preset (independent parameter-space scan with
  // gradient refinement at 1e-12, done once and pinned here).
  const auto& sol = offset_solution();
  REQUIRE_THAT(sol.inf_dzphi, WithinAbs(-0.754248753530570, 1e-8));
  REQUIRE_THAT(sol.t_max, WithinAbs(1.325822542389484, 5e-8));
  REQUIRE(sol.minimizers.size() == 1);
  const auto& m = sol.minimizers.front();
  REQUIRE_THAT(m.r, WithinAbs(0.271581426317200, 1e-6));
  REQUIRE_THAT(m.z, WithinAbs(-0.105936264184434, 1e-6));
  REQUIRE_THAT(m.omega0, WithinAbs(0.327752599728901, 1e-6));
  // The blow-up point must carry nonzero vorticity for BKM diagnostics.
  REQUIRE(std::abs(sol.bkm_point.omega0) > 0.3);
}

TEST_CASE("blow-up scan: symmetric twin rings report both minimizers") {
  auto f = vshock::custom_sum({vshock::RingTerm{2.0, 1, 1, 1.0, 1.0, -2.0},
                               vshock::RingTerm{2.0, 1, 1, 1.0, 1.0, 2.0}});
  auto sol = vshock::build_solution(f);
  REQUIRE(sol.minimizers.size() == 2);
  const auto& a = sol.minimizers[0];
  const auto& b = sol.minimizers[1];
  REQUIRE(a.r == 0.0);
  REQUIRE(b.r == 0.0);
  // Mirror pair near z = -2 and z = +2; the far ring's tail shifts each by
  // a few 1e-6 but preserves the symmetry.
  REQUIRE_THAT(a.z, WithinAbs(-2.0, 1e-3));
  REQUIRE_THAT(b.z, WithinAbs(2.0, 1e-3));
  REQUIRE_THAT(a.z + b.z, WithinAbs(0.0, 1e-5));
  REQUIRE_THAT(a.value - b.value, WithinAbs(0.0, 1e-9));
  REQUIRE_THAT(sol.inf_dzphi, WithinAbs(-1.0, 1e-4));
}

TEST_CASE("zero vorticity never shocks and transports nothing") {
  auto sol = vshock::build_solution(vshock::zero_field());
  REQUIRE(std::isinf(sol.t_max));
  REQUIRE(sol.minimizers.empty());
  REQUIRE(vshock::eval_omega(sol, 1.0, 0.5, 1e6) == 0.0);
  REQUIRE(vshock::eval_phi(sol, 1.0, 0.5, 1e6) == 0.0);
}

TEST_CASE("time guard: evaluation allowed up to (1 - guard) t_max, not past") {
  const auto& sol = gaussian_solution();
  const double edge = (1.0 - sol.opts.shock_guard) * sol.t_max;
  auto p = vshock::back_to_labels(sol, 0.0, 0.2, edge);
  REQUIRE(p.jac > 0.0);
  REQUIRE_THROWS_AS(vshock::back_to_labels(sol, 0.0, 0.2, edge * 1.0005),
                    vshock::validation_error);
  REQUIRE_THROWS_AS(vshock::back_to_labels(sol, 0.0, 0.2, -0.1),
                    vshock::validation_error);
  REQUIRE_THROWS_AS(
      vshock::back_to_labels(sol, 0.0, 0.2,
                             std::numeric_limits<double>::quiet_NaN()),
      vshock::validation_error);
}

TEST_CASE("labels match frozen references and the bisection oracle") {
  const auto& sol = gaussian_solution();
  oracle::GaussianRingRef ref{1.0, 1.0, 0.0};

  struct Fixture {
    double r, z, t;
    double y, jac;   // frozen with 30-digit arithmetic
    double value;    // phi for the first row, omega for the others
    bool is_phi;
  };
  // References computed by solving y + t*phi0(r, y) = z in 30-digit
  // arithmetic on the closed form phi0 = -z exp(-z^2) exp(-r^2).
  const Fixture fixtures[] = {
      {0.0, 0.5, 0.5, 0.71441812466393382229, 1.006238650912218257,
       -0.42883624932786764458, true},
      {0.8, 0.3, 0.7, 0.432380138912311349, 0.80831099018165036272,
       0.37434004774413947953, false},
      {0.25, -1.1, 0.9, -1.3020478357577140732, 1.3709749262178625229,
       -0.081875164524589529367, false},
  };

  for (const auto& fx : fixtures) {
    auto p = vshock::back_to_labels(sol, fx.r, fx.z, fx.t);
    REQUIRE_THAT(p.y, WithinAbs(fx.y, 2e-9));
    REQUIRE_THAT(p.jac, WithinAbs(fx.jac, 2e-9));
    if (fx.is_phi) {
      REQUIRE_THAT(vshock::eval_phi(sol, fx.r, fx.z, fx.t),
                   WithinAbs(fx.value, 2e-9));
    } else {
      REQUIRE_THAT(vshock::eval_omega(sol, fx.r, fx.z, fx.t),
                   WithinAbs(fx.value, 2e-9));
    }
    // Independent root solve on the closed-form transport equation.
    double yb = oracle::bisect(
        [&](double y) { return y + fx.t * ref.phi(fx.r, y) - fx.z; },
        fx.z - 0.45 * fx.t, fx.z + 0.45 * fx.t, 1e-15);
    REQUIRE_THAT(p.y, WithinAbs(yb, 2e-9));
  }
}

TEST_CASE("labels invert the forward map everywhere") {
  const auto& sol = gaussian_solution();
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> ur(0.0, 2.5);
  std::uniform_real_distribution<double> uz(-3.0, 3.0);
  std::uniform_real_distribution<double> ut(0.0, 0.95);
  for (int k = 0; k < 60; ++k) {
    double r = ur(rng), z = uz(rng), t = ut(rng);
    auto p = vshock::back_to_labels(sol, r, z, t);
    double forward = p.y + t * sol.phi0.eval(r, p.y);
    REQUIRE_THAT(forward, WithinAbs(z, 1e-9));
    REQUIRE(p.jac > 0.0);
  }
}

TEST_CASE("warm-started grid sweep agrees with independent point solves") {
  const auto& sol = gaussian_solution();
  vshock::Grid2D grid(2.5, -2.5, 2.5, 20, 41);
  const double t = 0.8;
  auto fields = vshock::exact_fields(sol, grid, t);
  for (std::size_t j = 0; j < grid.n_r; j += 3) {
    for (std::size_t i = 0; i < grid.n_z; i += 5) {
      double w = vshock::eval_omega(sol, grid.r(j), grid.z(i), t);
      double f = vshock::eval_phi(sol, grid.r(j), grid.z(i), t);
      REQUIRE_THAT(fields.omega.at(j, i), WithinAbs(w, 1e-9));
      REQUIRE_THAT(fields.phi.at(j, i), WithinAbs(f, 1e-9));
    }
  }
}

TEST_CASE("flow gradients match finite differences of the maps") {
  const auto& sol = gaussian_solution();
  std::mt19937 rng(5150);
  std::uniform_real_distribution<double> ur(0.1, 2.0);
  std::uniform_real_distribution<double> uz(-2.0, 2.0);
  for (double t : {0.3, 0.7}) {
    for (int k = 0; k < 8; ++k) {
      double r = ur(rng), z = uz(rng);
      auto g = vshock::eval_gradients(sol, r, z, t);
      const double h = 1e-4;

      auto y_of = [&](double rr, double zz, double tt) {
        return vshock::back_to_labels(sol, rr, zz, tt).y;
      };
      double fd_dz_h = oracle::fd1(
          [&](double zz) { return y_of(r, zz, t); }, z, h);
      double fd_dr_h = oracle::fd1(
          [&](double rr) { return y_of(rr, z, t); }, r, h);
      double fd_dt_h = oracle::fd1(
          [&](double tt) { return y_of(r, z, tt); }, t, h);
      double fd_dz_phi = oracle::fd1(
          [&](double zz) { return vshock::eval_phi(sol, r, zz, t); }, z, h);

      REQUIRE_THAT(g.dz_h, WithinAbs(fd_dz_h, 1e-6));
      REQUIRE_THAT(g.dr_h, WithinAbs(fd_dr_h, 1e-6));
      REQUIRE_THAT(g.dt_h, WithinAbs(fd_dt_h, 1e-6));
      REQUIRE_THAT(g.dz_phi, WithinAbs(fd_dz_phi, 1e-6));
    }
  }
}

TEST_CASE("the exact solution satisfies the transport equation pointwise") {
  const auto& sol = gaussian_solution();
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> ur(0.1, 2.0);
  std::uniform_real_distribution<double> uz(-2.0, 2.0);
  std::uniform_real_distribution<double> ut(0.1, 0.85);
  for (int k = 0; k < 12; ++k) {
    double r = ur(rng), z = uz(rng), t = ut(rng);
    const double h = 1e-4;
    double wt = oracle::fd1(
        [&](double tt) { return vshock::eval_omega(sol, r, z, tt); }, t, h);
    double wz = oracle::fd1(
        [&](double zz) { return vshock::eval_omega(sol, r, zz, t); }, z, h);
    double pz = oracle::fd1(
        [&](double zz) { return vshock::eval_phi(sol, r, zz, t); }, z, h);
    double w = vshock::eval_omega(sol, r, z, t);
    double p = vshock::eval_phi(sol, r, z, t);
    double residual = wt + p * wz + w * pz;
    REQUIRE_THAT(residual, WithinAbs(0.0, 1e-5));
  }
}

TEST_CASE("the transported shock label realizes the predicted growth") {
  const auto& sol = offset_solution();
  const auto& m = sol.bkm_point;
  for (double frac : {0.25, 0.5, 0.75, 0.9}) {
    double t = frac * sol.t_max;
    // The label (r0, z0) moves to z0 + t phi0(r0, z0); pulling the solution
    // back there must recover w0 / (1 + t m*) exactly.
    double z_now = m.z + t * m.phi0;
    double w = vshock::eval_omega(sol, m.r, z_now, t);
    double predicted = m.omega0 / (1.0 + t * m.value);
    REQUIRE_THAT(w, WithinAbs(predicted, 1e-7 * std::abs(predicted) + 1e-9));
  }
}

TEST_CASE("BKM diagnostic brackets the sup growth") {
  const auto& sol = offset_solution();
  vshock::Grid2D grid(4.0, -4.0, 4.0, 96, 192);
  std::vector<double> times;
  const int n = 8;
  for (int k = 0; k < n; ++k)
    times.push_back(0.95 * sol.t_max * static_cast<double>(k) /
                    static_cast<double>(n - 1));
  auto diag = vshock::bkm_diagnostic(sol, grid, times);

  REQUIRE(diag.samples.size() == static_cast<std::size_t>(n));
  REQUIRE_THAT(diag.reference_amplitude, WithinAbs(0.327752599728901, 1e-6));
  for (const auto& s : diag.samples) {
    // The lower bound |w0(x0)| / (1 - t/t_max) is realized by the
    // transported shock label, so the measured sup can never fall below it.
    REQUIRE(s.sup_omega >= s.bound - 1e-9);
  }
  // Late samples are dominated by the shock label, so the fitted constant
  // sits close to |w0(x0)|.
  REQUIRE_THAT(diag.fitted_c, WithinAbs(diag.reference_amplitude,
                                        0.03 * diag.reference_amplitude));
  // The trapezoid integral of the measured sup tracks the closed-form
  // integral of the bound from above.
  const auto& last = diag.samples.back();
  REQUIRE(last.integral_sup >= last.integral_bound - 1e-9);
  REQUIRE(last.integral_sup <= 1.4 * last.integral_bound);

  REQUIRE_THROWS_AS(vshock::bkm_diagnostic(sol, grid, {0.5, 0.5}),
                    vshock::validation_error);
  REQUIRE_THROWS_AS(vshock::bkm_diagnostic(sol, grid, {}),
                    vshock::validation_error);
  auto no_shock = vshock::build_solution(vshock::zero_field());
  REQUIRE_THROWS_AS(vshock::bkm_diagnostic(no_shock, grid, {0.1}),
                    vshock::validation_error);
}
