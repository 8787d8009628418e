#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "oracle_support.hpp"
#include "vshock/field.hpp"
#include "vshock/grid.hpp"
#include "vshock/parallel.hpp"
#include "vshock/presets.hpp"
#include "vshock/quadrature.hpp"

using Catch::Matchers::WithinAbs;

namespace {

// Thread-count changes are process-global; restore on scope exit.
struct ThreadCountGuard {
  ~ThreadCountGuard() { vshock::set_thread_count(0); }
};

}  // namespace

TEST_CASE("adaptive quadrature reproduces known integrals") {
  // int_0^1 x^2 dx = 1/3.
  double p2 = vshock::integrate_adaptive([](double x) { return x * x; }, 0.0,
                                         1.0, 1e-14);
  REQUIRE_THAT(p2, WithinAbs(1.0 / 3.0, 1e-14));

  // int_0^6 exp(-x^2) dx = sqrt(pi)/2 - tail, tail < 2e-17.
  double g = vshock::integrate_adaptive(
      [](double x) { return std::exp(-x * x); }, 0.0, 6.0, 1e-14);
  REQUIRE_THAT(g, WithinAbs(0.88622692545275801365, 1e-13));

  // Orientation and degenerate interval.
  double rev = vshock::integrate_adaptive([](double x) { return x * x; }, 1.0,
                                          0.0, 1e-14);
  REQUIRE_THAT(rev, WithinAbs(-1.0 / 3.0, 1e-14));
  REQUIRE(vshock::integrate_adaptive([](double x) { return x; }, 2.0, 2.0,
                                     1e-14) == 0.0);

  // Agreement with the independent Simpson implementation on an
  // oscillatory integrand.
  auto osc = [](double x) { return std::cos(7.0 * x) * std::exp(-0.5 * x); };
  double gl = vshock::integrate_adaptive(osc, 0.0, 5.0, 1e-12);
  double simpson = oracle::integrate_simpson(osc, 0.0, 5.0, 1e-13);
  REQUIRE_THAT(gl, WithinAbs(simpson, 1e-11));
}

TEST_CASE("adaptive quadrature reports non-convergence as a numerical error") {
  // An unreachable tolerance must fail loudly instead of looping forever or
  // returning a silently wrong value.
  auto f = [](double x) { return std::cos(17.3 * x) * std::exp(-x); };
  REQUIRE_THROWS_AS(vshock::integrate_adaptive(f, 0.0, 3.0, 0.0),
                    vshock::numerical_error);
}

TEST_CASE("radial antiderivative matches Simpson quadrature and closed form") {
  const double a = 1.4, w = 0.8, c = 0.3;
  auto omega = vshock::gaussian_ring(a, w, c);
  auto phi = vshock::antiderivative_r(omega, 1e-11);
  oracle::GaussianRingRef ref{a, w, c};

  std::mt19937 rng(42);
  std::uniform_real_distribution<double> ur(0.0, 3.0);
  std::uniform_real_distribution<double> uz(-3.0, 3.0);
  for (int k = 0; k < 40; ++k) {
    double r = ur(rng), z = uz(rng);
    double got = phi.eval(r, z);
    REQUIRE_THAT(got, WithinAbs(ref.phi(r, z), 2e-10));
    double simpson = -oracle::integrate_simpson(
        [&](double rho) { return omega.eval(rho, z); }, r, omega.R_sup, 1e-13);
    REQUIRE_THAT(got, WithinAbs(simpson, 2e-10));
  }

  // Beyond the decay radius the antiderivative vanishes identically.
  REQUIRE(phi.eval(omega.R_sup + 1.0, 0.4) == 0.0);

  // Frozen value for the default profile: phi(0, 1) = -exp(-1).
  auto phi_default = vshock::antiderivative_r(vshock::gaussian_ring());
  REQUIRE_THAT(phi_default.eval(0.0, 1.0),
               WithinAbs(-0.36787944117144233, 1e-10));
}

TEST_CASE("antiderivative propagates derivatives consistently") {
  auto omega = vshock::offset_ring();
  auto phi = vshock::antiderivative_r(omega, 1e-11);

  // partial_r phi = omega holds exactly by construction...
  REQUIRE(phi.has_dr());
  REQUIRE(phi.d_dr(0.7, -0.2) == omega.eval(0.7, -0.2));

  // ...and also numerically: a 5-point difference of the quadrature-backed
  // evaluation recovers the integrand.
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> ur(0.1, 2.5);
  std::uniform_real_distribution<double> uz(-2.5, 2.5);
  for (int k = 0; k < 30; ++k) {
    double r = ur(rng), z = uz(rng);
    double fd = vshock::fd_central4(
        [&](double rr) { return phi.eval(rr, z); }, r, 1e-3);
    REQUIRE_THAT(fd, WithinAbs(omega.eval(r, z), 1e-8));
  }

  // partial_z phi agrees with the hand-derived closed form for a single ring.
  const double a = 0.9, w = 1.1, c = -0.4;
  auto ring = vshock::gaussian_ring(a, w, c);
  auto phi_ring = vshock::antiderivative_r(ring, 1e-11);
  oracle::GaussianRingRef ref{a, w, c};
  for (int k = 0; k < 20; ++k) {
    double r = ur(rng), z = uz(rng);
    REQUIRE(phi_ring.has_dz());
    REQUIRE_THAT(phi_ring.d_dz(r, z), WithinAbs(ref.dz_phi(r, z), 2e-10));
    // Second z-derivative against a finite difference of the first.
    double fd2 = oracle::fd1(
        [&](double zz) { return phi_ring.d_dz(r, zz); }, z, 1e-4);
    REQUIRE_THAT(phi_ring.d_dz2(r, z), WithinAbs(fd2, 1e-6));
  }
}

TEST_CASE("analytic ring derivatives agree with finite differences") {
  std::vector<vshock::ScalarField> fields;
  fields.push_back(vshock::gaussian_ring());
  fields.push_back(vshock::offset_ring());
  fields.push_back(vshock::custom_sum({
      vshock::RingTerm{1.3, 3, 2, 0.7, 1.3, -0.4},
      vshock::RingTerm{-0.5, 1, 0, 1.1, 0.6, 0.8},
      vshock::RingTerm{0.25, 5, 3, 0.9, 0.9, 0.0},
  }));

  std::mt19937 rng(123);
  std::uniform_real_distribution<double> ur(0.05, 2.8);
  std::uniform_real_distribution<double> uz(-2.8, 2.8);
  for (const auto& f : fields) {
    for (int k = 0; k < 25; ++k) {
      double r = ur(rng), z = uz(rng);
      double fd_z = vshock::fd_central4(
          [&](double zz) { return f.eval(r, zz); }, z, 1e-3);
      REQUIRE_THAT(f.d_dz(r, z), WithinAbs(fd_z, 5e-9));
      double fd_r = vshock::fd_central4(
          [&](double rr) { return f.eval(rr, z); }, r, 1e-3);
      REQUIRE_THAT(f.d_dr(r, z), WithinAbs(fd_r, 5e-9));
      double fd_zz = vshock::fd_central4(
          [&](double zz) { return f.d_dz(r, zz); }, z, 1e-3);
      REQUIRE_THAT(f.d_dz2(r, z), WithinAbs(fd_zz, 5e-8));
    }
  }
}

TEST_CASE("diff_z forwards closures and falls back to finite differences") {
  auto f = vshock::gaussian_ring(1.0, 1.0, 0.0);
  auto g = vshock::diff_z(f);
  REQUIRE(g.eval(0.6, 0.9) == f.d_dz(0.6, 0.9));
  REQUIRE(g.has_dz());
  REQUIRE(g.d_dz(0.6, 0.9) == f.d_dz2(0.6, 0.9));

  // Strip the closures: the fallback differentiates the evaluation.
  vshock::ScalarField bare;
  bare.eval = f.eval;
  bare.R_sup = f.R_sup;
  auto gb = vshock::diff_z(bare);
  oracle::GaussianRingRef ref{1.0, 1.0, 0.0};
  for (double r : {0.3, 0.9, 1.7}) {
    for (double z : {-1.2, 0.4, 2.0}) {
      double exact = -2.0 * r * std::exp(-r * r - z * z) * (2.0 * z * z - 1.0);
      REQUIRE_THAT(gb.eval(r, z), WithinAbs(exact, 1e-8));
      (void)ref;
    }
  }
}

TEST_CASE("grid layout is staggered in r and inclusive in z") {
  vshock::Grid2D g(2.0, -1.0, 1.0, 8, 9);
  REQUIRE_THAT(g.dr(), WithinAbs(0.25, 1e-15));
  REQUIRE_THAT(g.dz(), WithinAbs(0.25, 1e-15));
  REQUIRE_THAT(g.r(0), WithinAbs(0.125, 1e-15));
  REQUIRE_THAT(g.r(7), WithinAbs(1.875, 1e-15));
  REQUIRE_THAT(g.z(0), WithinAbs(-1.0, 1e-15));
  REQUIRE_THAT(g.z(8), WithinAbs(1.0, 1e-15));
  REQUIRE(g.index(1, 2) == 11);
  REQUIRE(g.size() == 72);

  REQUIRE_THROWS_AS(vshock::Grid2D(0.0, -1.0, 1.0, 4, 4),
                    vshock::validation_error);
  REQUIRE_THROWS_AS(vshock::Grid2D(1.0, 1.0, -1.0, 4, 4),
                    vshock::validation_error);
  REQUIRE_THROWS_AS(vshock::Grid2D(1.0, -1.0, 1.0, 1, 4),
                    vshock::validation_error);
  REQUIRE_THROWS_AS(vshock::Grid2D(1.0, -1.0, 1.0, 4, 1),
                    vshock::validation_error);
}

TEST_CASE("sampling fills the grid identically for any thread count") {
  ThreadCountGuard guard;
  auto f = vshock::offset_ring();
  vshock::Grid2D g(3.0, -2.0, 2.0, 24, 33);

  vshock::set_thread_count(1);
  auto one = vshock::sample(f, g);
  vshock::set_thread_count(4);
  auto four = vshock::sample(f, g);

  REQUIRE(one.values == four.values);
  for (std::size_t j = 0; j < g.n_r; j += 5)
    for (std::size_t i = 0; i < g.n_z; i += 7)
      REQUIRE(one.at(j, i) == f.eval(g.r(j), g.z(i)));
}

TEST_CASE("L-inf distance requires matching grids") {
  vshock::Grid2D a(1.0, -1.0, 1.0, 4, 5);
  vshock::Grid2D b(1.0, -1.0, 1.0, 4, 7);
  vshock::GriddedField fa(a), fb(b);
  REQUIRE_THROWS_AS(vshock::linf_distance(fa, fb), vshock::validation_error);
  vshock::GriddedField fc(a);
  fc.values[3] = 0.5;
  REQUIRE_THAT(vshock::linf_distance(fa, fc), WithinAbs(0.5, 0.0));
}

TEST_CASE("ring term validation rejects non-physical parameters") {
  using vshock::RingTerm;
  // Even radial power breaks the axis parity required of the profiles.
  REQUIRE_THROWS_AS(vshock::custom_sum({RingTerm{1.0, 2, 1, 1.0, 1.0, 0.0}}),
                    vshock::validation_error);
  REQUIRE_THROWS_AS(vshock::custom_sum({RingTerm{1.0, 1, -1, 1.0, 1.0, 0.0}}),
                    vshock::validation_error);
  REQUIRE_THROWS_AS(vshock::custom_sum({RingTerm{1.0, 1, 1, 0.0, 1.0, 0.0}}),
                    vshock::validation_error);
  REQUIRE_THROWS_AS(vshock::custom_sum({}), vshock::validation_error);
  REQUIRE_THROWS_AS(vshock::gaussian_ring(0.0), vshock::validation_error);
  REQUIRE_THROWS_AS(vshock::gaussian_ring(1.0, -2.0),
                    vshock::validation_error);

  // The default ring peaks at r = z = 1/sqrt(2) with value exp(-1).
  auto f = vshock::gaussian_ring();
  double s = 1.0 / std::sqrt(2.0);
  REQUIRE_THAT(f.eval(s, s), WithinAbs(std::exp(-1.0), 1e-15));
  // Odd in r, odd in z about the center.
  REQUIRE_THAT(f.eval(0.7, 0.4) + f.eval(0.7, -0.4), WithinAbs(0.0, 1e-16));
  REQUIRE(f.eval(0.0, 1.0) == 0.0);
}

TEST_CASE("parallel_for covers every index once and propagates exceptions") {
  ThreadCountGuard guard;
  const std::size_t n = 1000;
  std::vector<int> hits(n, 0);
  vshock::parallel_for(n, [&](std::size_t i) { hits[i] += 1; }, 7);
  for (std::size_t i = 0; i < n; ++i) REQUIRE(hits[i] == 1);

  vshock::parallel_for(0, [&](std::size_t) { FAIL("must not be called"); }, 3);

  REQUIRE_THROWS_AS(
      vshock::parallel_for(
          100,
          [](std::size_t i) {
            if (i == 53) throw std::runtime_error("worker failure");
          },
          4),
      std::runtime_error);
}

TEST_CASE("finite-difference step never drops below the noise floor") {
  REQUIRE(vshock::h_fd(0.0) == 1e-5);
  REQUIRE(vshock::h_fd(2.0) == 1e-5);
  REQUIRE(vshock::h_fd(1000.0) > 1e-5);
}
