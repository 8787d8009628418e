#pragma once

// The modified stream-function problem
//
//   -L_e sigma = -(dr^2 + dz^2)(r phi),
//   -L_e = -e (dr^2 + dz^2) - (1/r) dr + 1/r^2,
//
// discretized with centered differences on the staggered grid.  Closures:
// sigma and w = r phi are odd across the axis (ghost = -value at the first
// node); the r_max edge is homogeneous Dirichlet imposed by reflection
// (ghost = -value at the last node, zeroing the edge midpoint); the z
// boundary rows are identity rows pinning sigma = 0 there.
//
// The sparse matrix depends only on (grid, e), so it is factorized once
// (direct sparse LU) and reused for every right-hand side.

#include <Eigen/Sparse>
#include <cmath>
#include <memory>
#include <vector>

#include "vshock/errors.hpp"
#include "vshock/field.hpp"
#include "vshock/grid.hpp"

namespace vshock {

struct EllipticProblem {
  Grid2D grid;
  double eps = 1.0;
  std::shared_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> lu;
};

// Right-hand side  -(dr^2 + dz^2)(r phi)  on interior z rows (boundary rows
// carry the Dirichlet value 0).
inline std::vector<double> elliptic_rhs(const Grid2D& g,
                                        const std::vector<double>& phi) {
  if (phi.size() != g.size())
    throw validation_error("elliptic_rhs: phi size mismatch");
  const double dr = g.dr(), dz = g.dz();
  const double inv_dr2 = 1.0 / (dr * dr), inv_dz2 = 1.0 / (dz * dz);
  std::vector<double> f(g.size(), 0.0);
  auto w = [&](std::size_t j, std::size_t i) { return g.r(j) * phi[g.index(j, i)]; };
  for (std::size_t j = 0; j < g.n_r; ++j) {
    for (std::size_t i = 1; i + 1 < g.n_z; ++i) {
      double wc = w(j, i);
      double wm = j > 0 ? w(j - 1, i) : -wc;            // odd across the axis
      double wp = j + 1 < g.n_r ? w(j + 1, i) : -wc;    // Dirichlet edge
      double d2r = (wm - 2.0 * wc + wp) * inv_dr2;
      double d2z = (w(j, i - 1) - 2.0 * wc + w(j, i + 1)) * inv_dz2;
      f[g.index(j, i)] = -(d2r + d2z);
    }
  }
  return f;
}

// Matrix-free application of -L_e with the same closures as the assembled
// matrix (z boundary rows act as identity).  Used to verify solves.
inline std::vector<double> apply_operator(const Grid2D& g, double eps,
                                          const std::vector<double>& x) {
  if (x.size() != g.size())
    throw validation_error("apply_operator: field size mismatch");
  const double dr = g.dr(), dz = g.dz();
  const double inv_dr2 = 1.0 / (dr * dr), inv_dz2 = 1.0 / (dz * dz);
  std::vector<double> y(g.size(), 0.0);
  for (std::size_t j = 0; j < g.n_r; ++j) {
    double r = g.r(j);
    for (std::size_t i = 0; i < g.n_z; ++i) {
      std::size_t k = g.index(j, i);
      if (i == 0 || i + 1 == g.n_z) {
        y[k] = x[k];
        continue;
      }
      double xc = x[k];
      double xm = j > 0 ? x[g.index(j - 1, i)] : -xc;
      double xp = j + 1 < g.n_r ? x[g.index(j + 1, i)] : -xc;
      double d2 = (xm - 2.0 * xc + xp) * inv_dr2 +
                  (x[g.index(j, i - 1)] - 2.0 * xc + x[g.index(j, i + 1)]) * inv_dz2;
      double d1 = (xp - xm) / (2.0 * dr);
      y[k] = -eps * d2 - d1 / r + xc / (r * r);
    }
  }
  return y;
}

inline EllipticProblem make_elliptic_problem(const Grid2D& g, double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps))
    throw validation_error("elliptic problem: eps must be positive and finite",
                           {{"eps", ctx_num(eps)}});
  const double dr = g.dr(), dz = g.dz();
  const double inv_dr2 = 1.0 / (dr * dr), inv_dz2 = 1.0 / (dz * dz);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(5 * g.size());
  for (std::size_t j = 0; j < g.n_r; ++j) {
    double r = g.r(j);
    for (std::size_t i = 0; i < g.n_z; ++i) {
      int k = static_cast<int>(g.index(j, i));
      if (i == 0 || i + 1 == g.n_z) {
        trip.emplace_back(k, k, 1.0);
        continue;
      }
      double diag = 2.0 * eps * inv_dr2 + 2.0 * eps * inv_dz2 + 1.0 / (r * r);
      double c_minus = -eps * inv_dr2 + 1.0 / (2.0 * r * dr);  // sigma_{j-1}
      double c_plus = -eps * inv_dr2 - 1.0 / (2.0 * r * dr);   // sigma_{j+1}
      if (j > 0)
        trip.emplace_back(k, static_cast<int>(g.index(j - 1, i)), c_minus);
      else
        diag -= c_minus;  // ghost sigma_{-1} = -sigma_0
      if (j + 1 < g.n_r)
        trip.emplace_back(k, static_cast<int>(g.index(j + 1, i)), c_plus);
      else
        diag -= c_plus;  // ghost sigma_{n_r} = -sigma_{n_r - 1}
      trip.emplace_back(k, static_cast<int>(g.index(j, i - 1)), -eps * inv_dz2);
      trip.emplace_back(k, static_cast<int>(g.index(j, i + 1)), -eps * inv_dz2);
      trip.emplace_back(k, k, diag);
    }
  }
  Eigen::SparseMatrix<double> A(static_cast<int>(g.size()),
                                static_cast<int>(g.size()));
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();
  EllipticProblem prob;
  prob.grid = g;
  prob.eps = eps;
  prob.lu = std::make_shared<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
  prob.lu->compute(A);
  if (prob.lu->info() != Eigen::Success)
    throw numerical_error("elliptic factorization failed",
                          {{"eps", ctx_num(eps)},
                           {"n", std::to_string(g.size())}});
  return prob;
}

// Solve -L_e sigma = f for a caller-supplied right-hand side.
inline std::vector<double> solve_with_rhs(const EllipticProblem& prob,
                                          const std::vector<double>& f) {
  if (f.size() != prob.grid.size())
    throw validation_error("solve_with_rhs: rhs size mismatch");
  Eigen::VectorXd b(static_cast<Eigen::Index>(f.size()));
  for (std::size_t k = 0; k < f.size(); ++k) b[static_cast<Eigen::Index>(k)] = f[k];
  Eigen::VectorXd x = prob.lu->solve(b);
  if (prob.lu->info() != Eigen::Success)
    throw numerical_error("elliptic solve failed",
                          {{"eps", ctx_num(prob.eps)}});
  std::vector<double> out(f.size());
  for (std::size_t k = 0; k < f.size(); ++k) out[k] = x[static_cast<Eigen::Index>(k)];
  return out;
}

inline GriddedField solve_sigma(const EllipticProblem& prob,
                                const GriddedField& phi) {
  if (!(phi.grid == prob.grid))
    throw validation_error("solve_sigma: phi grid does not match the factorization");
  return GriddedField(prob.grid,
                      solve_with_rhs(prob, elliptic_rhs(prob.grid, phi.values)));
}

}  // namespace vshock
