#pragma once

// Uniform 2D grid on [0, r_max] x [z_min, z_max].
//
// Radial nodes are cell centers, r_j = (j + 1/2) * dr with dr = r_max / n_r,
// so the axis r = 0 is never a node and 1/r factors stay finite.  Axial
// nodes include both endpoints, z_i = z_min + i * dz with
// dz = (z_max - z_min) / (n_z - 1).  Values are stored r-major:
// index(j, i) = j * n_z + i.

#include <cstddef>
#include <vector>

#include "vshock/errors.hpp"

namespace vshock {

struct Grid2D {
  double r_max = 0.0;
  double z_min = 0.0;
  double z_max = 0.0;
  std::size_t n_r = 0;
  std::size_t n_z = 0;

  Grid2D() = default;
  Grid2D(double r_max_, double z_min_, double z_max_, std::size_t n_r_,
         std::size_t n_z_)
      : r_max(r_max_), z_min(z_min_), z_max(z_max_), n_r(n_r_), n_z(n_z_) {
    if (!(r_max > 0.0) || !(z_max > z_min) || n_r < 2 || n_z < 2)
      throw validation_error(
          "invalid grid: need r_max > 0, z_max > z_min, n_r >= 2, n_z >= 2",
          {{"r_max", ctx_num(r_max)}, {"z_min", ctx_num(z_min)},
           {"z_max", ctx_num(z_max)}, {"n_r", std::to_string(n_r)},
           {"n_z", std::to_string(n_z)}});
  }

  double dr() const { return r_max / static_cast<double>(n_r); }
  double dz() const { return (z_max - z_min) / static_cast<double>(n_z - 1); }
  double r(std::size_t j) const { return (static_cast<double>(j) + 0.5) * dr(); }
  double z(std::size_t i) const { return z_min + static_cast<double>(i) * dz(); }
  std::size_t size() const { return n_r * n_z; }
  std::size_t index(std::size_t j, std::size_t i) const { return j * n_z + i; }

  std::vector<double> r_nodes() const {
    std::vector<double> v(n_r);
    for (std::size_t j = 0; j < n_r; ++j) v[j] = r(j);
    return v;
  }
  std::vector<double> z_nodes() const {
    std::vector<double> v(n_z);
    for (std::size_t i = 0; i < n_z; ++i) v[i] = z(i);
    return v;
  }

  bool operator==(const Grid2D& o) const {
    return r_max == o.r_max && z_min == o.z_min && z_max == o.z_max &&
           n_r == o.n_r && n_z == o.n_z;
  }
};

}  // namespace vshock
