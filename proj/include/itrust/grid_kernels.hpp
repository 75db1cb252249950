#pragma once

// Data-parallel kernels behind the oracles. Every kernel has a serial
// reference version; the OpenMP version must return bit-identical results.

#include "itrust/types.hpp"

#include <cstdint>

namespace itrust::kernels {

/// Regular lattice over [-delta, delta]^n with points_per_axis points per
/// axis, both endpoints included. Index 0 is the corner (-delta, ..., -delta);
/// the first coordinate is the most significant digit.
struct Lattice {
  Eigen::Index dim = 0;
  std::int64_t points_per_axis = 2;
  double delta = 1.0;

  double spacing() const { return 2.0 * delta / static_cast<double>(points_per_axis - 1); }
  std::int64_t size() const;
  Vector point(std::int64_t index) const;
};

/// Lattice whose spacing does not exceed resolution.
Lattice make_lattice(Eigen::Index dim, double delta, double resolution);

struct LatticeMin {
  std::int64_t index = 0;
  double value = 0.0;
};

/// Minimum of 1/2 s^T S s + h^T s over the lattice. Ties go to the smallest
/// index. S must be symmetric.
LatticeMin lattice_argmin_serial(const Matrix& sym, const Vector& h, const Lattice& lattice);
LatticeMin lattice_argmin_parallel(const Matrix& sym, const Vector& h, const Lattice& lattice);

/// max over the 2^n corners of [-delta, delta]^n of ||S c + h||_2.
double max_corner_gradient_norm_serial(const Matrix& sym, const Vector& h, double delta);
double max_corner_gradient_norm_parallel(const Matrix& sym, const Vector& h, double delta);

}  // namespace itrust::kernels
