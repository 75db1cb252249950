#include "itrust/grid_kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace itrust::kernels {

namespace {

constexpr int kMaxKernelDim = 20;

// Decodes index into coordinates and evaluates the energy. The same inline
// routine is used by both kernels so results agree bit for bit.
inline double lattice_energy(const double* sym, const double* h, int n, std::int64_t m,
                             double delta, double spacing, std::int64_t index,
                             double* coords) {
  for (int i = n - 1; i >= 0; --i) {
    const std::int64_t digit = index % m;
    index /= m;
    coords[i] = digit == m - 1 ? delta : -delta + spacing * static_cast<double>(digit);
  }
  double quad = 0.0;
  double lin = 0.0;
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < n; ++j) row += sym[i + j * n] * coords[j];
    quad += coords[i] * row;
    lin += h[i] * coords[i];
  }
  return 0.5 * quad + lin;
}

inline double corner_gradient_norm(const double* sym, const double* h, int n, double delta,
                                   std::int64_t mask) {
  double sq = 0.0;
  for (int i = 0; i < n; ++i) {
    double g = h[i];
    for (int j = 0; j < n; ++j) {
      const double c = (mask >> (n - 1 - j)) & 1 ? delta : -delta;
      g += sym[i + j * n] * c;
    }
    sq += g * g;
  }
  return std::sqrt(sq);
}

inline bool better(double value, std::int64_t index, const LatticeMin& best) {
  return value < best.value || (value == best.value && index < best.index);
}

void check_lattice(const Matrix& sym, const Vector& h, const Lattice& lattice) {
  require_dim(sym.rows(), lattice.dim, "lattice kernel");
  require_dim(sym.cols(), lattice.dim, "lattice kernel");
  require_dim(h.size(), lattice.dim, "lattice kernel");
  if (lattice.dim < 1 || lattice.dim > kMaxKernelDim) {
    throw CapabilityError("lattice kernel: unsupported dimension");
  }
}

}  // namespace

std::int64_t Lattice::size() const {
  std::int64_t total = 1;
  for (Eigen::Index i = 0; i < dim; ++i) {
    if (total > std::numeric_limits<std::int64_t>::max() / points_per_axis) {
      throw CapabilityError("lattice too large");
    }
    total *= points_per_axis;
  }
  return total;
}

Vector Lattice::point(std::int64_t index) const {
  Vector s(dim);
  const double step = spacing();
  for (Eigen::Index i = dim - 1; i >= 0; --i) {
    const std::int64_t digit = index % points_per_axis;
    index /= points_per_axis;
    s[i] = digit == points_per_axis - 1 ? delta : -delta + step * static_cast<double>(digit);
  }
  return s;
}

Lattice make_lattice(Eigen::Index dim, double delta, double resolution) {
  if (!(resolution > 0.0)) throw ArgumentError("lattice: resolution must be positive");
  if (!(delta > 0.0)) throw ArgumentError("lattice: delta must be positive");
  const double intervals = std::ceil(2.0 * delta / resolution - 1e-9);
  if (intervals > 1e9) throw CapabilityError("lattice: resolution too fine");
  Lattice lattice;
  lattice.dim = dim;
  lattice.delta = delta;
  lattice.points_per_axis = std::max<std::int64_t>(2, static_cast<std::int64_t>(intervals) + 1);
  return lattice;
}

LatticeMin lattice_argmin_serial(const Matrix& sym, const Vector& h, const Lattice& lattice) {
  check_lattice(sym, h, lattice);
  const int n = static_cast<int>(lattice.dim);
  const std::int64_t total = lattice.size();
  const double spacing = lattice.spacing();
  double coords[kMaxKernelDim];

  LatticeMin best{0, std::numeric_limits<double>::infinity()};
  for (std::int64_t idx = 0; idx < total; ++idx) {
    const double e = lattice_energy(sym.data(), h.data(), n, lattice.points_per_axis,
                                    lattice.delta, spacing, idx, coords);
    if (e < best.value) best = {idx, e};
  }
  return best;
}

LatticeMin lattice_argmin_parallel(const Matrix& sym, const Vector& h, const Lattice& lattice) {
  check_lattice(sym, h, lattice);
  const int n = static_cast<int>(lattice.dim);
  const std::int64_t total = lattice.size();
  const double spacing = lattice.spacing();
  const double* sym_data = sym.data();
  const double* h_data = h.data();
  const std::int64_t m = lattice.points_per_axis;
  const double delta = lattice.delta;

  LatticeMin best{0, std::numeric_limits<double>::infinity()};
#pragma omp parallel
  {
    double coords[kMaxKernelDim];
    LatticeMin local{0, std::numeric_limits<double>::infinity()};
#pragma omp for schedule(static) nowait
    for (std::int64_t idx = 0; idx < total; ++idx) {
      const double e = lattice_energy(sym_data, h_data, n, m, delta, spacing, idx, coords);
      if (better(e, idx, local)) local = {idx, e};
    }
#pragma omp critical(itrust_lattice_merge)
    {
      if (better(local.value, local.index, best)) best = local;
    }
  }
  return best;
}

double max_corner_gradient_norm_serial(const Matrix& sym, const Vector& h, double delta) {
  const int n = static_cast<int>(h.size());
  if (n > kMaxKernelDim) throw CapabilityError("corner enumeration: dimension too large");
  const std::int64_t corners = std::int64_t{1} << n;
  double best = 0.0;
  for (std::int64_t mask = 0; mask < corners; ++mask) {
    best = std::max(best, corner_gradient_norm(sym.data(), h.data(), n, delta, mask));
  }
  return best;
}

double max_corner_gradient_norm_parallel(const Matrix& sym, const Vector& h, double delta) {
  const int n = static_cast<int>(h.size());
  if (n > kMaxKernelDim) throw CapabilityError("corner enumeration: dimension too large");
  const std::int64_t corners = std::int64_t{1} << n;
  const double* sym_data = sym.data();
  const double* h_data = h.data();
  double best = 0.0;
#pragma omp parallel for schedule(static) reduction(max : best)
  for (std::int64_t mask = 0; mask < corners; ++mask) {
    best = std::max(best, corner_gradient_norm(sym_data, h_data, n, delta, mask));
  }
  return best;
}

}  // namespace itrust::kernels
