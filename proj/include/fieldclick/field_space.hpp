#ifndef FIELDCLICK_FIELD_SPACE_HPP
#define FIELDCLICK_FIELD_SPACE_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fieldclick/error.hpp"
#include "fieldclick/numerics.hpp"

namespace fieldclick {

/**
 * Finite spatial grid of equal-volume cells in 1, 2 or 3 dimensions.
 *
 * Cell centers are stored one per row and must be strictly increasing in
 * lexicographic order. A grid is immutable; field states share it through
 * a shared_ptr so concurrent replicas can read it freely.
 */
template <typename Real>
class BasicGrid {
 public:
  using Coordinates =
      Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  BasicGrid(Coordinates points, Real cell_volume)
      : points_(std::move(points)), cell_volume_(cell_volume) {
    const auto dim = points_.cols();
    if (dim < 1 || dim > 3) {
      throw Error("grid: dimension must be 1, 2 or 3, got " +
                  std::to_string(dim));
    }
    if (points_.rows() < 1) throw Error("grid: at least one cell required");
    if (!(cell_volume_ > 0) || !std::isfinite(cell_volume_)) {
      throw Error("grid: cell volume must be finite and > 0");
    }
    for (Eigen::Index i = 1; i < points_.rows(); ++i) {
      const auto prev = points_.row(i - 1);
      const auto cur = points_.row(i);
      if (!std::lexicographical_compare(prev.begin(), prev.end(), cur.begin(),
                                        cur.end())) {
        throw Error("grid: points must be strictly increasing "
                    "lexicographically (violated at index " +
                    std::to_string(i) + ")");
      }
    }
  }

  /// Uniform box [lower, upper) split into `cells[a]` cells along axis a.
  /// The first axis varies slowest.
  static std::shared_ptr<const BasicGrid> uniform(std::span<const Real> lower,
                                                  std::span<const Real> upper,
                                                  std::span<const std::size_t> cells) {
    const std::size_t dim = cells.size();
    if (lower.size() != dim || upper.size() != dim) {
      throw Error("grid: lower, upper and cells must have the same length");
    }
    if (dim < 1 || dim > 3) throw Error("grid: dimension must be 1, 2 or 3");
    std::size_t total = 1;
    Real volume = 1;
    std::vector<Real> spacing(dim);
    for (std::size_t a = 0; a < dim; ++a) {
      if (cells[a] == 0) throw Error("grid: cell counts must be >= 1");
      if (!(upper[a] > lower[a])) throw Error("grid: upper must exceed lower");
      spacing[a] = (upper[a] - lower[a]) / static_cast<Real>(cells[a]);
      volume *= spacing[a];
      total *= cells[a];
    }
    Coordinates points(static_cast<Eigen::Index>(total),
                       static_cast<Eigen::Index>(dim));
    for (std::size_t flat = 0; flat < total; ++flat) {
      std::size_t rest = flat;
      for (std::size_t a = dim; a-- > 0;) {
        const std::size_t k = rest % cells[a];
        rest /= cells[a];
        points(static_cast<Eigen::Index>(flat), static_cast<Eigen::Index>(a)) =
            lower[a] + (static_cast<Real>(k) + Real(0.5)) * spacing[a];
      }
    }
    return std::make_shared<const BasicGrid>(std::move(points), volume);
  }

  int dim() const { return static_cast<int>(points_.cols()); }
  std::size_t size() const { return static_cast<std::size_t>(points_.rows()); }
  Real cell_volume() const { return cell_volume_; }
  const Coordinates& points() const { return points_; }
  auto point(std::size_t i) const {
    return points_.row(static_cast<Eigen::Index>(i));
  }

  bool operator==(const BasicGrid& other) const {
    return cell_volume_ == other.cell_volume_ && points_ == other.points_;
  }

 private:
  Coordinates points_;
  Real cell_volume_;
};

template <typename Real>
using BasicGridPtr = std::shared_ptr<const BasicGrid<Real>>;

/// Complex field amplitudes psi(x_i) on a grid.
template <typename Real>
class BasicFieldState {
 public:
  using Scalar = std::complex<Real>;
  using Amplitudes = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  BasicFieldState(BasicGridPtr<Real> grid, Amplitudes amplitudes)
      : grid_(std::move(grid)), amplitudes_(std::move(amplitudes)) {
    if (!grid_) throw Error("field state: null grid");
    if (static_cast<std::size_t>(amplitudes_.size()) != grid_->size()) {
      throw Error("field state: " + std::to_string(amplitudes_.size()) +
                  " amplitudes for a grid of " +
                  std::to_string(grid_->size()) + " cells");
    }
  }

  static BasicFieldState zero(BasicGridPtr<Real> grid) {
    const auto n = static_cast<Eigen::Index>(grid->size());
    return BasicFieldState(std::move(grid), Amplitudes::Zero(n));
  }

  const BasicGridPtr<Real>& grid() const { return grid_; }
  const Amplitudes& amplitudes() const { return amplitudes_; }
  std::size_t size() const { return static_cast<std::size_t>(amplitudes_.size()); }
  Scalar operator[](std::size_t i) const {
    return amplitudes_(static_cast<Eigen::Index>(i));
  }

  /// Overwrites the amplitudes in place; the length must not change.
  template <typename Derived>
  void assign(const Eigen::MatrixBase<Derived>& values) {
    if (values.size() != amplitudes_.size()) {
      throw Error("field state: assign changes length");
    }
    amplitudes_ = values;
  }

 private:
  BasicGridPtr<Real> grid_;
  Amplitudes amplitudes_;
};

template <typename Real>
bool same_grid(const BasicFieldState<Real>& a, const BasicFieldState<Real>& b) {
  return a.grid() == b.grid() || *a.grid() == *b.grid();
}

template <typename Real>
BasicFieldState<Real> scaled(const BasicFieldState<Real>& psi,
                             std::complex<Real> factor) {
  return BasicFieldState<Real>(psi.grid(), psi.amplitudes() * factor);
}

/// Total energy sum_i |psi(x_i)|^2 dV, compensated.
template <typename Real>
Real norm_squared(const BasicFieldState<Real>& psi) {
  CompensatedSum<Real> sum;
  for (const auto& z : psi.amplitudes()) sum += std::norm(z);
  return sum.value() * psi.grid()->cell_volume();
}

/// <phi, e> = sum_i phi(x_i) conj(e(x_i)) dV.
template <typename Real>
std::complex<Real> inner_product(const BasicFieldState<Real>& phi,
                                 const BasicFieldState<Real>& e) {
  if (!same_grid(phi, e)) throw Error("inner product: grid mismatch");
  CompensatedSum<Real> re;
  CompensatedSum<Real> im;
  const auto& a = phi.amplitudes();
  const auto& b = e.amplitudes();
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const auto z = a(i) * std::conj(b(i));
    re += z.real();
    im += z.imag();
  }
  const Real dv = phi.grid()->cell_volume();
  return {re.value() * dv, im.value() * dv};
}

/// A field state with unit norm. Only `normalize` produces one.
template <typename Real>
class BasicWaveFunction {
 public:
  const BasicFieldState<Real>& as_field() const { return field_; }
  const BasicGridPtr<Real>& grid() const { return field_.grid(); }
  const auto& amplitudes() const { return field_.amplitudes(); }

 private:
  explicit BasicWaveFunction(BasicFieldState<Real> field)
      : field_(std::move(field)) {}

  template <typename R>
  friend BasicWaveFunction<R> normalize(const BasicFieldState<R>& psi);

  BasicFieldState<Real> field_;
};

template <typename Real>
BasicWaveFunction<Real> normalize(const BasicFieldState<Real>& psi) {
  const Real energy = norm_squared(psi);
  if (!(energy > 0) || !std::isfinite(energy)) {
    throw Error("degenerate field state");
  }
  const Real scale = Real(1) / std::sqrt(energy);
  return BasicWaveFunction<Real>(
      BasicFieldState<Real>(psi.grid(), psi.amplitudes() * scale));
}

namespace detail {

inline void check_region(std::span<const std::size_t> region, std::size_t cells,
                         const char* who) {
  if (region.empty()) throw Error(std::string(who) + ": empty region");
  std::vector<std::size_t> sorted(region.begin(), region.end());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.back() >= cells) {
    throw Error(std::string(who) + ": cell index " +
                std::to_string(sorted.back()) + " out of range (grid has " +
                std::to_string(cells) + " cells)");
  }
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw Error(std::string(who) + ": duplicate cell index in region");
  }
}

}  // namespace detail

/// Energy of psi inside `region`: sum_{i in region} |psi(x_i)|^2 dV.
template <typename Real>
Real region_energy(const BasicFieldState<Real>& psi,
                   std::span<const std::size_t> region) {
  detail::check_region(region, psi.size(), "region energy");
  CompensatedSum<Real> sum;
  for (const auto i : region) sum += std::norm(psi[i]);
  return sum.value() * psi.grid()->cell_volume();
}

/// Born probability |Psi|^2 dV summed over the region.
template <typename Real>
Real born_probability(const BasicWaveFunction<Real>& wave,
                      std::span<const std::size_t> region) {
  detail::check_region(region, wave.as_field().size(), "born probability");
  return region_energy(wave.as_field(), region);
}

/// Orthonormal discrete delta basis: e_j = 1/sqrt(dV) at cell j.
template <typename Real>
std::vector<BasicFieldState<Real>> delta_basis(const BasicGridPtr<Real>& grid) {
  const auto n = static_cast<Eigen::Index>(grid->size());
  const Real height = Real(1) / std::sqrt(grid->cell_volume());
  std::vector<BasicFieldState<Real>> basis;
  basis.reserve(grid->size());
  for (Eigen::Index j = 0; j < n; ++j) {
    typename BasicFieldState<Real>::Amplitudes e =
        BasicFieldState<Real>::Amplitudes::Zero(n);
    e(j) = height;
    basis.emplace_back(grid, std::move(e));
  }
  return basis;
}

/// Sifting delta 1/dV at `cell`, so that <phi, delta> = phi(x_cell).
template <typename Real>
BasicFieldState<Real> discrete_delta(const BasicGridPtr<Real>& grid,
                                     std::size_t cell) {
  if (cell >= grid->size()) throw Error("discrete delta: cell out of range");
  auto state = BasicFieldState<Real>::zero(grid);
  typename BasicFieldState<Real>::Amplitudes e = state.amplitudes();
  e(static_cast<Eigen::Index>(cell)) = Real(1) / grid->cell_volume();
  state.assign(e);
  return state;
}

/// Discrete Fourier basis over the flat cell index. For two cells this is
/// the Hadamard pair (1, 1) / sqrt(2 dV), (1, -1) / sqrt(2 dV).
template <typename Real>
std::vector<BasicFieldState<Real>> fourier_basis(const BasicGridPtr<Real>& grid) {
  const auto n = static_cast<Eigen::Index>(grid->size());
  const Real height =
      Real(1) / std::sqrt(static_cast<Real>(n) * grid->cell_volume());
  std::vector<BasicFieldState<Real>> basis;
  basis.reserve(grid->size());
  for (Eigen::Index k = 0; k < n; ++k) {
    typename BasicFieldState<Real>::Amplitudes e(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      // Reduce jk mod n first so real-valued entries come out exact.
      const auto phase_index = (j * k) % n;
      if (phase_index == 0) {
        e(j) = height;
      } else if (2 * phase_index == n) {
        e(j) = -height;
      } else {
        const Real angle = Real(2) * std::numbers::pi_v<Real> *
                           static_cast<Real>(phase_index) / static_cast<Real>(n);
        e(j) = std::polar(height, angle);
      }
    }
    basis.emplace_back(grid, std::move(e));
  }
  return basis;
}

/// Gram matrix G(j, k) = <e_k, e_j>.
template <typename Real>
Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic> gram_matrix(
    std::span<const BasicFieldState<Real>> basis) {
  const auto m = static_cast<Eigen::Index>(basis.size());
  Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic> gram(m, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index k = 0; k < m; ++k) {
      gram(j, k) = inner_product(basis[static_cast<std::size_t>(k)],
                                 basis[static_cast<std::size_t>(j)]);
    }
  }
  return gram;
}

using Grid = BasicGrid<double>;
using GridPtr = BasicGridPtr<double>;
using FieldState = BasicFieldState<double>;
using WaveFunction = BasicWaveFunction<double>;
using Complex = std::complex<double>;

}  // namespace fieldclick

#endif  // FIELDCLICK_FIELD_SPACE_HPP
