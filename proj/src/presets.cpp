#include "fieldclick/presets.hpp"

#include <array>
#include <cmath>
#include <numeric>

namespace fieldclick {

namespace {

using Amplitudes = FieldState::Amplitudes;

// exp(-(i - center)^2 / (2 width^2)) on cells [begin, end), zero elsewhere.
Amplitudes bump(std::size_t cells, std::size_t begin, std::size_t end) {
  Amplitudes out = Amplitudes::Zero(static_cast<Eigen::Index>(cells));
  const double center = 0.5 * static_cast<double>(begin + end - 1);
  const double width = std::max(0.5, static_cast<double>(end - begin) / 6.0);
  for (std::size_t i = begin; i < end; ++i) {
    const double u = (static_cast<double>(i) - center) / width;
    out(static_cast<Eigen::Index>(i)) = std::exp(-0.5 * u * u);
  }
  return out;
}

// Scales `a` so that sum |a|^2 dV = energy.
Amplitudes with_energy(const Amplitudes& a, double cell_volume, double energy) {
  const double current = a.squaredNorm() * cell_volume;
  return a * std::sqrt(energy / current);
}

std::vector<std::size_t> index_range(std::size_t begin, std::size_t end) {
  std::vector<std::size_t> out(end - begin);
  std::iota(out.begin(), out.end(), begin);
  return out;
}

void require_halves(std::string_view name, const GridPtr& grid) {
  if (grid->size() < 2) {
    throw Error("preset '" + std::string(name) + "' needs at least two cells");
  }
}

}  // namespace

std::vector<PresetInfo> list_presets() {
  return {
      {"two_peak", "two disjoint Gaussian bumps with energy split 0.2 / 0.8; "
                   "two half-grid detectors"},
      {"gaussian_packet", "single centered Gaussian bump; one detector covering the grid"},
      {"uniform", "constant amplitude; two half-grid detectors"},
  };
}

bool is_preset(std::string_view name) {
  for (const auto& p : list_presets()) {
    if (p.name == name) return true;
  }
  return false;
}

GridPtr default_preset_grid() {
  const std::array<double, 1> lower{0.0};
  const std::array<double, 1> upper{1.0};
  const std::array<std::size_t, 1> cells{16};
  return Grid::uniform(std::span<const double>(lower), std::span<const double>(upper),
                       std::span<const std::size_t>(cells));
}

FieldState make_preset(std::string_view name, const GridPtr& grid) {
  const std::size_t n = grid->size();
  const double dv = grid->cell_volume();
  if (name == "two_peak") {
    require_halves(name, grid);
    const std::size_t half = n / 2;
    Amplitudes a = with_energy(bump(n, 0, half), dv, 0.2) +
                   with_energy(bump(n, half, n), dv, 0.8);
    return FieldState(grid, std::move(a));
  }
  if (name == "gaussian_packet") {
    return FieldState(grid, with_energy(bump(n, 0, n), dv, 1.0));
  }
  if (name == "uniform") {
    Amplitudes a = Amplitudes::Constant(static_cast<Eigen::Index>(n), 1.0);
    return FieldState(grid, with_energy(a, dv, 1.0));
  }
  throw Error("unknown preset '" + std::string(name) + "'");
}

std::vector<DetectorConfig> preset_detectors(std::string_view name, const GridPtr& grid) {
  const std::size_t n = grid->size();
  if (name == "two_peak" || name == "uniform") {
    require_halves(name, grid);
    return {{"left", index_range(0, n / 2), std::nullopt},
            {"right", index_range(n / 2, n), std::nullopt}};
  }
  if (name == "gaussian_packet") return {{"all", index_range(0, n), std::nullopt}};
  throw Error("unknown preset '" + std::string(name) + "'");
}

}  // namespace fieldclick
