#ifndef FIELDCLICK_PRESETS_HPP
#define FIELDCLICK_PRESETS_HPP

#include <string>
#include <string_view>
#include <vector>

#include "fieldclick/detector.hpp"
#include "fieldclick/field_space.hpp"

namespace fieldclick {

struct PresetInfo {
  std::string name;
  std::string description;
};

std::vector<PresetInfo> list_presets();

bool is_preset(std::string_view name);

/// 1-D grid on [0, 1) with 16 cells, used when a preset has no grid.
GridPtr default_preset_grid();

/// Preset signal shape on `grid`, scaled to ||psi||^2 = 1.
///  - two_peak: disjoint truncated Gaussian bumps on the two index halves,
///    carrying energy 0.2 and 0.8.
///  - gaussian_packet: one Gaussian bump centered on the grid.
///  - uniform: constant amplitude.
FieldState make_preset(std::string_view name, const GridPtr& grid);

/// Detectors that go with a preset: index halves "left"/"right" for
/// two_peak and uniform, a single "all" detector for gaussian_packet.
std::vector<DetectorConfig> preset_detectors(std::string_view name, const GridPtr& grid);

}  // namespace fieldclick

#endif  // FIELDCLICK_PRESETS_HPP
