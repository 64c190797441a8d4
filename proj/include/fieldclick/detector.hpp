#ifndef FIELDCLICK_DETECTOR_HPP
#define FIELDCLICK_DETECTOR_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "fieldclick/field_space.hpp"

namespace fieldclick {

/// Absolute click threshold epsilon.
struct ThresholdEnergy {
  double epsilon = 0;
};

/// Threshold given relative to the signal: epsilon = C ||psi||^2.
struct Calibration {
  double constant = 0;
};

using ThresholdSpec = std::variant<ThresholdEnergy, Calibration>;

struct DetectorConfig {
  std::string name;
  std::vector<std::size_t> region;  ///< aperture cells
  /// Per-detector override of the experiment-wide threshold.
  std::optional<ThresholdSpec> threshold;
};

/// epsilon = C ||psi||^2.
double calibrate(double constant, const FieldState& psi);

double resolve_threshold(const ThresholdSpec& spec, const FieldState& psi);

/**
 * Energy-integrating threshold detector.
 *
 * Energy is accumulated step by step; once it reaches epsilon the detector
 * clicks, stamps the click with the current time and resets to zero. Any
 * overshoot past epsilon is dropped, and there is no dead time.
 */
class DetectorState {
 public:
  double accumulated() const { return accumulated_; }
  const std::vector<double>& clicks() const { return clicks_; }

  void add_energy(double energy) { accumulated_ += energy; }

  /// accumulated += (dt / gamma) * sum_cells |phi|^2 dV.
  void accumulate(std::span<const Complex> phi_values, double cell_volume,
                  double dt, double gamma);

  /// Clicks (and resets) if the accumulated energy has reached epsilon.
  std::optional<double> poll_click(double epsilon, double now) {
    if (accumulated_ < epsilon) return std::nullopt;
    if (!clicks_.empty() && !(now > clicks_.back())) {
      throw Error("detector: click times must increase");
    }
    accumulated_ = 0;
    clicks_.push_back(now);
    return now;
  }

 private:
  double accumulated_ = 0;
  std::vector<double> clicks_;
};

}  // namespace fieldclick

#endif  // FIELDCLICK_DETECTOR_HPP
