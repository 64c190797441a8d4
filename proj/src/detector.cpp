#include "fieldclick/detector.hpp"

#include <cmath>

namespace fieldclick {

double calibrate(double constant, const FieldState& psi) {
  if (!(constant > 0) || !std::isfinite(constant)) {
    throw Error("calibrate: C must be finite and > 0");
  }
  const double energy = norm_squared(psi);
  if (!(energy > 0)) throw Error("degenerate field state");
  return constant * energy;
}

double resolve_threshold(const ThresholdSpec& spec, const FieldState& psi) {
  if (const auto* c = std::get_if<Calibration>(&spec)) {
    return calibrate(c->constant, psi);
  }
  const double epsilon = std::get<ThresholdEnergy>(spec).epsilon;
  if (!(epsilon > 0) || !std::isfinite(epsilon)) {
    throw Error("threshold: epsilon must be finite and > 0");
  }
  return epsilon;
}

void DetectorState::accumulate(std::span<const Complex> phi_values,
                               double cell_volume, double dt, double gamma) {
  if (!(dt > 0)) throw Error("accumulate: dt must be > 0");
  CompensatedSum<double> intensity;
  for (const auto& z : phi_values) intensity += std::norm(z);
  accumulated_ += dt / gamma * intensity.value() * cell_volume;
}

}  // namespace fieldclick
