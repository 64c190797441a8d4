#ifndef FIELDCLICK_SCENARIO_HPP
#define FIELDCLICK_SCENARIO_HPP

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fieldclick/experiment.hpp"

namespace fieldclick {

struct ScanSpec {
  std::vector<double> epsilons;   ///< absolute thresholds for scan-epsilon
  std::vector<double> constants;  ///< calibration constants for scan-coincidence
  std::vector<double> windows;    ///< coincidence windows, seconds
};

struct ErgodicitySpec {
  std::size_t cell = 0;
  double window = 0;  ///< Delta, seconds
  std::size_t samples = 10000;
  std::vector<double> sweep_windows;
  std::size_t sweep_replicas = 100;
};

/// A fully resolved scenario: every default filled in.
struct Scenario {
  Scenario(std::string origin, ExperimentConfig cfg)
      : source(std::move(origin)), config(std::move(cfg)) {}

  std::string source;
  ExperimentConfig config;
  ScanSpec scan;
  std::string basis_kind;  ///< "fourier", "delta" or "vectors"
  std::vector<FieldState> basis;
  ErgodicitySpec ergodicity;
};

/**
 * Parses a JSON scenario. Syntax errors are reported as
 * `source:line:column: ...`; semantic errors name the offending field
 * (and its line when it can be located in the text).
 */
Scenario parse_scenario(const std::filesystem::path& path);
Scenario parse_scenario_text(std::string_view text, const std::string& source = "<scenario>",
                             const std::filesystem::path& base_dir = {});

/// Scenario built from a preset with all defaults.
Scenario preset_scenario(std::string_view preset);

/// Replaces psi (and, when the scenario had preset detectors, the detectors)
/// with a preset evaluated on the scenario grid.
void apply_preset(Scenario& scenario, std::string_view preset);

/// Field state file: {"cell_volume": dV, "records": [{"x": [...], "re": r, "im": i}, ...]}.
FieldState load_field_state(const std::filesystem::path& path);
FieldState parse_field_state(const nlohmann::json& doc, const std::string& source);

/// "100 us" -> 1e-4; plain numbers are seconds.
double parse_time(const nlohmann::json& value);

/// Full resolved configuration, suitable for echoing into outputs.
nlohmann::json to_json(const Scenario& scenario);

}  // namespace fieldclick

#endif  // FIELDCLICK_SCENARIO_HPP
