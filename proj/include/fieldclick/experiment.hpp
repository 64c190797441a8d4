#ifndef FIELDCLICK_EXPERIMENT_HPP
#define FIELDCLICK_EXPERIMENT_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fieldclick/detector.hpp"
#include "fieldclick/field_space.hpp"
#include "fieldclick/signal_gen.hpp"

namespace fieldclick {

/// Smallest accepted T / tau_pq for a fluctuating driver.
inline constexpr double kMinRunWindow = 1e4;

struct ExperimentConfig {
  explicit ExperimentConfig(FieldState signal) : psi(std::move(signal)) {}

  FieldState psi;
  std::vector<DetectorConfig> detectors;
  ThresholdSpec threshold = Calibration{0.005};
  double duration = 100.0;  ///< T, seconds
  ProcessParams process;
  double coincidence_window = 1e-4;  ///< w, seconds
  std::size_t replicas = 1;
};

/// Throws with every violated constraint listed.
void validate(const ExperimentConfig& cfg);

/// Resolved epsilon per detector.
std::vector<double> detector_thresholds(const ExperimentConfig& cfg);

struct ClickRecord {
  std::size_t detector_id = 0;
  double time = 0;  ///< seconds
  std::size_t replica_id = 0;

  bool operator==(const ClickRecord&) const = default;
};

struct DetectorStatistics {
  std::string name;
  double epsilon = 0;
  double weight = 0;  ///< energy per unit |eta|^2 entering this detector
  std::size_t count = 0;
  double frequency = 0;  ///< lambda = gamma count / (replicas T)
  double frequency_stderr = 0;
  double analytic_frequency = 0;  ///< weight / epsilon
  double probability = 0;
  double probability_stderr = 0;  ///< between-replica, or binomial for one replica
  double binomial_stderr = 0;
  double oracle_probability = 0;
  std::vector<std::size_t> replica_counts;
};

struct RunStatistics {
  std::vector<DetectorStatistics> detectors;
  std::size_t total_clicks = 0;
  std::size_t double_clicks = 0;
  std::vector<std::size_t> replica_double_clicks;
  double coincidence_window = 0;
  double duration = 0;
  double gamma = 1;
  std::size_t replicas = 0;
  /// Sorted by (replica, time, detector). Empty unless clicks were kept.
  std::vector<ClickRecord> clicks;
};

struct RunOptions {
  std::size_t threads = 1;
  bool keep_clicks = true;
};

/// Drives the signal over [0, T] and feeds every detector each step.
RunStatistics run_detection(const ExperimentConfig& cfg, const RunOptions& options = {});

/// gamma count / T for detector `id`.
double click_frequency(const RunStatistics& stats, std::size_t id);

/// count_i / total; throws "run too short" without clicks.
std::vector<double> detection_probability(const RunStatistics& stats);

/**
 * Pairs clicks of distinct detectors (same replica) with |t_a - t_b| <= w.
 * Greedy earliest-first: each click joins at most one pair.
 */
std::size_t count_coincidences(std::span<const ClickRecord> clicks, double window);

/// Upper envelope T / (2 C gamma) for double clicks.
double double_click_bound(double duration, double constant, double gamma = 1.0);

/// Measures in an orthonormal basis: one virtual detector per element,
/// fed |<phi(s), e_j>|^2. Every element uses the experiment threshold.
RunStatistics run_basis_measurement(const ExperimentConfig& cfg,
                                    std::span<const FieldState> basis,
                                    const RunOptions& options = {});

/// Throws listing the offending Gram entries unless |G - I| <= tolerance.
void check_orthonormal(std::span<const FieldState> basis, double tolerance = 1e-10);

struct EpsilonRun {
  double epsilon = 0;
  RunStatistics stats;
};

struct EpsilonScanReport {
  std::vector<EpsilonRun> runs;
  std::vector<double> oracle;  ///< per detector
  double max_pairwise_deviation = 0;  ///< max_i,a,b |P_i(a) - P_i(b)|
  double max_oracle_deviation = 0;    ///< max_i,a |P_i(a) - oracle_i|
  bool within_oracle_band = false;    ///< all |P - oracle| <= 3 binomial sigma
  bool within_pairwise_band = false;  ///< all pairwise <= 3 joint sigma
  std::vector<double> slopes;  ///< per detector d log(lambda) / d log(epsilon)
  double max_lambda_epsilon_spread = 0;  ///< max_i (max/min - 1) of lambda eps
};

/// Runs the experiment once per epsilon (applied to every detector) with
/// the same seed. Epsilons must span at least one decade.
EpsilonScanReport epsilon_invariance_scan(const ExperimentConfig& cfg,
                                          std::span<const double> epsilons,
                                          const RunOptions& options = {});

struct CoincidenceRow {
  double constant = 0;  ///< C
  double window = 0;    ///< w
  std::size_t double_clicks = 0;
  double bound = 0;  ///< T replicas / (2 C gamma)
  std::size_t total_clicks = 0;
};

struct CoincidenceScanReport {
  std::vector<CoincidenceRow> rows;  ///< C-major, then w
  bool within_envelope = false;      ///< n_double <= 1.2 bound everywhere
  bool non_increasing = false;       ///< n_double non-increasing in C per w
};

inline constexpr double kDoubleClickEnvelope = 1.2;

/// Calibrates every detector with each C in turn and counts double clicks
/// at each window. Bounds are scaled by the replica count.
CoincidenceScanReport coincidence_scan(const ExperimentConfig& cfg,
                                       std::span<const double> constants,
                                       std::span<const double> windows,
                                       const RunOptions& options = {});

}  // namespace fieldclick

#endif  // FIELDCLICK_EXPERIMENT_HPP
