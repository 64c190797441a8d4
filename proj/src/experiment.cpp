#include "fieldclick/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include "fieldclick/numerics.hpp"
#include "fieldclick/observables.hpp"

namespace fieldclick {

namespace {

/// One detection channel: weight w such that the energy collected in a step
/// is (dt / gamma) |eta|^2 w.
struct Channel {
  double weight;
  double epsilon;
};

struct ReplicaResult {
  std::vector<std::size_t> counts;
  std::vector<ClickRecord> clicks;
};

std::uint64_t step_count(double duration, double dt) {
  return static_cast<std::uint64_t>(std::floor(duration / dt * (1.0 + 1e-12)));
}

ReplicaResult simulate_replica(std::span<const Channel> channels,
                               const ProcessParams& process, double duration,
                               std::size_t replica) {
  SignalDriver driver(process, replica);
  const std::uint64_t steps = step_count(duration, process.dt);
  const double factor = process.dt / process.gamma;
  std::vector<DetectorState> detectors(channels.size());

  for (std::uint64_t n = 1; n <= steps; ++n) {
    const double intensity = std::norm(driver.eta()) * factor;
    const double now = std::min(static_cast<double>(n) * process.dt, duration);
    for (std::size_t k = 0; k < channels.size(); ++k) {
      detectors[k].add_energy(intensity * channels[k].weight);
      detectors[k].poll_click(channels[k].epsilon, now);
    }
    driver.advance();
  }

  ReplicaResult result;
  std::size_t total = 0;
  for (const auto& d : detectors) {
    result.counts.push_back(d.clicks().size());
    total += d.clicks().size();
  }
  result.clicks.reserve(total);
  for (std::size_t k = 0; k < detectors.size(); ++k) {
    for (const double t : detectors[k].clicks()) {
      result.clicks.push_back({k, t, replica});
    }
  }
  std::sort(result.clicks.begin(), result.clicks.end(),
            [](const ClickRecord& a, const ClickRecord& b) {
              return a.time != b.time ? a.time < b.time : a.detector_id < b.detector_id;
            });
  return result;
}

std::vector<ReplicaResult> run_replicas(std::span<const Channel> channels,
                                        const ProcessParams& process,
                                        double duration, std::size_t replicas,
                                        std::size_t threads) {
  std::vector<ReplicaResult> results(replicas);
  threads = std::clamp<std::size_t>(threads, 1, replicas);
  if (threads == 1) {
    for (std::size_t r = 0; r < replicas; ++r) {
      results[r] = simulate_replica(channels, process, duration, r);
    }
    return results;
  }
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t r = next++; r < replicas; r = next++) {
          results[r] = simulate_replica(channels, process, duration, r);
        }
      });
    }
  }
  return results;
}

void check_run_parameters(const ExperimentConfig& cfg, std::vector<std::string>& problems) {
  for (const auto& p : violations(cfg.process)) problems.push_back("process: " + p);
  if (!(cfg.duration > 0) || !std::isfinite(cfg.duration)) {
    problems.emplace_back("T must be finite and > 0");
  } else if (!cfg.process.is_frozen() && cfg.process.tau_pq > 0 &&
             cfg.duration < kMinRunWindow * cfg.process.tau_pq) {
    std::ostringstream msg;
    msg << "T must be >= 1e4 tau_pq (T = " << cfg.duration
        << " s, tau_pq = " << cfg.process.tau_pq << " s)";
    problems.push_back(msg.str());
  }
  if (cfg.process.dt > 0 && !(cfg.coincidence_window >= cfg.process.dt)) {
    problems.emplace_back("coincidence window must be >= dt");
  }
  if (cfg.replicas < 1) problems.emplace_back("replicas must be >= 1");
  if (cfg.process.dt > 0 && cfg.duration / cfg.process.dt > 9e15) {
    problems.emplace_back("T / dt is too large");
  }
  try {
    resolve_threshold(cfg.threshold, cfg.psi);
  } catch (const Error& e) {
    problems.push_back(e.what());
  }
}

void throw_if_any(const std::vector<std::string>& problems) {
  if (problems.empty()) return;
  std::string msg = "invalid experiment configuration:";
  for (const auto& p : problems) msg += " " + p + ";";
  throw Error(msg);
}

std::string detector_label(const DetectorConfig& d, std::size_t i) {
  return d.name.empty() ? "detector " + std::to_string(i) : "detector '" + d.name + "'";
}

double stderr_of(const std::vector<double>& values) {
  RunningStats stats;
  for (const double v : values) stats.push(v);
  return stats.standard_error();
}

RunStatistics aggregate(std::vector<ReplicaResult>&& results,
                        std::span<const Channel> channels,
                        std::vector<std::string> names, const ExperimentConfig& cfg,
                        bool keep_clicks) {
  const std::size_t replicas = results.size();
  const double gamma = cfg.process.gamma;
  const double duration = cfg.duration;

  RunStatistics stats;
  stats.duration = cfg.duration;
  stats.gamma = gamma;
  stats.replicas = replicas;
  stats.coincidence_window = cfg.coincidence_window;

  double weight_total = 0;
  for (const auto& c : channels) weight_total += c.weight;

  for (std::size_t k = 0; k < channels.size(); ++k) {
    DetectorStatistics d;
    d.name = std::move(names[k]);
    d.epsilon = channels[k].epsilon;
    d.weight = channels[k].weight;
    d.analytic_frequency = channels[k].weight / channels[k].epsilon;
    d.oracle_probability = weight_total > 0 ? channels[k].weight / weight_total : 0.0;
    for (const auto& r : results) {
      d.replica_counts.push_back(r.counts[k]);
      d.count += r.counts[k];
    }
    stats.total_clicks += d.count;
    stats.detectors.push_back(std::move(d));
  }

  std::vector<std::size_t> replica_totals(replicas, 0);
  for (std::size_t r = 0; r < replicas; ++r) {
    for (const auto c : results[r].counts) replica_totals[r] += c;
  }

  const double total = static_cast<double>(stats.total_clicks);
  for (auto& d : stats.detectors) {
    const double count = static_cast<double>(d.count);
    d.frequency = gamma * count / (static_cast<double>(replicas) * duration);
    if (replicas >= 2) {
      std::vector<double> lambdas;
      for (const auto c : d.replica_counts) {
        lambdas.push_back(gamma * static_cast<double>(c) / duration);
      }
      d.frequency_stderr = stderr_of(lambdas);
    } else {
      d.frequency_stderr = gamma * std::sqrt(count) / duration;
    }
    if (stats.total_clicks > 0) {
      d.probability = count / total;
      d.binomial_stderr = std::sqrt(d.probability * (1.0 - d.probability) / total);
      std::vector<double> ps;
      for (std::size_t r = 0; r < replicas; ++r) {
        if (replica_totals[r] > 0) {
          ps.push_back(static_cast<double>(d.replica_counts[r]) /
                       static_cast<double>(replica_totals[r]));
        }
      }
      d.probability_stderr = ps.size() >= 2 ? stderr_of(ps) : d.binomial_stderr;
    } else {
      d.probability = std::numeric_limits<double>::quiet_NaN();
      d.binomial_stderr = std::numeric_limits<double>::quiet_NaN();
      d.probability_stderr = std::numeric_limits<double>::quiet_NaN();
    }
  }

  for (auto& r : results) {
    const auto n = count_coincidences(r.clicks, cfg.coincidence_window);
    stats.replica_double_clicks.push_back(n);
    stats.double_clicks += n;
    if (keep_clicks) {
      stats.clicks.insert(stats.clicks.end(), r.clicks.begin(), r.clicks.end());
    }
  }
  return stats;
}

ExperimentConfig with_threshold(const ExperimentConfig& cfg, ThresholdSpec spec) {
  ExperimentConfig out = cfg;
  out.threshold = spec;
  for (auto& d : out.detectors) d.threshold.reset();
  return out;
}

}  // namespace

void validate(const ExperimentConfig& cfg) {
  std::vector<std::string> problems;
  check_run_parameters(cfg, problems);
  if (cfg.detectors.empty()) problems.emplace_back("at least one detector required");

  std::vector<int> owner(cfg.psi.size(), -1);
  bool overlap = false;
  for (std::size_t i = 0; i < cfg.detectors.size(); ++i) {
    const auto& d = cfg.detectors[i];
    try {
      detail::check_region(d.region, cfg.psi.size(), "detector region");
    } catch (const Error& e) {
      problems.push_back(detector_label(d, i) + ": " + e.what());
      continue;
    }
    for (const auto cell : d.region) {
      if (owner[cell] >= 0 && owner[cell] != static_cast<int>(i)) overlap = true;
      owner[cell] = static_cast<int>(i);
    }
    if (d.threshold) {
      try {
        resolve_threshold(*d.threshold, cfg.psi);
      } catch (const Error& e) {
        problems.push_back(detector_label(d, i) + ": " + e.what());
      }
    }
  }
  if (overlap) problems.emplace_back("regions must be disjoint");
  throw_if_any(problems);
}

std::vector<double> detector_thresholds(const ExperimentConfig& cfg) {
  std::vector<double> out;
  for (const auto& d : cfg.detectors) {
    out.push_back(resolve_threshold(d.threshold.value_or(cfg.threshold), cfg.psi));
  }
  return out;
}

RunStatistics run_detection(const ExperimentConfig& cfg, const RunOptions& options) {
  validate(cfg);
  const auto epsilons = detector_thresholds(cfg);
  std::vector<Channel> channels;
  std::vector<std::string> names;
  for (std::size_t k = 0; k < cfg.detectors.size(); ++k) {
    channels.push_back({region_energy(cfg.psi, cfg.detectors[k].region), epsilons[k]});
    names.push_back(cfg.detectors[k].name.empty() ? "d" + std::to_string(k)
                                                  : cfg.detectors[k].name);
  }
  auto results = run_replicas(channels, cfg.process, cfg.duration, cfg.replicas,
                              options.threads);
  return aggregate(std::move(results), channels, std::move(names), cfg,
                   options.keep_clicks);
}

double click_frequency(const RunStatistics& stats, std::size_t id) {
  if (id >= stats.detectors.size()) {
    throw Error("click frequency: unknown detector id " + std::to_string(id));
  }
  return stats.detectors[id].frequency;
}

std::vector<double> detection_probability(const RunStatistics& stats) {
  if (stats.total_clicks == 0) throw Error("run too short");
  std::vector<double> out;
  for (const auto& d : stats.detectors) out.push_back(d.probability);
  return out;
}

std::size_t count_coincidences(std::span<const ClickRecord> clicks, double window) {
  std::vector<ClickRecord> sorted(clicks.begin(), clicks.end());
  std::sort(sorted.begin(), sorted.end(), [](const ClickRecord& a, const ClickRecord& b) {
    if (a.replica_id != b.replica_id) return a.replica_id < b.replica_id;
    if (a.time != b.time) return a.time < b.time;
    return a.detector_id < b.detector_id;
  });
  // Time stamps are n * dt, so allow rounding slack on the window edge.
  const double reach = window * (1.0 + 1e-9);
  std::vector<bool> used(sorted.size(), false);
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (used[i]) continue;
    for (std::size_t j = i + 1; j < sorted.size(); ++j) {
      if (sorted[j].replica_id != sorted[i].replica_id) break;
      if (sorted[j].time - sorted[i].time > reach) break;
      if (used[j] || sorted[j].detector_id == sorted[i].detector_id) continue;
      used[i] = used[j] = true;
      ++pairs;
      break;
    }
  }
  return pairs;
}

double double_click_bound(double duration, double constant, double gamma) {
  if (!(constant > 0)) throw Error("double click bound: C must be > 0");
  if (!(gamma > 0)) throw Error("double click bound: gamma must be > 0");
  return duration / (2.0 * constant * gamma);
}

void check_orthonormal(std::span<const FieldState> basis, double tolerance) {
  if (basis.empty()) throw Error("basis: empty");
  for (const auto& e : basis) {
    if (!same_grid(e, basis.front())) throw Error("basis: elements on different grids");
  }
  const auto gram = gram_matrix(basis);
  std::ostringstream bad;
  std::size_t offending = 0;
  for (Eigen::Index j = 0; j < gram.rows(); ++j) {
    for (Eigen::Index k = 0; k < gram.cols(); ++k) {
      const Complex expected = j == k ? 1.0 : 0.0;
      if (std::abs(gram(j, k) - expected) > tolerance) {
        if (offending < 8) bad << " G(" << j << "," << k << ")=" << gram(j, k);
        ++offending;
      }
    }
  }
  if (offending > 0) {
    throw Error("basis is not orthonormal (" + std::to_string(offending) +
                " Gram entries off):" + bad.str());
  }
}

RunStatistics run_basis_measurement(const ExperimentConfig& cfg,
                                    std::span<const FieldState> basis,
                                    const RunOptions& options) {
  std::vector<std::string> problems;
  check_run_parameters(cfg, problems);
  throw_if_any(problems);
  check_orthonormal(basis);
  if (!same_grid(basis.front(), cfg.psi)) throw Error("basis: grid mismatch with psi");

  const double epsilon = resolve_threshold(cfg.threshold, cfg.psi);
  std::vector<Channel> channels;
  std::vector<std::string> names;
  for (std::size_t j = 0; j < basis.size(); ++j) {
    channels.push_back({std::norm(inner_product(cfg.psi, basis[j])), epsilon});
    names.push_back("e" + std::to_string(j));
  }
  auto results = run_replicas(channels, cfg.process, cfg.duration, cfg.replicas,
                              options.threads);
  return aggregate(std::move(results), channels, std::move(names), cfg,
                   options.keep_clicks);
}

EpsilonScanReport epsilon_invariance_scan(const ExperimentConfig& cfg,
                                          std::span<const double> epsilons,
                                          const RunOptions& options) {
  if (epsilons.size() < 2) throw Error("epsilon scan: need at least two epsilon values");
  const auto [lo, hi] = std::minmax_element(epsilons.begin(), epsilons.end());
  if (!(*lo > 0)) throw Error("epsilon scan: epsilon values must be > 0");
  if (*hi / *lo < 10.0 * (1.0 - 1e-12)) {
    throw Error("epsilon scan: epsilon values must span at least one decade");
  }

  EpsilonScanReport report;
  for (const double eps : epsilons) {
    auto run = run_detection(with_threshold(cfg, ThresholdEnergy{eps}), options);
    if (run.total_clicks == 0) throw Error("run too short");
    report.runs.push_back({eps, std::move(run)});
  }

  const std::size_t detectors = cfg.detectors.size();
  for (std::size_t i = 0; i < detectors; ++i) {
    report.oracle.push_back(report.runs.front().stats.detectors[i].oracle_probability);
  }

  report.within_oracle_band = true;
  report.within_pairwise_band = true;
  for (std::size_t i = 0; i < detectors; ++i) {
    std::vector<double> xs;
    std::vector<double> ys;
    double lo_product = std::numeric_limits<double>::infinity();
    double hi_product = 0;
    for (std::size_t a = 0; a < report.runs.size(); ++a) {
      const auto& da = report.runs[a].stats.detectors[i];
      const double dev = std::abs(da.probability - report.oracle[i]);
      report.max_oracle_deviation = std::max(report.max_oracle_deviation, dev);
      if (dev > 3.0 * da.binomial_stderr) report.within_oracle_band = false;
      for (std::size_t b = a + 1; b < report.runs.size(); ++b) {
        const auto& db = report.runs[b].stats.detectors[i];
        const double pair = std::abs(da.probability - db.probability);
        report.max_pairwise_deviation = std::max(report.max_pairwise_deviation, pair);
        if (pair > 3.0 * std::hypot(da.binomial_stderr, db.binomial_stderr)) {
          report.within_pairwise_band = false;
        }
      }
      if (da.count > 0) {
        xs.push_back(report.runs[a].epsilon);
        ys.push_back(da.frequency);
        const double product = da.frequency * report.runs[a].epsilon;
        lo_product = std::min(lo_product, product);
        hi_product = std::max(hi_product, product);
      }
    }
    report.slopes.push_back(xs.size() >= 2 ? loglog_slope(xs, ys)
                                           : std::numeric_limits<double>::quiet_NaN());
    if (hi_product > 0) {
      report.max_lambda_epsilon_spread =
          std::max(report.max_lambda_epsilon_spread, hi_product / lo_product - 1.0);
    }
  }
  return report;
}

CoincidenceScanReport coincidence_scan(const ExperimentConfig& cfg,
                                       std::span<const double> constants,
                                       std::span<const double> windows,
                                       const RunOptions& options) {
  if (constants.empty() || windows.empty()) {
    throw Error("coincidence scan: need at least one C and one window");
  }
  for (const double w : windows) {
    if (!(w >= cfg.process.dt)) throw Error("coincidence scan: windows must be >= dt");
  }
  std::vector<double> sorted_constants(constants.begin(), constants.end());
  std::sort(sorted_constants.begin(), sorted_constants.end());

  CoincidenceScanReport report;
  report.within_envelope = true;
  report.non_increasing = true;
  std::vector<std::size_t> previous(windows.size(), std::numeric_limits<std::size_t>::max());
  RunOptions keep = options;
  keep.keep_clicks = true;
  for (const double c : sorted_constants) {
    const auto run = run_detection(with_threshold(cfg, Calibration{c}), keep);
    const double bound = static_cast<double>(cfg.replicas) *
                         double_click_bound(cfg.duration, c, cfg.process.gamma);
    for (std::size_t wi = 0; wi < windows.size(); ++wi) {
      CoincidenceRow row;
      row.constant = c;
      row.window = windows[wi];
      row.double_clicks = count_coincidences(run.clicks, windows[wi]);
      row.bound = bound;
      row.total_clicks = run.total_clicks;
      if (static_cast<double>(row.double_clicks) > kDoubleClickEnvelope * bound) {
        report.within_envelope = false;
      }
      if (row.double_clicks > previous[wi]) report.non_increasing = false;
      previous[wi] = row.double_clicks;
      report.rows.push_back(row);
    }
  }
  return report;
}

}  // namespace fieldclick
