#include "fieldclick/report_io.hpp"

#include <array>
#include <charconv>
#include <cmath>

namespace fieldclick::io {

using nlohmann::json;

namespace {

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), end);
}

json to_json(const RunStatistics& stats) {
  json detectors = json::array();
  for (std::size_t i = 0; i < stats.detectors.size(); ++i) {
    const auto& d = stats.detectors[i];
    detectors.push_back({
        {"id", i},
        {"name", d.name},
        {"epsilon", d.epsilon},
        {"weight", d.weight},
        {"count", d.count},
        {"lambda", d.frequency},
        {"lambda_stderr", number_or_null(d.frequency_stderr)},
        {"lambda_analytic", d.analytic_frequency},
        {"P", number_or_null(d.probability)},
        {"P_stderr", number_or_null(d.probability_stderr)},
        {"P_binomial_stderr", number_or_null(d.binomial_stderr)},
        {"P_oracle", d.oracle_probability},
        {"replica_counts", d.replica_counts},
    });
  }
  return {
      {"detectors", detectors},
      {"total_clicks", stats.total_clicks},
      {"double_clicks", stats.double_clicks},
      {"replica_double_clicks", stats.replica_double_clicks},
      {"coincidence_window", stats.coincidence_window},
      {"T", stats.duration},
      {"gamma", stats.gamma},
      {"replicas", stats.replicas},
  };
}

json to_json(const EpsilonScanReport& report) {
  json runs = json::array();
  for (const auto& r : report.runs) runs.push_back({{"epsilon", r.epsilon}, {"statistics", to_json(r.stats)}});
  json slopes = json::array();
  for (const double s : report.slopes) slopes.push_back(number_or_null(s));
  return {
      {"runs", runs},
      {"P_oracle", report.oracle},
      {"max_pairwise_deviation", report.max_pairwise_deviation},
      {"max_oracle_deviation", report.max_oracle_deviation},
      {"within_oracle_band", report.within_oracle_band},
      {"within_pairwise_band", report.within_pairwise_band},
      {"lambda_epsilon_slopes", slopes},
      {"max_lambda_epsilon_spread", report.max_lambda_epsilon_spread},
  };
}

json to_json(const CoincidenceScanReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"C", r.constant},
                    {"w", r.window},
                    {"n_double", r.double_clicks},
                    {"bound_T_over_2C", r.bound},
                    {"total_clicks", r.total_clicks}});
  }
  return {{"rows", rows},
          {"within_envelope", report.within_envelope},
          {"envelope_factor", kDoubleClickEnvelope},
          {"non_increasing", report.non_increasing}};
}

json to_json(const ErgodicityReport& r) {
  return {
      {"functional", r.functional},
      {"time_average", {{"value", r.time.value}, {"stderr", r.time.std_error}, {"steps", r.time.steps}, {"Delta", r.time.window}}},
      {"ensemble_average", {{"value", r.ensemble.value}, {"stderr", r.ensemble.std_error}, {"n", r.ensemble.count}}},
      {"difference", r.difference},
      {"combined_error", r.combined_error},
      {"window_ratio", r.window_ratio},
      {"converged", r.converged},
      {"consistent", r.consistent},
  };
}

json to_json(const DecaySweep& sweep) {
  json points = json::array();
  for (const auto& p : sweep.points) {
    points.push_back({{"Delta", p.window}, {"rms_error", p.rms_error}, {"predicted", p.predicted}});
  }
  return {{"points", points}, {"slope", sweep.slope}};
}

void write_run_csv(std::ostream& out, const RunStatistics& stats) {
  out << "epsilon,replica_id,detector_id,name,count,lambda,P,P_oracle\n";
  for (std::size_t r = 0; r < stats.replicas; ++r) {
    std::size_t replica_total = 0;
    for (const auto& d : stats.detectors) replica_total += d.replica_counts[r];
    for (std::size_t i = 0; i < stats.detectors.size(); ++i) {
      const auto& d = stats.detectors[i];
      const double c = static_cast<double>(d.replica_counts[r]);
      const double p = replica_total > 0 ? c / static_cast<double>(replica_total) : std::nan("");
      out << format_number(d.epsilon) << ',' << r << ',' << i << ',' << d.name << ','
          << d.replica_counts[r] << ',' << format_number(stats.gamma * c / stats.duration) << ','
          << format_number(p) << ',' << format_number(d.oracle_probability) << '\n';
    }
  }
}

void write_clicks_csv(std::ostream& out, std::span<const ClickRecord> clicks,
                      std::size_t replica) {
  out << "detector_id,click_time_s\n";
  for (const auto& c : clicks) {
    if (c.replica_id == replica) out << c.detector_id << ',' << format_number(c.time) << '\n';
  }
}

void write_epsilon_scan_csv(std::ostream& out, const EpsilonScanReport& report) {
  out << "epsilon,detector_id,P,P_oracle,lambda,stderr\n";
  for (const auto& run : report.runs) {
    for (std::size_t i = 0; i < run.stats.detectors.size(); ++i) {
      const auto& d = run.stats.detectors[i];
      out << format_number(run.epsilon) << ',' << i << ',' << format_number(d.probability) << ','
          << format_number(d.oracle_probability) << ',' << format_number(d.frequency) << ','
          << format_number(d.binomial_stderr) << '\n';
    }
  }
}

void write_coincidence_csv(std::ostream& out, const CoincidenceScanReport& report) {
  out << "C,w,n_double,bound_T_over_2C\n";
  for (const auto& r : report.rows) {
    out << format_number(r.constant) << ',' << format_number(r.window) << ',' << r.double_clicks
        << ',' << format_number(r.bound) << '\n';
  }
}

void write_ergodicity_csv(std::ostream& out, const ErgodicityReport& r) {
  out << "functional,Delta_s,n,time_average,time_stderr,ensemble_average,ensemble_stderr,"
         "difference,combined_error,converged,consistent\n";
  out << r.functional << ',' << format_number(r.time.window) << ',' << r.ensemble.count << ','
      << format_number(r.time.value) << ',' << format_number(r.time.std_error) << ','
      << format_number(r.ensemble.value) << ',' << format_number(r.ensemble.std_error) << ','
      << format_number(r.difference) << ',' << format_number(r.combined_error) << ','
      << (r.converged ? "true" : "false") << ',' << (r.consistent ? "true" : "false") << '\n';
}

void write_decay_csv(std::ostream& out, const DecaySweep& sweep) {
  out << "Delta_s,rms_error,predicted\n";
  for (const auto& p : sweep.points) {
    out << format_number(p.window) << ',' << format_number(p.rms_error) << ','
        << format_number(p.predicted) << '\n';
  }
}

void write_basis_csv(std::ostream& out, const RunStatistics& stats) {
  out << "basis_id,name,count,lambda,P,P_oracle,stderr\n";
  for (std::size_t j = 0; j < stats.detectors.size(); ++j) {
    const auto& d = stats.detectors[j];
    out << j << ',' << d.name << ',' << d.count << ',' << format_number(d.frequency) << ','
        << format_number(d.probability) << ',' << format_number(d.oracle_probability) << ','
        << format_number(d.binomial_stderr) << '\n';
  }
}

}  // namespace fieldclick::io
