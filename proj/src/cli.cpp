#include "fieldclick/cli.hpp"

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "fieldclick/presets.hpp"
#include "fieldclick/report_io.hpp"
#include "fieldclick/scenario.hpp"

#ifndef FIELDCLICK_VERSION
#define FIELDCLICK_VERSION "unknown"
#endif

namespace fieldclick {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using io::format_number;

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "fieldclick-out";
  std::string format = "both";
  std::size_t threads = 1;
  std::string preset;
  bool clicks = false;
};

class Outputs {
 public:
  Outputs(const Options& opts, std::string command, const Scenario& scenario)
      : dir_(opts.out_dir), format_(opts.format) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_)) {
      throw Error("cannot create output directory '" + dir_.string() + "'");
    }
    manifest_ = {{"version", version()},
                 {"command", std::move(command)},
                 {"seed", scenario.config.process.seed},
                 {"threads", opts.threads},
                 {"config", to_json(scenario)}};
  }

  bool json_enabled() const { return format_ != "csv"; }
  bool csv_enabled() const { return format_ != "json"; }

  void write_json(const std::string& name, const std::string& key, json body) {
    if (!json_enabled()) return;
    json doc = manifest_;
    doc[key] = std::move(body);
    open(name) << doc.dump(2) << '\n';
  }

  void write_csv(const std::string& name, const std::function<void(std::ostream&)>& fill) {
    if (!csv_enabled()) return;
    auto stream = open(name);
    fill(stream);
  }

  void write_always(const std::string& name, const std::function<void(std::ostream&)>& fill) {
    auto stream = open(name);
    fill(stream);
  }

 private:
  std::ofstream open(const std::string& name) {
    std::ofstream stream(dir_ / name);
    if (!stream) throw Error("cannot write '" + (dir_ / name).string() + "'");
    return stream;
  }

  fs::path dir_;
  std::string format_;
  json manifest_;
};

Scenario load(const Options& opts) {
  if (opts.config.empty() && opts.preset.empty()) {
    throw Error("need --config PATH or --preset NAME");
  }
  Scenario s = opts.config.empty() ? preset_scenario(opts.preset) : parse_scenario(opts.config);
  if (!opts.config.empty() && !opts.preset.empty()) {
    if (!is_preset(opts.preset)) throw Error("unknown preset '" + opts.preset + "'");
    apply_preset(s, opts.preset);
  }
  if (opts.seed) s.config.process.seed = *opts.seed;
  return s;
}

void echo_resolved(std::ostream& out, const Scenario& s) {
  const auto& c = s.config;
  out << "resolved: tau_pq="
      << (c.process.is_frozen() ? std::string("inf") : format_number(c.process.tau_pq))
      << " s dt=" << format_number(c.process.dt) << " s gamma=" << format_number(c.process.gamma)
      << " s w=" << format_number(c.coincidence_window) << " s T=" << format_number(c.duration)
      << " s replicas=" << c.replicas << " seed=" << c.process.seed << '\n';
}

void print_detectors(std::ostream& out, const RunStatistics& stats) {
  for (const auto& d : stats.detectors) {
    out << d.name << ": clicks=" << d.count << " lambda=" << format_number(d.frequency)
        << " (analytic " << format_number(d.analytic_frequency) << ") P="
        << format_number(d.probability) << " +- " << format_number(d.binomial_stderr)
        << " (oracle " << format_number(d.oracle_probability) << ")\n";
  }
}

int cmd_run(const Options& opts, std::ostream& out) {
  const auto s = load(opts);
  echo_resolved(out, s);
  Outputs files(opts, "run", s);
  const auto stats = run_detection(s.config, {opts.threads, opts.clicks});
  files.write_json("run.json", "statistics", io::to_json(stats));
  files.write_csv("run.csv", [&](std::ostream& o) { io::write_run_csv(o, stats); });
  if (opts.clicks) {
    for (std::size_t r = 0; r < stats.replicas; ++r) {
      std::ostringstream name;
      name << "clicks_r" << std::setw(3) << std::setfill('0') << r << ".csv";
      files.write_always(name.str(), [&](std::ostream& o) { io::write_clicks_csv(o, stats.clicks, r); });
    }
  }
  print_detectors(out, stats);
  out << "total clicks=" << stats.total_clicks << " double clicks=" << stats.double_clicks
      << " (w=" << format_number(stats.coincidence_window) << " s)\n";
  return 0;
}

int cmd_scan_epsilon(const Options& opts, std::ostream& out) {
  const auto s = load(opts);
  echo_resolved(out, s);
  Outputs files(opts, "scan-epsilon", s);
  const auto report = epsilon_invariance_scan(s.config, s.scan.epsilons, {opts.threads, false});
  files.write_json("scan_epsilon.json", "scan", io::to_json(report));
  files.write_csv("scan_epsilon.csv", [&](std::ostream& o) { io::write_epsilon_scan_csv(o, report); });
  for (std::size_t i = 0; i < report.oracle.size(); ++i) {
    out << report.runs.front().stats.detectors[i].name << ": P =";
    for (const auto& r : report.runs) out << ' ' << format_number(r.stats.detectors[i].probability);
    out << " (oracle " << format_number(report.oracle[i]) << ") lambda-epsilon slope "
        << format_number(report.slopes[i]) << '\n';
  }
  out << "max |P - oracle| = " << format_number(report.max_oracle_deviation)
      << (report.within_oracle_band ? " (within 3 sigma)" : " (OUTSIDE 3 sigma)") << '\n';
  return 0;
}

int cmd_scan_coincidence(const Options& opts, std::ostream& out) {
  const auto s = load(opts);
  echo_resolved(out, s);
  Outputs files(opts, "scan-coincidence", s);
  const auto report = coincidence_scan(s.config, s.scan.constants, s.scan.windows, {opts.threads, true});
  files.write_json("scan_coincidence.json", "scan", io::to_json(report));
  files.write_csv("scan_coincidence.csv", [&](std::ostream& o) { io::write_coincidence_csv(o, report); });
  for (const auto& r : report.rows) {
    out << "C=" << format_number(r.constant) << " w=" << format_number(r.window)
        << " n_double=" << r.double_clicks << " bound=" << format_number(r.bound) << '\n';
  }
  return 0;
}

int cmd_ergodicity(const Options& opts, std::ostream& out) {
  const auto s = load(opts);
  echo_resolved(out, s);
  Outputs files(opts, "ergodicity", s);
  const auto f = Functional::position_density(s.ergodicity.cell);
  const auto report = ergodicity_report(f, s.config.psi, s.config.process, s.ergodicity.window,
                                        s.ergodicity.samples);
  json body = io::to_json(report);
  std::optional<DecaySweep> sweep;
  if (!s.config.process.is_frozen()) {
    sweep = time_average_decay(f, s.config.psi, s.config.process, s.ergodicity.sweep_windows,
                               s.ergodicity.sweep_replicas);
    body["decay"] = io::to_json(*sweep);
  }
  files.write_json("ergodicity.json", "ergodicity", body);
  files.write_csv("ergodicity.csv", [&](std::ostream& o) { io::write_ergodicity_csv(o, report); });
  if (sweep) {
    files.write_csv("ergodicity_decay.csv", [&](std::ostream& o) { io::write_decay_csv(o, *sweep); });
  }
  out << report.functional << ": time average " << format_number(report.time.value) << " +- "
      << format_number(report.time.std_error) << ", ensemble average "
      << format_number(report.ensemble.value) << " +- " << format_number(report.ensemble.std_error)
      << (report.consistent ? " (consistent)" : " (INCONSISTENT)")
      << (report.converged ? "" : " (window too short: not converged)") << '\n';
  if (sweep) out << "time-average error slope vs Delta: " << format_number(sweep->slope) << '\n';
  return 0;
}

int cmd_basis(const Options& opts, std::ostream& out) {
  const auto s = load(opts);
  echo_resolved(out, s);
  Outputs files(opts, "basis", s);
  const auto stats = run_basis_measurement(s.config, s.basis, {opts.threads, opts.clicks});
  files.write_json("basis.json", "statistics", io::to_json(stats));
  files.write_csv("basis.csv", [&](std::ostream& o) { io::write_basis_csv(o, stats); });
  print_detectors(out, stats);
  return 0;
}

int cmd_presets(std::ostream& out) {
  for (const auto& p : list_presets()) out << p.name << ": " << p.description << '\n';
  return 0;
}

}  // namespace

const char* version() { return FIELDCLICK_VERSION; }

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Threshold-detector click statistics for rank-one random signals", "fieldclick"};
  app.set_version_flag("--version", std::string(version()));
  app.require_subcommand(1);
  app.fallthrough();

  Options opts;
  app.add_option("--config", opts.config, "Scenario file (JSON)");
  app.add_option("--seed", opts.seed, "RNG seed (overrides run.seed)");
  app.add_option("--out", opts.out_dir, "Output directory")->capture_default_str();
  app.add_option("--format", opts.format, "Output format")
      ->check(CLI::IsMember({"json", "csv", "both"}))
      ->capture_default_str();
  app.add_option("--threads", opts.threads, "Worker threads for replicas")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--preset", opts.preset, "Signal preset (two_peak, gaussian_packet, uniform)");
  app.add_flag("--clicks", opts.clicks, "Also write per-replica click logs");

  std::function<int()> action;
  auto sub = [&](const char* name, const char* help, std::function<int()> fn) {
    app.add_subcommand(name, help)->callback([&action, fn] { action = fn; });
  };
  sub("run", "Run a detection experiment", [&] { return cmd_run(opts, out); });
  sub("scan-epsilon", "Scan the click threshold", [&] { return cmd_scan_epsilon(opts, out); });
  sub("scan-coincidence", "Count double clicks across calibration constants",
      [&] { return cmd_scan_coincidence(opts, out); });
  sub("ergodicity", "Compare time and ensemble averages", [&] { return cmd_ergodicity(opts, out); });
  sub("basis", "Measure in a general orthonormal basis", [&] { return cmd_basis(opts, out); });
  sub("presets", "List signal presets", [&] { return cmd_presets(out); });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    return action ? action() : 2;
  } catch (const std::exception& e) {
    err << "fieldclick: error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace fieldclick
