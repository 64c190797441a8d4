#include "fieldclick/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "fieldclick/presets.hpp"

namespace fieldclick {

namespace {

using nlohmann::json;

struct Context {
  std::string source;
  std::string_view text;
  std::filesystem::path base_dir;
};

std::size_t line_of_key(std::string_view text, const std::string& field) {
  const auto dot = field.find_last_of('.');
  std::string key = dot == std::string::npos ? field : field.substr(dot + 1);
  if (const auto bracket = key.find('['); bracket != std::string::npos) {
    key = key.substr(0, bracket);
  }
  const auto pos = text.find("\"" + key + "\"");
  if (pos == std::string_view::npos) return 0;
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

[[noreturn]] void fail(const Context& ctx, const std::string& field, const std::string& what) {
  std::string where = ctx.source;
  if (const auto line = line_of_key(ctx.text, field); line > 0) {
    where += ":" + std::to_string(line);
  }
  throw Error(where + ": field '" + field + "': " + what);
}

void check_keys(const Context& ctx, const json& obj, const std::string& field,
                std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(ctx, field, "expected an object");
  const std::set<std::string> known(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items()) {
    if (!known.contains(key)) {
      fail(ctx, field.empty() ? key : field + "." + key, "unknown field");
    }
  }
}

std::string join(const std::string& parent, const std::string& key) {
  return parent.empty() ? key : parent + "." + key;
}

double number(const Context& ctx, const json& v, const std::string& field) {
  if (!v.is_number()) fail(ctx, field, "expected a number");
  return v.get<double>();
}

double positive(const Context& ctx, const json& v, const std::string& field) {
  const double x = number(ctx, v, field);
  if (!(x > 0) || !std::isfinite(x)) fail(ctx, field, "must be finite and > 0");
  return x;
}

std::size_t count(const Context& ctx, const json& v, const std::string& field) {
  if (!v.is_number_unsigned()) fail(ctx, field, "expected a non-negative integer");
  return v.get<std::size_t>();
}

double time_value(const Context& ctx, const json& v, const std::string& field) {
  try {
    const double t = parse_time(v);
    if (!(t > 0) || !std::isfinite(t)) fail(ctx, field, "must be finite and > 0");
    return t;
  } catch (const Error& e) {
    fail(ctx, field, e.what());
  }
}

std::vector<double> time_list(const Context& ctx, const json& v, const std::string& field) {
  if (!v.is_array()) fail(ctx, field, "expected a list");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(time_value(ctx, v[i], field + "[" + std::to_string(i) + "]"));
  }
  return out;
}

std::vector<double> positive_list(const Context& ctx, const json& v, const std::string& field) {
  if (!v.is_array()) fail(ctx, field, "expected a list");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(positive(ctx, v[i], field + "[" + std::to_string(i) + "]"));
  }
  return out;
}

Complex complex_value(const Context& ctx, const json& v, const std::string& field) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
    return {v[0].get<double>(), v[1].get<double>()};
  }
  fail(ctx, field, "expected a number or [re, im]");
}

FieldState::Amplitudes amplitude_list(const Context& ctx, const json& v,
                                      const std::string& field) {
  if (!v.is_array()) fail(ctx, field, "expected a list of amplitudes");
  FieldState::Amplitudes a(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    a(static_cast<Eigen::Index>(i)) =
        complex_value(ctx, v[i], field + "[" + std::to_string(i) + "]");
  }
  return a;
}

template <typename Fn>
auto guarded(const Context& ctx, const std::string& field, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    fail(ctx, field, e.what());
  }
}

GridPtr parse_grid(const Context& ctx, const json& g) {
  check_keys(ctx, g, "grid", {"dim", "lower", "upper", "cells", "points", "cell_volume"});
  GridPtr grid;
  if (g.contains("points")) {
    if (g.contains("cells") || g.contains("lower") || g.contains("upper")) {
      fail(ctx, "grid.points", "give either points + cell_volume or lower/upper/cells");
    }
    if (!g.contains("cell_volume")) fail(ctx, "grid.cell_volume", "missing");
    const auto& pts = g["points"];
    if (!pts.is_array() || pts.empty()) fail(ctx, "grid.points", "expected a non-empty list");
    const std::size_t dim = pts[0].is_array() ? pts[0].size() : 1;
    Grid::Coordinates coords(static_cast<Eigen::Index>(pts.size()),
                             static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const std::string f = "grid.points[" + std::to_string(i) + "]";
      const json row = pts[i].is_array() ? pts[i] : json::array({pts[i]});
      if (row.size() != dim) fail(ctx, f, "inconsistent dimension");
      for (std::size_t a = 0; a < dim; ++a) {
        coords(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a)) =
            number(ctx, row[a], f);
      }
    }
    const double dv = positive(ctx, g["cell_volume"], "grid.cell_volume");
    grid = guarded(ctx, "grid", [&] { return std::make_shared<const Grid>(coords, dv); });
  } else {
    for (const char* key : {"lower", "upper", "cells"}) {
      if (!g.contains(key)) fail(ctx, join("grid", key), "missing");
    }
    auto reals = [&](const char* key) {
      std::vector<double> out;
      const auto& v = g[key];
      if (!v.is_array()) fail(ctx, join("grid", key), "expected a list");
      for (const auto& x : v) out.push_back(number(ctx, x, join("grid", key)));
      return out;
    };
    const auto lower = reals("lower");
    const auto upper = reals("upper");
    std::vector<std::size_t> cells;
    if (!g["cells"].is_array()) fail(ctx, "grid.cells", "expected a list");
    for (const auto& c : g["cells"]) cells.push_back(count(ctx, c, "grid.cells"));
    grid = guarded(ctx, "grid", [&] {
      return Grid::uniform(std::span<const double>(lower), std::span<const double>(upper),
                           std::span<const std::size_t>(cells));
    });
    if (g.contains("cell_volume")) {
      const double dv = positive(ctx, g["cell_volume"], "grid.cell_volume");
      if (std::abs(dv - grid->cell_volume()) > 1e-12 * grid->cell_volume()) {
        fail(ctx, "grid.cell_volume", "inconsistent with lower/upper/cells (derived " +
                                          std::to_string(grid->cell_volume()) + ")");
      }
    }
  }
  if (g.contains("dim")) {
    const auto dim = count(ctx, g["dim"], "grid.dim");
    if (dim != static_cast<std::size_t>(grid->dim())) {
      fail(ctx, "grid.dim", "inconsistent with coordinates (" + std::to_string(grid->dim()) + ")");
    }
  }
  return grid;
}

std::optional<ThresholdSpec> parse_threshold_fields(const Context& ctx, const json& obj,
                                                    const std::string& field) {
  const bool has_eps = obj.contains("epsilon");
  const bool has_c = obj.contains("C");
  if (has_eps && has_c) fail(ctx, field, "give either epsilon or C, not both");
  if (has_eps) return ThresholdEnergy{positive(ctx, obj["epsilon"], join(field, "epsilon"))};
  if (has_c) return Calibration{positive(ctx, obj["C"], join(field, "C"))};
  return std::nullopt;
}

std::vector<std::size_t> parse_region(const Context& ctx, const json& d, const std::string& field) {
  const bool has_cells = d.contains("cells");
  const bool has_range = d.contains("range");
  if (has_cells == has_range) fail(ctx, field, "give exactly one of cells or range");
  std::vector<std::size_t> region;
  if (has_cells) {
    if (!d["cells"].is_array()) fail(ctx, join(field, "cells"), "expected a list");
    for (const auto& c : d["cells"]) region.push_back(count(ctx, c, join(field, "cells")));
  } else {
    const auto& r = d["range"];
    if (!r.is_array() || r.size() != 2) fail(ctx, join(field, "range"), "expected [begin, end)");
    const auto begin = count(ctx, r[0], join(field, "range"));
    const auto end = count(ctx, r[1], join(field, "range"));
    if (end <= begin) fail(ctx, join(field, "range"), "end must exceed begin");
    for (auto i = begin; i < end; ++i) region.push_back(i);
  }
  return region;
}

std::vector<FieldState> parse_basis(const Context& ctx, const json& b, const GridPtr& grid,
                                    std::string& kind) {
  if (b.is_string()) {
    kind = b.get<std::string>();
    if (kind == "fourier") return fourier_basis(grid);
    if (kind == "delta") return delta_basis(grid);
    fail(ctx, "basis", "unknown basis '" + kind + "' (fourier, delta or {\"vectors\": ...})");
  }
  check_keys(ctx, b, "basis", {"vectors"});
  if (!b.contains("vectors") || !b["vectors"].is_array() || b["vectors"].empty()) {
    fail(ctx, "basis.vectors", "expected a non-empty list of amplitude lists");
  }
  kind = "vectors";
  std::vector<FieldState> out;
  for (std::size_t j = 0; j < b["vectors"].size(); ++j) {
    const std::string f = "basis.vectors[" + std::to_string(j) + "]";
    auto a = amplitude_list(ctx, b["vectors"][j], f);
    out.push_back(guarded(ctx, f, [&] { return FieldState(grid, std::move(a)); }));
  }
  guarded(ctx, "basis.vectors", [&] {
    check_orthonormal(out);
    return 0;
  });
  return out;
}

std::size_t brightest_cell(const FieldState& psi) {
  Eigen::Index best = 0;
  psi.amplitudes().cwiseAbs2().maxCoeff(&best);
  return static_cast<std::size_t>(best);
}

void fill_scan_defaults(Scenario& s) {
  const auto& cfg = s.config;
  if (s.scan.epsilons.empty()) {
    const double base = resolve_threshold(cfg.threshold, cfg.psi);
    s.scan.epsilons = {base, base * std::sqrt(10.0), base * 10.0};
  }
  if (s.scan.constants.empty()) s.scan.constants = {1.0, 5.0, 25.0};
  if (s.scan.windows.empty()) {
    const double w = cfg.coincidence_window;
    s.scan.windows = {std::max(cfg.process.dt, 0.5 * w), w, 2.0 * w};
  }
}

void fill_ergodicity_defaults(Scenario& s, bool has_window, bool has_cell, bool has_sweep) {
  auto& e = s.ergodicity;
  const double tau = s.config.process.tau_pq;
  if (!has_cell) e.cell = brightest_cell(s.config.psi);
  if (!has_window) e.window = s.config.process.is_frozen() ? s.config.duration : 1e4 * tau;
  if (!has_sweep) {
    e.sweep_windows.clear();
    for (int k = 0; k <= 4; ++k) e.sweep_windows.push_back(e.window * std::pow(10.0, -1.0 + 0.25 * k));
  }
}

}  // namespace

double parse_time(const json& value) {
  if (value.is_number()) return value.get<double>();
  if (!value.is_string()) throw Error("expected seconds or a \"<value> <unit>\" string");
  std::istringstream in(value.get<std::string>());
  double magnitude = 0;
  std::string unit;
  if (!(in >> magnitude)) throw Error("cannot read a number from '" + value.get<std::string>() + "'");
  in >> unit;
  std::string extra;
  if (in >> extra) throw Error("trailing text in '" + value.get<std::string>() + "'");
  // Sub-second units divide so that "100 us" lands on the double nearest 1e-4.
  static const std::map<std::string, std::pair<double, double>> units{
      {"", {1.0, 1.0}},    {"s", {1.0, 1.0}},   {"ms", {1.0, 1e3}},
      {"us", {1.0, 1e6}},  {"\xC2\xB5s", {1.0, 1e6}}, {"ns", {1.0, 1e9}},
      {"min", {60.0, 1.0}}, {"h", {3600.0, 1.0}}};
  const auto it = units.find(unit);
  if (it == units.end()) {
    throw Error("inconsistent units: '" + unit + "' is not a time unit");
  }
  return magnitude * it->second.first / it->second.second;
}

FieldState parse_field_state(const json& doc, const std::string& source) {
  const Context ctx{source, {}, {}};
  check_keys(ctx, doc, "", {"cell_volume", "records", "dim"});
  if (!doc.contains("cell_volume")) fail(ctx, "cell_volume", "missing");
  if (!doc.contains("records") || !doc["records"].is_array() || doc["records"].empty()) {
    fail(ctx, "records", "expected a non-empty list");
  }
  const auto& records = doc["records"];
  const auto& first_x = records[0].contains("x") ? records[0]["x"] : json();
  const std::size_t dim = first_x.is_array() ? first_x.size() : 1;
  if (doc.contains("dim") && count(ctx, doc["dim"], "dim") != dim) {
    fail(ctx, "dim", "inconsistent with record coordinates");
  }
  Grid::Coordinates coords(static_cast<Eigen::Index>(records.size()),
                           static_cast<Eigen::Index>(dim));
  FieldState::Amplitudes amps(static_cast<Eigen::Index>(records.size()));
  for (std::size_t i = 0; i < records.size(); ++i) {
    const std::string f = "records[" + std::to_string(i) + "]";
    const auto& r = records[i];
    check_keys(ctx, r, f, {"x", "re", "im"});
    if (!r.contains("x") || !r.contains("re")) fail(ctx, f, "needs x and re");
    const json x = r["x"].is_array() ? r["x"] : json::array({r["x"]});
    if (x.size() != dim) fail(ctx, join(f, "x"), "inconsistent dimension");
    for (std::size_t a = 0; a < dim; ++a) {
      coords(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a)) =
          number(ctx, x[a], join(f, "x"));
    }
    const double im = r.contains("im") ? number(ctx, r["im"], join(f, "im")) : 0.0;
    amps(static_cast<Eigen::Index>(i)) = Complex(number(ctx, r["re"], join(f, "re")), im);
  }
  const double dv = positive(ctx, doc["cell_volume"], "cell_volume");
  auto grid = guarded(ctx, "records", [&] { return std::make_shared<const Grid>(coords, dv); });
  return FieldState(grid, std::move(amps));
}

FieldState load_field_state(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(path.string() + ": cannot open field state file");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(path.string() + ": syntax error: " + e.what());
  }
  return parse_field_state(doc, path.string());
}

Scenario parse_scenario_text(std::string_view text, const std::string& source,
                             const std::filesystem::path& base_dir) {
  const Context ctx{source, text, base_dir};
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const auto upto = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
    const auto last_newline = text.rfind('\n', upto == 0 ? 0 : upto - 1);
    const auto column = last_newline == std::string_view::npos ? upto + 1 : upto - last_newline;
    throw Error(source + ":" + std::to_string(line) + ":" + std::to_string(column) +
                ": syntax error: " + e.what());
  }
  check_keys(ctx, doc, "", {"grid", "psi", "detectors", "threshold", "process", "run", "scan",
                            "basis", "ergodicity"});

  // Signal shape.
  if (!doc.contains("psi")) fail(ctx, "psi", "missing");
  const auto& psi_spec = doc["psi"];
  check_keys(ctx, psi_spec, "psi", {"preset", "amplitudes", "file"});
  if (psi_spec.size() != 1) fail(ctx, "psi", "give exactly one of preset, amplitudes or file");

  std::string preset;
  std::optional<FieldState> psi;
  GridPtr grid;
  if (psi_spec.contains("file")) {
    if (doc.contains("grid")) fail(ctx, "grid", "not allowed with psi.file (the file defines the grid)");
    if (!psi_spec["file"].is_string()) fail(ctx, "psi.file", "expected a path");
    std::filesystem::path p = psi_spec["file"].get<std::string>();
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    psi = guarded(ctx, "psi.file", [&] { return load_field_state(p); });
    grid = psi->grid();
  } else {
    if (doc.contains("grid")) {
      grid = parse_grid(ctx, doc["grid"]);
    } else if (psi_spec.contains("preset")) {
      grid = default_preset_grid();
    } else {
      fail(ctx, "grid", "missing");
    }
    if (psi_spec.contains("preset")) {
      if (!psi_spec["preset"].is_string()) fail(ctx, "psi.preset", "expected a name");
      preset = psi_spec["preset"].get<std::string>();
      if (!is_preset(preset)) fail(ctx, "psi.preset", "unknown preset '" + preset + "'");
      psi = guarded(ctx, "psi.preset", [&] { return make_preset(preset, grid); });
    } else {
      auto a = amplitude_list(ctx, psi_spec["amplitudes"], "psi.amplitudes");
      psi = guarded(ctx, "psi.amplitudes", [&] { return FieldState(grid, std::move(a)); });
    }
  }
  if (!(norm_squared(*psi) > 0)) fail(ctx, "psi", "degenerate field state");

  ExperimentConfig cfg{*psi};

  // Threshold.
  if (doc.contains("threshold")) {
    check_keys(ctx, doc["threshold"], "threshold", {"epsilon", "C"});
    auto t = parse_threshold_fields(ctx, doc["threshold"], "threshold");
    if (!t) fail(ctx, "threshold", "give epsilon or C");
    cfg.threshold = *t;
  }

  // Detectors.
  if (doc.contains("detectors")) {
    const auto& ds = doc["detectors"];
    if (!ds.is_array() || ds.empty()) fail(ctx, "detectors", "expected a non-empty list");
    for (std::size_t i = 0; i < ds.size(); ++i) {
      const std::string f = "detectors[" + std::to_string(i) + "]";
      check_keys(ctx, ds[i], f, {"name", "cells", "range", "epsilon", "C"});
      DetectorConfig d;
      if (ds[i].contains("name")) {
        if (!ds[i]["name"].is_string()) fail(ctx, join(f, "name"), "expected a string");
        d.name = ds[i]["name"].get<std::string>();
      }
      d.region = parse_region(ctx, ds[i], f);
      guarded(ctx, join(f, "cells"), [&] {
        detail::check_region(d.region, grid->size(), "detector region");
        return 0;
      });
      d.threshold = parse_threshold_fields(ctx, ds[i], f);
      cfg.detectors.push_back(std::move(d));
    }
    std::vector<bool> taken(grid->size(), false);
    for (const auto& d : cfg.detectors) {
      for (const auto c : d.region) {
        if (taken[c]) fail(ctx, "detectors", "regions must be disjoint");
        taken[c] = true;
      }
    }
  } else if (!preset.empty()) {
    cfg.detectors = preset_detectors(preset, grid);
  } else {
    fail(ctx, "detectors", "missing (required unless psi is a preset)");
  }

  // Process.
  bool frozen = false;
  if (doc.contains("process")) {
    const auto& p = doc["process"];
    check_keys(ctx, p, "process", {"tau_pq", "dt", "gamma", "frozen", "eta0"});
    if (p.contains("frozen")) {
      if (!p["frozen"].is_boolean()) fail(ctx, "process.frozen", "expected true or false");
      frozen = p["frozen"].get<bool>();
    }
    if (frozen && p.contains("tau_pq")) fail(ctx, "process.tau_pq", "not allowed for a frozen driver");
    if (p.contains("tau_pq")) cfg.process.tau_pq = time_value(ctx, p["tau_pq"], "process.tau_pq");
    cfg.process.dt = p.contains("dt") ? time_value(ctx, p["dt"], "process.dt")
                                      : cfg.process.tau_pq / 10.0;
    if (p.contains("gamma")) cfg.process.gamma = time_value(ctx, p["gamma"], "process.gamma");
    if (p.contains("eta0")) cfg.process.initial_eta = complex_value(ctx, p["eta0"], "process.eta0");
    if (frozen) {
      const auto eta0 = cfg.process.initial_eta.value_or(Complex(1.0, 0.0));
      cfg.process = ProcessParams::frozen(eta0, cfg.process.dt, cfg.process.gamma);
    }
  }
  if (cfg.process.dt > cfg.process.tau_pq / 10.0) {
    fail(ctx, "process.dt", "must be <= tau_pq / 10");
  }

  // Run.
  bool has_window = false;
  if (doc.contains("run")) {
    const auto& r = doc["run"];
    check_keys(ctx, r, "run", {"T", "replicas", "seed", "coincidence_window"});
    if (r.contains("T")) cfg.duration = time_value(ctx, r["T"], "run.T");
    if (r.contains("replicas")) {
      cfg.replicas = count(ctx, r["replicas"], "run.replicas");
      if (cfg.replicas < 1) fail(ctx, "run.replicas", "must be >= 1");
    }
    if (r.contains("seed")) {
      if (!r["seed"].is_number_unsigned()) fail(ctx, "run.seed", "expected an unsigned 64-bit integer");
      cfg.process.seed = r["seed"].get<std::uint64_t>();
    }
    if (r.contains("coincidence_window")) {
      cfg.coincidence_window = time_value(ctx, r["coincidence_window"], "run.coincidence_window");
      has_window = true;
    }
  }
  if (!has_window) cfg.coincidence_window = 10.0 * cfg.process.dt;

  guarded(ctx, "run", [&] {
    validate(cfg);
    return 0;
  });
  Scenario s(source, std::move(cfg));

  // Scans.
  if (doc.contains("scan")) {
    const auto& sc = doc["scan"];
    check_keys(ctx, sc, "scan", {"epsilon", "C", "w"});
    if (sc.contains("epsilon")) s.scan.epsilons = positive_list(ctx, sc["epsilon"], "scan.epsilon");
    if (sc.contains("C")) s.scan.constants = positive_list(ctx, sc["C"], "scan.C");
    if (sc.contains("w")) s.scan.windows = time_list(ctx, sc["w"], "scan.w");
    for (std::size_t i = 0; i < s.scan.windows.size(); ++i) {
      if (s.scan.windows[i] < s.config.process.dt) {
        fail(ctx, "scan.w", "windows must be >= dt");
      }
    }
  }
  fill_scan_defaults(s);

  // Basis.
  s.basis = doc.contains("basis") ? parse_basis(ctx, doc["basis"], grid, s.basis_kind)
                                  : fourier_basis(grid);
  if (!doc.contains("basis")) s.basis_kind = "fourier";

  // Ergodicity.
  bool has_delta = false;
  bool has_cell = false;
  bool has_sweep = false;
  if (doc.contains("ergodicity")) {
    const auto& e = doc["ergodicity"];
    check_keys(ctx, e, "ergodicity", {"cell", "Delta", "samples", "sweep", "sweep_replicas"});
    if (e.contains("cell")) {
      s.ergodicity.cell = count(ctx, e["cell"], "ergodicity.cell");
      if (s.ergodicity.cell >= grid->size()) fail(ctx, "ergodicity.cell", "out of range");
      has_cell = true;
    }
    if (e.contains("Delta")) {
      s.ergodicity.window = time_value(ctx, e["Delta"], "ergodicity.Delta");
      has_delta = true;
    }
    if (e.contains("samples")) {
      s.ergodicity.samples = count(ctx, e["samples"], "ergodicity.samples");
      if (s.ergodicity.samples < 1) fail(ctx, "ergodicity.samples", "must be >= 1");
    }
    if (e.contains("sweep")) {
      s.ergodicity.sweep_windows = time_list(ctx, e["sweep"], "ergodicity.sweep");
      if (s.ergodicity.sweep_windows.size() < 2) fail(ctx, "ergodicity.sweep", "need >= 2 windows");
      has_sweep = true;
    }
    if (e.contains("sweep_replicas")) {
      s.ergodicity.sweep_replicas = count(ctx, e["sweep_replicas"], "ergodicity.sweep_replicas");
      if (s.ergodicity.sweep_replicas < 2) fail(ctx, "ergodicity.sweep_replicas", "must be >= 2");
    }
  }
  fill_ergodicity_defaults(s, has_delta, has_cell, has_sweep);
  return s;
}

Scenario parse_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(path.string() + ": cannot open scenario file");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario_text(buffer.str(), path.string(), path.parent_path());
}

Scenario preset_scenario(std::string_view preset) {
  if (!is_preset(preset)) throw Error("unknown preset '" + std::string(preset) + "'");
  const json doc = {{"psi", {{"preset", std::string(preset)}}}};
  return parse_scenario_text(doc.dump(), "preset:" + std::string(preset));
}

void apply_preset(Scenario& scenario, std::string_view preset) {
  const auto grid = scenario.config.psi.grid();
  scenario.config.psi = make_preset(preset, grid);
  scenario.config.detectors = preset_detectors(preset, grid);
  validate(scenario.config);
  scenario.scan.epsilons.clear();
  fill_scan_defaults(scenario);
  scenario.ergodicity.cell = brightest_cell(scenario.config.psi);
}

json to_json(const Scenario& s) {
  const auto& cfg = s.config;
  const auto& grid = *cfg.psi.grid();
  json points = json::array();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    json row = json::array();
    for (int a = 0; a < grid.dim(); ++a) row.push_back(grid.point(i)(a));
    points.push_back(row);
  }
  json amps = json::array();
  for (std::size_t i = 0; i < cfg.psi.size(); ++i) {
    amps.push_back({cfg.psi[i].real(), cfg.psi[i].imag()});
  }
  auto threshold_json = [](const ThresholdSpec& t) {
    if (const auto* c = std::get_if<Calibration>(&t)) return json{{"C", c->constant}};
    return json{{"epsilon", std::get<ThresholdEnergy>(t).epsilon}};
  };
  const auto epsilons = detector_thresholds(cfg);
  json detectors = json::array();
  for (std::size_t i = 0; i < cfg.detectors.size(); ++i) {
    const auto& d = cfg.detectors[i];
    json j{{"name", d.name}, {"cells", d.region}, {"epsilon_resolved", epsilons[i]}};
    if (d.threshold) j["threshold"] = threshold_json(*d.threshold);
    detectors.push_back(j);
  }
  json process{{"tau_pq", cfg.process.is_frozen() ? json("inf") : json(cfg.process.tau_pq)},
               {"dt", cfg.process.dt},
               {"gamma", cfg.process.gamma},
               {"frozen", cfg.process.is_frozen()},
               {"seed", cfg.process.seed}};
  if (cfg.process.initial_eta) {
    process["eta0"] = {cfg.process.initial_eta->real(), cfg.process.initial_eta->imag()};
  }
  return json{
      {"source", s.source},
      {"grid", {{"dim", grid.dim()}, {"cell_volume", grid.cell_volume()}, {"points", points}}},
      {"psi", {{"amplitudes", amps}, {"norm_squared", norm_squared(cfg.psi)}}},
      {"threshold", threshold_json(cfg.threshold)},
      {"detectors", detectors},
      {"process", process},
      {"run",
       {{"T", cfg.duration},
        {"replicas", cfg.replicas},
        {"seed", cfg.process.seed},
        {"coincidence_window", cfg.coincidence_window}}},
      {"scan", {{"epsilon", s.scan.epsilons}, {"C", s.scan.constants}, {"w", s.scan.windows}}},
      {"basis", s.basis_kind},
      {"ergodicity",
       {{"cell", s.ergodicity.cell},
        {"Delta", s.ergodicity.window},
        {"samples", s.ergodicity.samples},
        {"sweep", s.ergodicity.sweep_windows},
        {"sweep_replicas", s.ergodicity.sweep_replicas}}},
  };
}

}  // namespace fieldclick
