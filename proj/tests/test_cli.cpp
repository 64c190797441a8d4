#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fieldclick/cli.hpp"

using namespace fieldclick;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kGolden = FIELDCLICK_GOLDEN_DIR;
const fs::path kScenarios = FIELDCLICK_SCENARIO_DIR;

struct Result {
  int status;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int status = run_command(args, out, err);
  return {status, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE_MESSAGE(in.good(), "cannot read " << p.string());
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string first_line(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

/// Compares against tests/golden/<name>; FIELDCLICK_UPDATE_GOLDEN=1 rewrites it.
void check_golden(const std::string& name, const std::string& actual) {
  const auto path = kGolden / name;
  if (std::getenv("FIELDCLICK_UPDATE_GOLDEN")) {
    std::ofstream(path) << actual;
    return;
  }
  CAPTURE(name);
  CHECK(slurp(path) == actual);
}

/// Output JSON without the fields that depend on the checkout location or build.
std::string stable_json(const fs::path& p) {
  auto doc = json::parse(slurp(p));
  doc["config"].erase("source");
  doc.erase("version");
  return doc.dump(2) + "\n";
}

class TempDir {
 public:
  explicit TempDir(const std::string& name) : path_(fs::temp_directory_path() / name) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }
  std::string operator/(const std::string& sub) const { return (path_ / sub).string(); }

 private:
  fs::path path_;
};

/// A short stochastic scenario: fast enough for every subcommand.
fs::path write_short_scenario(const TempDir& dir) {
  const auto p = dir.path() / "short.json";
  std::ofstream(p) << R"({
  "psi": {"preset": "two_peak"},
  "run": {"T": 1.0, "replicas": 2, "seed": 5},
  "scan": {"C": [0.01, 0.05, 0.25]},
  "ergodicity": {"Delta": 0.1, "samples": 1000, "sweep": [0.01, 0.1], "sweep_replicas": 4}
})";
  return p;
}

}  // namespace

TEST_CASE("frozen run matches the golden files") {
  TempDir dir("fieldclick_cli_golden");
  const auto r = run({"run", "--config", (kScenarios / "frozen.json").string(), "--out",
                      dir / "out", "--clicks"});
  REQUIRE(r.status == 0);
  CHECK(r.out.find("resolved: tau_pq=inf s dt=0.0009765625 s gamma=1 s") == 0);
  CHECK(r.out.find("left: clicks=10 lambda=0.5 (analytic 0.5)") != std::string::npos);
  CHECK(r.out.find("right: clicks=5 lambda=0.25") != std::string::npos);
  check_golden("frozen_run.csv", slurp(dir.path() / "out" / "run.csv"));
  check_golden("frozen_clicks_r000.csv", slurp(dir.path() / "out" / "clicks_r000.csv"));
  check_golden("frozen_run.json", stable_json(dir.path() / "out" / "run.json"));
}

TEST_CASE("every command writes its schema") {
  TempDir dir("fieldclick_cli_schema");
  const auto scenario = write_short_scenario(dir).string();
  const auto out = dir / "out";

  REQUIRE(run({"run", "--config", scenario, "--out", out, "--clicks"}).status == 0);
  REQUIRE(run({"scan-epsilon", "--config", scenario, "--out", out}).status == 0);
  REQUIRE(run({"scan-coincidence", "--config", scenario, "--out", out}).status == 0);
  REQUIRE(run({"ergodicity", "--config", scenario, "--out", out}).status == 0);
  REQUIRE(run({"basis", "--config", scenario, "--out", out}).status == 0);

  std::string headers;
  for (const char* name : {"run.csv", "clicks_r000.csv", "clicks_r001.csv", "scan_epsilon.csv",
                           "scan_coincidence.csv", "ergodicity.csv", "ergodicity_decay.csv",
                           "basis.csv"}) {
    headers += std::string(name) + ": " + first_line(dir.path() / "out" / name) + "\n";
  }
  check_golden("csv_headers.txt", headers);

  // Manifest and top-level keys of every JSON output.
  std::string keys;
  for (const char* name : {"run.json", "scan_epsilon.json", "scan_coincidence.json",
                           "ergodicity.json", "basis.json"}) {
    const auto doc = json::parse(slurp(dir.path() / "out" / name));
    CHECK(doc["version"] == version());
    CHECK(doc["seed"] == 5);
    CHECK(doc["threads"] == 1);
    CHECK(doc["config"]["run"]["T"] == 1.0);
    keys += std::string(name) + ":";
    for (const auto& [key, value] : doc.items()) keys += " " + key;
    keys += "\n";
  }
  check_golden("json_keys.txt", keys);

  // scan-coincidence carries the analytic bound column.
  std::ifstream coincidence(dir.path() / "out" / "scan_coincidence.csv");
  std::string line;
  std::getline(coincidence, line);
  std::getline(coincidence, line);
  CHECK(line.rfind("0.01,", 0) == 0);
  CHECK(line.substr(line.rfind(',') + 1) == "100");  // replicas T / (2 C) = 2 * 1 / 0.02
}

TEST_CASE("same seed gives identical outputs") {
  TempDir dir("fieldclick_cli_determinism");
  const auto scenario = write_short_scenario(dir).string();
  REQUIRE(run({"run", "--config", scenario, "--seed", "42", "--out", dir / "a", "--clicks"}).status == 0);
  REQUIRE(run({"run", "--config", scenario, "--seed", "42", "--out", dir / "b", "--clicks"}).status == 0);
  REQUIRE(run({"run", "--config", scenario, "--seed", "42", "--out", dir / "c", "--clicks",
               "--threads", "2"}).status == 0);
  REQUIRE(run({"run", "--config", scenario, "--seed", "43", "--out", dir / "d", "--clicks"}).status == 0);
  for (const char* name : {"run.csv", "clicks_r000.csv", "clicks_r001.csv"}) {
    CAPTURE(name);
    CHECK(slurp(dir.path() / "a" / name) == slurp(dir.path() / "b" / name));
    CHECK(slurp(dir.path() / "a" / name) == slurp(dir.path() / "c" / name));
  }
  CHECK(slurp(dir.path() / "a" / "run.json") == slurp(dir.path() / "b" / "run.json"));
  CHECK(slurp(dir.path() / "a" / "clicks_r000.csv") != slurp(dir.path() / "d" / "clicks_r000.csv"));
  CHECK(json::parse(slurp(dir.path() / "d" / "run.json"))["seed"] == 43);
}

TEST_CASE("format selection") {
  TempDir dir("fieldclick_cli_format");
  const auto scenario = write_short_scenario(dir).string();
  REQUIRE(run({"run", "--config", scenario, "--out", dir / "j", "--format", "json"}).status == 0);
  CHECK(fs::exists(dir.path() / "j" / "run.json"));
  CHECK_FALSE(fs::exists(dir.path() / "j" / "run.csv"));
  REQUIRE(run({"run", "--config", scenario, "--out", dir / "c", "--format", "csv"}).status == 0);
  CHECK_FALSE(fs::exists(dir.path() / "c" / "run.json"));
  CHECK(fs::exists(dir.path() / "c" / "run.csv"));
  CHECK(run({"run", "--config", scenario, "--out", dir / "x", "--format", "xml"}).status != 0);
}

TEST_CASE("preset flag") {
  TempDir dir("fieldclick_cli_preset");
  const auto r = run({"presets"});
  CHECK(r.status == 0);
  CHECK(r.out.find("two_peak") != std::string::npos);
  CHECK(r.out.find("gaussian_packet") != std::string::npos);
  CHECK(r.out.find("uniform") != std::string::npos);

  // A preset on top of a config swaps psi and detectors but keeps run settings.
  const auto scenario = write_short_scenario(dir).string();
  const auto swapped = run({"run", "--config", scenario, "--preset", "uniform", "--out", dir / "u"});
  REQUIRE(swapped.status == 0);
  CHECK(swapped.out.find("T=1 s replicas=2") != std::string::npos);
  CHECK(swapped.out.find("(oracle 0.5)") != std::string::npos);
}

TEST_CASE("failures exit nonzero with a diagnostic") {
  TempDir dir("fieldclick_cli_errors");
  const auto scenario = write_short_scenario(dir).string();

  SUBCASE("unknown subcommand") {
    CHECK(run({"explode"}).status != 0);
  }
  SUBCASE("no subcommand") {
    CHECK(run({}).status != 0);
  }
  SUBCASE("no scenario") {
    const auto r = run({"run", "--out", dir / "o"});
    CHECK(r.status == 1);
    CHECK(r.err.find("--config") != std::string::npos);
  }
  SUBCASE("unwritable output directory") {
    std::ofstream(dir.path() / "file") << "x";
    const auto r = run({"run", "--config", scenario, "--out", dir / "file/sub"});
    CHECK(r.status == 1);
    CHECK(r.err.find("cannot create output directory") != std::string::npos);
  }
  SUBCASE("invalid scenario") {
    std::ofstream(dir.path() / "bad.json") << R"({"psi": {"preset": "uniform"}, "run": {"T": "1 kg"}})";
    const auto r = run({"run", "--config", dir / "bad.json", "--out", dir / "o"});
    CHECK(r.status == 1);
    CHECK(r.err.find("bad.json:1: field 'run.T': inconsistent units") != std::string::npos);
  }
  SUBCASE("missing file") {
    const auto r = run({"run", "--config", dir / "nothing.json"});
    CHECK(r.status == 1);
    CHECK(r.err.find("cannot open") != std::string::npos);
  }
  SUBCASE("unknown preset") {
    CHECK(run({"run", "--preset", "nope", "--out", dir / "o"}).status == 1);
  }
}

TEST_CASE("version flag") {
  const auto r = run({"--version"});
  CHECK(r.status == 0);
  CHECK(r.out.find(version()) != std::string::npos);
}
