#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct Run {
  int status = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

struct Sandbox {
  fs::path dir;
  Sandbox() {
    std::random_device rd;
    dir = fs::temp_directory_path() / ("gmsim_cli_" + std::to_string(rd()));
    fs::create_directories(dir);
  }
  ~Sandbox() {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
  fs::path operator/(const std::string& name) const { return dir / name; }

  Run run(const std::string& args, const std::string& env = "") const {
    const auto out = dir / "stdout.txt";
    const auto err = dir / "stderr.txt";
    const std::string cmd = "cd '" + dir.string() + "' && " + env + " '" GMSIM_CLI_PATH "' " +
                            args + " >'" + out.string() + "' 2>'" + err.string() + "'";
    const int raw = std::system(cmd.c_str());
    Run r;
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
  }
};

std::size_t header_width(const fs::path& csv) {
  std::ifstream in(csv);
  std::string header;
  std::getline(in, header);
  std::size_t n = 1;
  for (char c : header) n += c == ',' ? 1 : 0;
  return n;
}

/// Shortens the non-drifting preset so CLI runs stay quick.
void shorten(const fs::path& scenario, double duration) {
  auto doc = nlohmann::ordered_json::parse(slurp(scenario));
  doc["loop"]["signal"]["ramp_duration"] = duration / 2;
  doc["loop"]["signal"]["total_duration"] = duration;
  std::ofstream(scenario) << doc.dump(2);
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("preset then simulate") {
  Sandbox sb;
  REQUIRE(sb.run("preset non-drifting --out nd.json").status == 0);
  shorten(sb / "nd.json", 2.0);
  const Run r = sb.run("simulate nd.json --out nd.csv");
  CHECK(r.status == 0);
  CHECK(header_width(sb / "nd.csv") == 16);
  CHECK(fs::exists(sb / "nd.csv.events.csv"));
  CHECK(fs::exists(sb / "nd.csv.meta.json"));

  CHECK(sb.run("simulate nd.json --lugre --out lg.csv").status == 0);
  CHECK(header_width(sb / "lg.csv") == 4 + 3);
}

TEST_CASE("reruns are byte-identical") {
  Sandbox sb;
  REQUIRE(sb.run("preset stick-slip --out ss.json").status == 0);
  auto doc = nlohmann::ordered_json::parse(slurp(sb / "ss.json"));
  doc["loop"]["signal"]["duration"] = 15.0;
  std::ofstream(sb / "ss.json") << doc.dump(2);
  REQUIRE(sb.run("simulate ss.json --out a.csv").status == 0);
  REQUIRE(sb.run("simulate ss.json --out b.csv").status == 0);
  CHECK(slurp(sb / "a.csv") == slurp(sb / "b.csv"));
  CHECK(slurp(sb / "a.csv.events.csv") == slurp(sb / "b.csv.events.csv"));
  CHECK(slurp(sb / "a.csv.events.csv").find("stick,slip") != std::string::npos);
}

TEST_CASE("invalid scenario names the field") {
  Sandbox sb;
  REQUIRE(sb.run("preset non-drifting --out nd.json").status == 0);
  auto doc = nlohmann::ordered_json::parse(slurp(sb / "nd.json"));
  doc["model"]["params"]["stribeck"]["f_c"] = -1.0;
  std::ofstream(sb / "bad.json") << doc.dump(2);
  const Run r = sb.run("simulate bad.json --out x.csv");
  CHECK(r.status == 1);
  CHECK(r.err.find("model.params.stribeck.f_c") != std::string::npos);
  CHECK_FALSE(fs::exists(sb / "x.csv"));
}

TEST_CASE("usage errors") {
  Sandbox sb;
  CHECK(sb.run("").status == 1);
  CHECK(sb.run("frobnicate").status == 1);
  const Run r = sb.run("simulate");
  CHECK(r.status == 1);
  CHECK(r.err.find("scenario") != std::string::npos);
  CHECK(sb.run("simulate missing.json").status == 1);
  CHECK(sb.run("preset drifting").status == 1);
  CHECK(sb.run("--version").status == 0);
}

TEST_CASE("analyze, plot and compare") {
  Sandbox sb;
  REQUIRE(sb.run("preset non-drifting --out nd.json").status == 0);
  shorten(sb / "nd.json", 3.0);
  REQUIRE(sb.run("simulate nd.json --out nd.csv").status == 0);

  const Run drift = sb.run("analyze nd.csv --drift --window 2 3 --period 0.2");
  REQUIRE(drift.status == 0);
  const auto d = nlohmann::json::parse(drift.out);
  CHECK(d["report"] == "drift");
  CHECK(d["window"][0].get<double>() == 2.0);

  REQUIRE(sb.run("analyze nd.csv --breakaway --report peaks.json").status == 0);
  CHECK(nlohmann::json::parse(slurp(sb / "peaks.json"))["report"] == "breakaway");

  CHECK(sb.run("analyze nd.csv").status == 1);
  CHECK(sb.run("analyze nd.csv --drift --asymmetry").status == 1);
  CHECK(sb.run("analyze nd.csv --drift --window 5 9").status == 2);

  REQUIRE(sb.run("plot nd.csv --y F x --out p.svg").status == 0);
  const std::string svg = slurp(sb / "p.svg");
  CHECK(svg.find("<polyline") != std::string::npos);
  CHECK(sb.run("plot nd.csv --y nope --out q.svg").status == 1);

  const Run cmp = sb.run("compare nd.json --grid 0.01");
  REQUIRE(cmp.status == 0);
  const auto c = nlohmann::json::parse(cmp.out);
  CHECK(c["report"] == "residual");
  CHECK(c["columns"].size() == 6);
  CHECK(sb.run("compare nd.json --dispatch-a sideways").status == 1);
}

TEST_CASE("default output directory") {
  Sandbox sb;
  const auto out = sb / "outputs";
  const std::string env = "GMSIM_OUTPUT_DIR='" + out.string() + "'";
  REQUIRE(sb.run("preset non-drifting", env).status == 0);
  CHECK(fs::exists(out / "non-drifting.json"));
  shorten(out / "non-drifting.json", 1.0);
  REQUIRE(sb.run("simulate '" + (out / "non-drifting.json").string() + "'", env).status == 0);
  CHECK(fs::exists(out / "non-drifting.csv"));
}

}  // TEST_SUITE
