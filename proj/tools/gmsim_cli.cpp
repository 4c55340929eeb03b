// gmsim: command-line front end for the GMS / LuGre friction simulator.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gmsim/acceptance.hpp"
#include "gmsim/analysis.hpp"
#include "gmsim/errors.hpp"
#include "gmsim/io.hpp"
#include "gmsim/scenarios.hpp"
#include "gmsim/version.hpp"

namespace fs = std::filesystem;
using namespace gmsim;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kFailure = 2;

/// Default directory for outputs whose path was not given.
fs::path output_dir() {
  if (const char* dir = std::getenv("GMSIM_OUTPUT_DIR"); dir && *dir) return dir;
  return fs::current_path();
}

fs::path resolve_output(const std::string& given, const std::string& fallback_name) {
  if (!given.empty()) return given;
  const fs::path dir = output_dir();
  fs::create_directories(dir);
  return dir / fallback_name;
}

/// Input files that cannot be opened are usage errors.
void require_file(const std::string& path) {
  if (!fs::is_regular_file(path)) throw ConfigurationError("no such file: '" + path + "'");
}

Dispatch parse_dispatch(const std::string& s) {
  if (s == "boundary-left") return Dispatch::BoundaryLeft;
  if (s == "boundary-right") return Dispatch::BoundaryRight;
  throw ConfigurationError("unknown dispatch '" + s + "' (boundary-left or boundary-right)");
}

void emit(const std::string& report, const std::string& path) {
  if (path.empty()) {
    std::cout << report;
  } else {
    write_text_atomic(path, report);
  }
}

struct SimulateArgs {
  std::string scenario, out;
  std::optional<double> interval;
  bool lugre = false;
};

int cmd_simulate(const SimulateArgs& a) {
  require_file(a.scenario);
  Scenario sc = load_scenario(a.scenario);
  if (a.lugre) sc = with_lugre(sc);
  if (a.interval) {
    sc.output.sampling = Sampling::Uniform;
    sc.output.interval = *a.interval;
    sc.validate();
  }
  const Trace tr = simulate(sc);
  const fs::path out = resolve_output(a.out, fs::path(a.scenario).stem().string() + ".csv");
  write_trace(tr, out);
  std::cerr << "wrote " << out.string() << " (" << tr.rows() << " rows, " << tr.events.size()
            << " events)\n";
  return kOk;
}

int cmd_preset(const std::string& name, const std::string& out_arg) {
  const Scenario sc = preset(name);
  const fs::path out = resolve_output(out_arg, name + ".json");
  save_scenario(sc, out);
  std::cerr << "wrote " << out.string() << "\n";
  return kOk;
}

struct CompareArgs {
  std::string scenario, dispatch_a = "boundary-left", dispatch_b = "boundary-right", report;
  double grid = 1e-3;
};

int cmd_compare(const CompareArgs& a) {
  require_file(a.scenario);
  const Scenario sc = load_scenario(a.scenario);
  const Trace ta = run_dispatch_variant(sc, parse_dispatch(a.dispatch_a));
  const Trace tb = run_dispatch_variant(sc, parse_dispatch(a.dispatch_b));
  const auto rep = residual_compare(ta, tb, a.grid);
  emit(report_json(rep, ta.events, tb.events), a.report);
  return kOk;
}

struct AnalyzeArgs {
  std::string trace, report;
  bool drift = false, breakaway = false, asym = false;
  std::vector<double> window;
  double period = 0.0;
  std::optional<double> threshold, band;
};

int cmd_analyze(const AnalyzeArgs& a) {
  require_file(a.trace);
  const int chosen = int(a.drift) + int(a.breakaway) + int(a.asym);
  if (chosen != 1) {
    throw ConfigurationError("choose exactly one of --drift, --breakaway, --asymmetry");
  }
  const Trace tr = read_trace(a.trace);
  std::string out;
  if (a.drift) {
    if (tr.rows() == 0) throw ParameterError("empty trace");
    TimeWindow w{tr.column("t").front(), tr.column("t").back()};
    if (!a.window.empty()) w = {a.window[0], a.window[1]};
    out = report_json(drift_slope(tr, w, a.period));
  } else if (a.breakaway) {
    const double th = a.threshold ? *a.threshold : default_prominence_threshold(tr);
    out = report_json(breakaway_peaks(tr, th, a.band));
  } else {
    out = report_json(asymmetry(tr, a.band));
  }
  emit(out, a.report);
  return kOk;
}

int cmd_plot(const std::string& trace, const PlotSpec& spec, const std::string& out_arg) {
  require_file(trace);
  const Trace tr = read_trace(trace);
  const fs::path out = resolve_output(out_arg, fs::path(trace).stem().string() + ".svg");
  emit_plot(tr, spec, out);
  std::cerr << "wrote " << out.string() << "\n";
  return kOk;
}

int cmd_validate() {
  const auto results = run_acceptance(&std::cout);
  std::size_t failed = 0;
  for (const auto& r : results) failed += r.pass ? 0 : 1;
  std::cout << (results.size() - failed) << "/" << results.size() << " criteria passed\n";
  return failed == 0 ? kOk : kFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GMS and LuGre friction simulator"};
  app.set_version_flag("--version", GMSIM_VERSION);
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate_cmd = app.add_subcommand("simulate", "Run a scenario file and write a trace");
  simulate_cmd->add_option("scenario", sim.scenario, "Scenario JSON")->required();
  simulate_cmd->add_option("--out,-o", sim.out, "Trace CSV (default: $GMSIM_OUTPUT_DIR/<stem>.csv)");
  simulate_cmd->add_option("--uniform", sim.interval, "Sample on a uniform grid with this step [s]")
      ->check(CLI::PositiveNumber);
  simulate_cmd->add_flag("--lugre", sim.lugre, "Swap the GMS model for the LuGre benchmark");

  std::string preset_name, preset_out;
  auto* preset_cmd = app.add_subcommand("preset", "Write a built-in scenario");
  preset_cmd->add_option("name", preset_name, "non-drifting or stick-slip")->required();
  preset_cmd->add_option("--out,-o", preset_out, "Scenario JSON (default: $GMSIM_OUTPUT_DIR/<name>.json)");

  CompareArgs cmp;
  auto* compare_cmd = app.add_subcommand("compare", "Residuals between two dispatch variants");
  compare_cmd->add_option("scenario", cmp.scenario, "Scenario JSON")->required();
  compare_cmd->add_option("--dispatch-a", cmp.dispatch_a, "boundary-left or boundary-right")
      ->capture_default_str();
  compare_cmd->add_option("--dispatch-b", cmp.dispatch_b, "boundary-left or boundary-right")
      ->capture_default_str();
  compare_cmd->add_option("--grid", cmp.grid, "Comparison grid step [s]")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  compare_cmd->add_option("--report", cmp.report, "Report JSON (default: stdout)");

  AnalyzeArgs an;
  auto* analyze_cmd = app.add_subcommand("analyze", "Compute a metric over a trace");
  analyze_cmd->add_option("trace", an.trace, "Trace CSV")->required();
  analyze_cmd->add_flag("--drift", an.drift, "Least-squares drift of x");
  analyze_cmd->add_flag("--breakaway", an.breakaway, "Break-away peak census");
  analyze_cmd->add_flag("--asymmetry", an.asym, "Directional friction asymmetry");
  analyze_cmd->add_option("--window", an.window, "Drift window start end [s]")->expected(2);
  analyze_cmd->add_option("--period", an.period, "Drift averaging period [s]")
      ->check(CLI::NonNegativeNumber);
  analyze_cmd->add_option("--threshold", an.threshold, "Peak prominence threshold [N]");
  analyze_cmd->add_option("--band", an.band, "Velocity band ignored when splitting half-cycles");
  analyze_cmd->add_option("--report", an.report, "Report JSON (default: stdout)");

  std::string plot_trace, plot_out;
  PlotSpec plot_spec;
  auto* plot_cmd = app.add_subcommand("plot", "Render trace columns as SVG");
  plot_cmd->add_option("trace", plot_trace, "Trace CSV")->required();
  plot_cmd->add_option("--x", plot_spec.x, "Abscissa column")->capture_default_str();
  plot_cmd->add_option("--y", plot_spec.y, "Ordinate columns")->required();
  plot_cmd->add_option("--title", plot_spec.title, "Figure title");
  plot_cmd->add_option("--out,-o", plot_out, "SVG file (default: $GMSIM_OUTPUT_DIR/<stem>.svg)");

  auto* validate_cmd = app.add_subcommand("validate", "Run the acceptance suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    CLI::App* sub = nullptr;
    for (auto* s : app.get_subcommands()) sub = s;
    std::cerr << (sub ? sub->help() : app.help());
    return kUsage;
  }

  try {
    if (*simulate_cmd) return cmd_simulate(sim);
    if (*preset_cmd) return cmd_preset(preset_name, preset_out);
    if (*compare_cmd) return cmd_compare(cmp);
    if (*analyze_cmd) return cmd_analyze(an);
    if (*plot_cmd) return cmd_plot(plot_trace, plot_spec, plot_out);
    if (*validate_cmd) return cmd_validate();
  } catch (const ScenarioError& e) {
    std::cerr << "error: invalid scenario: " << e.what() << "\n";
    return kUsage;
  } catch (const ConfigurationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const LookupError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const UnknownColumnError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kUsage;
}
