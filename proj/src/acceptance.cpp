#include "gmsim/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <limits>
#include <ostream>
#include <sstream>
#include <unistd.h>

#include "gmsim/analysis.hpp"
#include "gmsim/errors.hpp"
#include "gmsim/io.hpp"
#include "gmsim/scenarios.hpp"

namespace gmsim {
namespace {

std::string sci(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

Scenario uniform(Scenario sc, double interval = 1e-3) {
  sc.output.sampling = Sampling::Uniform;
  sc.output.interval = interval;
  return sc;
}

// 1 ---------------------------------------------------------------------------
CriterionResult stribeck_anchors() {
  CriterionResult r{1, "Stribeck anchors", true, ""};
  struct Column {
    const char* preset;
    std::vector<double> k, sigma, c;
    double sigma2, f_s, f_c;
  };
  const Column table[] = {
      {"non-drifting", {100, 10, 1, 0.1}, {10, 0.1, 1, 1}, {1, 1, 1, 1}, 4, 1.5, 1},
      {"stick-slip", {0.7, 0.7, 0.7, 0.7}, {0.3, 0.4, 0.5, 0.6}, {0.1, 0.05, 0.025, 1e-4},
       0.1, 1.5, 0.4},
  };
  double worst_tail = 0.0;
  for (const auto& col : table) {
    const auto p = std::get<GmsParams>(preset(col.preset).model);
    bool table_ok = p.size() == 4 && p.sigma2 == col.sigma2 && p.stribeck.f_s == col.f_s &&
                    p.stribeck.f_c == col.f_c && p.stribeck.v_s == 1e-3 && p.v_c == 1e-6;
    for (std::size_t i = 0; table_ok && i < 4; ++i) {
      table_ok = p.elements[i].k == col.k[i] && p.elements[i].sigma == col.sigma[i] &&
                 p.elements[i].c == col.c[i];
    }
    if (!table_ok) {
      r.pass = false;
      r.detail += std::string(col.preset) + " parameters differ from the table; ";
    }
    if (stribeck(0.0, p.stribeck) != p.stribeck.f_s) {
      r.pass = false;
      r.detail += std::string(col.preset) + " s(0) != f_s; ";
    }
    for (double m : {10.0, 11.0, 20.0, 100.0, 1e3, 1e6}) {
      for (double sign : {1.0, -1.0}) {
        const double tail = std::abs(stribeck(sign * m * p.stribeck.v_s, p.stribeck) - p.stribeck.f_c);
        worst_tail = std::max(worst_tail, tail);
      }
    }
  }
  if (worst_tail > 1e-12) r.pass = false;
  r.detail += "s(0) == f_s exactly; max |s(v) - f_c| for |v| >= 10 v_s = " + sci(worst_tail) +
              " (tol 1e-12)";
  return r;
}

// 2 ---------------------------------------------------------------------------
CriterionResult slip_oracle() {
  CriterionResult r{2, "Slip-branch oracle", true, ""};
  const double v = 0.01, z0 = 0.0;
  GmsParams p;
  p.elements = {{0.7, 0.3, 0.1}};
  p.sigma2 = 0.1;
  p.stribeck = {0.4, 1.5, 1e-3};
  p.v_c = 1e-6;
  const double s = stribeck(v, p.stribeck);
  const double c = p.elements[0].c;
  const double horizon = 3.0 * s / c;

  Scenario sc;
  sc.name = "slip-oracle";
  sc.model = p;
  sc.loop = OpenLoop{Constant{v, horizon}};
  sc.initial = {{z0}, {Mode::Slip}, 0.0, 0.0};
  IntegrateOptions opt;
  opt.freeze_modes = true;
  const Trace tr = simulate(sc, opt);
  const auto t = tr.column("t");
  const auto z = tr.column("z_1");

  double worst = 0.0;
  for (int i = 1; i <= 20; ++i) {
    const double ti = horizon * i / 20.0;
    const double exact = s + (z0 - s) * std::exp(-c * ti / s);
    worst = std::max(worst, std::abs(interpolate(t, z, ti) - exact) / std::abs(exact));
  }
  r.pass = worst <= 1e-3 && tr.events.empty();
  r.detail = "max relative error over 20 samples = " + sci(worst) + " (tol 1e-3)";
  return r;
}

// 3 ---------------------------------------------------------------------------
CriterionResult stick_cohesion() {
  CriterionResult r{3, "Stick cohesion", true, ""};
  double worst = 0.0;
  std::size_t rows = 0;
  for (const char* name : {"stick-slip", "non-drifting"}) {
    const Trace tr = simulate(preset(name));
    const double until =
        tr.events.empty() ? std::numeric_limits<double>::infinity() : tr.events.front().time;
    const auto t = tr.column("t");
    std::vector<std::span<const double>> z;
    for (std::size_t i = 1; i <= tr.elements(); ++i) z.push_back(tr.column("z_" + std::to_string(i)));
    for (std::size_t k = 0; k < t.size() && t[k] < until; ++k) {
      double lo = z[0][k], hi = z[0][k];
      for (const auto& col : z) {
        lo = std::min(lo, col[k]);
        hi = std::max(hi, col[k]);
      }
      worst = std::max(worst, hi - lo);
      ++rows;
    }
  }
  r.pass = worst <= 1e-12;
  r.detail = "max z spread before first event = " + sci(worst) + " over " +
             std::to_string(rows) + " rows (tol 1e-12)";
  return r;
}

// 4 ---------------------------------------------------------------------------
CriterionResult non_drifting() {
  CriterionResult r{4, "Non-drifting reproduction", true, ""};
  const Scenario gms = uniform(preset("non-drifting"));
  const auto& force = std::get<RampThenSine>(std::get<ClosedLoop>(gms.loop).applied_force);
  const double sine_start = force.ramp_duration;
  const TimeWindow window{sine_start + 0.5 * (force.total_duration - sine_start),
                          force.total_duration};
  const double period = 1.0 / force.sine_frequency;

  const Trace g = simulate(gms);
  const Trace l = simulate(with_lugre(gms));
  const DriftReport dg = drift_slope(g, window, period);
  const DriftReport dl = drift_slope(l, window, period);

  const bool slope_ok = std::abs(dg.slope) <= 1e-9;
  const bool events_ok = g.events.empty();
  const bool lugre_ok = dl.monotone && std::abs(dl.net_displacement) > 0.0 &&
                        std::abs(dl.net_displacement) >= 100.0 * std::abs(dg.net_displacement);
  r.pass = slope_ok && events_ok && lugre_ok;
  std::ostringstream os;
  os << "window [" << window.start << ", " << window.end << "] s, averaging " << period
     << " s; GMS slope " << sci(dg.slope) << " (tol 1e-9), events " << g.events.size()
     << ", net " << sci(dg.net_displacement) << ", p2p " << sci(dg.peak_to_peak)
     << "; LuGre net " << sci(dl.net_displacement) << (dl.monotone ? " monotone" : " NOT monotone");
  r.detail = os.str();
  return r;
}

// 5 ---------------------------------------------------------------------------
CriterionResult stick_slip() {
  CriterionResult r{5, "Stick-slip reproduction", true, ""};
  const Scenario gms = preset("stick-slip");
  const Trace g = simulate(gms);
  const Trace l = simulate(with_lugre(gms));

  const auto bg = breakaway_peaks(g, default_prominence_threshold(g));
  const auto bl = breakaway_peaks(l, default_prominence_threshold(l));
  const double ag = asymmetry(g).value;
  const double al = asymmetry(l).value;

  std::size_t best = 0;
  for (std::size_t h = 2; h < bg.half_cycles.size(); ++h) {
    best = std::max(best, bg.half_cycles[h].peaks.size());
  }
  std::optional<double> first_peak;
  for (const auto& h : bg.half_cycles) {
    if (!h.peaks.empty()) {
      first_peak = h.peaks.front().time;
      break;
    }
  }
  const auto reversal = bg.first_reversal();
  const bool first_ok = first_peak && reversal && *first_peak < *reversal;

  bool lugre_single = !bl.half_cycles.empty();
  std::string lugre_counts;
  for (const auto& h : bl.half_cycles) {
    lugre_single = lugre_single && h.peaks.size() == 1;
    lugre_counts += std::to_string(h.peaks.size());
  }
  std::string gms_counts;
  for (const auto& h : bg.half_cycles) gms_counts += std::to_string(h.peaks.size());

  r.pass = best >= 2 && ag > 0.01 && lugre_single && al < 1e-3 && first_ok;
  std::ostringstream os;
  os << "GMS peaks/half-cycle " << gms_counts << " (need >= 2 after cycle 1), asymmetry "
     << sci(ag) << " (> 0.01), first break-away t=" << (first_peak ? *first_peak : -1.0)
     << " before reversal t=" << (reversal ? *reversal : -1.0) << "; LuGre peaks/half-cycle "
     << lugre_counts << " (all 1), asymmetry " << sci(al) << " (< 1e-3); threshold "
     << bg.threshold << " N";
  r.detail = os.str();
  return r;
}

// 6 ---------------------------------------------------------------------------
CriterionResult implementation_residual() {
  CriterionResult r{6, "Implementation residual", true, ""};
  const Scenario ss = uniform(preset("stick-slip"));
  const Trace a = run_dispatch_variant(ss, Dispatch::BoundaryLeft);
  const Trace b = run_dispatch_variant(ss, Dispatch::BoundaryRight);
  const auto rs = residual_compare(a, b, 1e-3);
  const auto& F = rs.at("F");
  const double reach = 10.0 * ss.solver.max_step;
  std::size_t stray = 0;
  for (double ts : F.spike_times) {
    bool near = false;
    for (const auto* ev : {&a.events, &b.events}) {
      for (const auto& e : *ev) near = near || std::abs(e.time - ts) <= reach;
    }
    if (!near) ++stray;
  }

  double nearest = std::numeric_limits<double>::infinity();
  for (const auto* ev : {&a.events, &b.events}) {
    for (const auto& e : *ev) nearest = std::min(nearest, std::abs(e.time - F.max_time));
  }

  const Scenario nd = uniform(preset("non-drifting"));
  const auto rn = residual_compare(run_dispatch_variant(nd, Dispatch::BoundaryLeft),
                                   run_dispatch_variant(nd, Dispatch::BoundaryRight), 1e-3);
  const double nf = rn.at("F").max_abs;
  const double nx = rn.at("x").max_abs;

  r.pass = F.max_abs <= 1e-2 && stray == 0 && nf <= 1e-3 && nx <= 1e-5;
  std::ostringstream os;
  os << "stick-slip max|dF| " << sci(F.max_abs) << " (tol 1e-2), RMS " << sci(F.rms) << ", "
     << F.spike_times.size() << " spikes > 10 RMS, " << stray << " away from events, largest |dF| at t="
     << F.max_time << " (" << sci(nearest) << " s from an event); non-drifting max|dF| "
     << sci(nf) << " (tol 1e-3), max|dx| " << sci(nx) << " (tol 1e-5)";
  r.detail = os.str();
  return r;
}

// 7 ---------------------------------------------------------------------------
CriterionResult integrator_oracle() {
  CriterionResult r{7, "Integrator oracle", true, ""};
  Scenario sc = uniform(preset("stick-slip"));
  std::get<Sine>(std::get<OpenLoop>(sc.loop).velocity).duration = 20.0;
  Scenario fixed = sc;
  fixed.solver.scheme = Scheme::FixedRK4;
  fixed.solver.fixed_step = 1e-5;
  const auto rep = residual_compare(simulate(sc), simulate(fixed), 1e-3);
  r.pass = rep.at("F").rms <= 1e-3;
  r.detail = "RMS dF adaptive RK45 vs fixed RK4 (h = 1e-5) over 20 s = " + sci(rep.at("F").rms) +
             " (tol 1e-3), max " + sci(rep.at("F").max_abs);
  return r;
}

// 8 ---------------------------------------------------------------------------
Mode reference_transition(Mode m, double z, double v, double s, double v_c, SlipToStickRule rule) {
  if (m == Mode::Stick) {
    const bool forward = z >= s && v > v_c;
    const bool backward = z <= -s && v < -v_c;
    return forward || backward ? Mode::Slip : Mode::Stick;
  }
  bool restick = std::abs(v) <= v_c;
  if (rule == SlipToStickRule::VelocityAndDeflection) restick = restick && std::abs(z) <= s;
  return restick ? Mode::Stick : Mode::Slip;
}

CriterionResult event_localization() {
  CriterionResult r{8, "Event localization", true, ""};
  double widest = 0.0;
  std::size_t events = 0;
  for (Dispatch d : {Dispatch::BoundaryLeft, Dispatch::BoundaryRight}) {
    const Scenario sc = preset("stick-slip");
    for (const Scenario& run : {sc, with_lugre(sc)}) {
      const Trace tr = run_dispatch_variant(run, d);
      for (const auto& e : tr.events) {
        widest = std::max(widest, e.bracket);
        ++events;
      }
    }
  }
  const double v_c = 1e-6, s = 1.5;
  std::size_t cases = 0, mismatches = 0;
  for (SlipToStickRule rule : {SlipToStickRule::Velocity, SlipToStickRule::VelocityAndDeflection}) {
    for (Mode m : {Mode::Stick, Mode::Slip}) {
      for (int i = -40; i <= 40; ++i) {
        const double z = s * i / 20.0;
        for (int j = -60; j <= 60; ++j) {
          const double v = v_c * j / 20.0;
          ++cases;
          if (gms_transition(m, z, v, s, v_c, rule) != reference_transition(m, z, v, s, v_c, rule)) {
            ++mismatches;
          }
        }
      }
    }
  }
  r.pass = widest <= 1e-9 && mismatches == 0 && events > 0;
  r.detail = std::to_string(events) + " events, widest bracket " + sci(widest) +
             " s (tol 1e-9); truth table " + std::to_string(mismatches) + " mismatches in " +
             std::to_string(cases) + " cases";
  return r;
}

// 9 ---------------------------------------------------------------------------
CriterionResult determinism() {
  CriterionResult r{9, "Determinism and round-trips", true, ""};
  const auto dir = std::filesystem::temp_directory_path() /
                   ("gmsim-acceptance-" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  std::string problems;
  try {
    const Scenario sc = preset("stick-slip");
    const Trace t1 = simulate(sc);
    const Trace t2 = simulate(sc);
    write_trace(t1, dir / "a.csv");
    write_trace(t2, dir / "b.csv");
    if (!(t1 == t2)) problems += "repeated runs differ; ";
    if (read_text(dir / "a.csv") != read_text(dir / "b.csv") ||
        read_text(events_path(dir / "a.csv")) != read_text(events_path(dir / "b.csv"))) {
      problems += "trace files not byte-identical; ";
    }
    if (!(read_trace(dir / "a.csv") == t1)) problems += "trace round-trip lossy; ";
    for (const auto& name : preset_names()) {
      for (const Scenario& s : {preset(name), with_lugre(preset(name))}) {
        if (!(parse_scenario(serialize_scenario(s)) == s)) {
          problems += "scenario '" + s.name + "' round-trip lossy; ";
        }
      }
    }
  } catch (...) {
    std::filesystem::remove_all(dir);
    throw;
  }
  std::filesystem::remove_all(dir);
  r.pass = problems.empty();
  r.detail = problems.empty()
                 ? "byte-identical reruns; trace and scenario round-trips exact"
                 : problems;
  return r;
}

}  // namespace

std::vector<CriterionResult> run_acceptance(std::ostream* out) {
  const std::vector<std::function<CriterionResult()>> checks = {
      stribeck_anchors, slip_oracle,       stick_cohesion,     non_drifting,  stick_slip,
      implementation_residual, integrator_oracle, event_localization, determinism};
  std::vector<CriterionResult> results;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    CriterionResult res;
    try {
      res = checks[i]();
    } catch (const std::exception& e) {
      res = CriterionResult{static_cast<int>(i + 1), "criterion " + std::to_string(i + 1), false,
                            std::string("error: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (out) {
      *out << (res.pass ? "PASS" : "FAIL") << "  [" << res.id << "] " << res.name << ": "
           << res.detail;
      char buf[32];
      std::snprintf(buf, sizeof buf, " (%.2f s)", secs);
      *out << buf << '\n' << std::flush;
    }
    results.push_back(std::move(res));
  }
  return results;
}

}  // namespace gmsim
