#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gmsim/analysis.hpp"
#include "gmsim/errors.hpp"
#include "gmsim/hybrid_integrator.hpp"
#include "gmsim/scenarios.hpp"

using namespace gmsim;

namespace {

FunctionalSystem decay() {
  return FunctionalSystem(1, [](double, std::span<const double> y, std::span<const Mode>,
                                std::span<double> d) { d[0] = -y[0]; });
}

/// dz/dt = 1 for every slot; slot j switches to Slip once z reaches `at`.
FunctionalSystem ramp_with_guards(std::size_t slots, double at) {
  return FunctionalSystem(
      1, slots,
      [](double, std::span<const double>, std::span<const Mode>, std::span<double> d) { d[0] = 1.0; },
      [at](std::size_t j, double, std::span<const double> y, std::span<const Mode> m) {
        return m[j] == Mode::Stick ? y[0] - at : -1.0;
      },
      [at](std::size_t j, double, std::span<const double> y, std::span<const Mode> m) {
        return y[0] >= at ? Mode::Slip : m[j];
      });
}

double final_value(const HybridSystem& sys, double t1, double y0, const SolverConfig& cfg) {
  const std::vector<double> y{y0};
  return integrate(sys, 0.0, t1, y, {}, cfg).report.final_state[0];
}

}  // namespace

TEST_SUITE("hybrid-integrator") {

TEST_CASE("exponential decay against the closed form") {
  const auto sys = decay();
  const double z1 = final_value(sys, 1.0, 1.0, SolverConfig{});
  CHECK(std::abs(z1 - std::exp(-1.0)) <= 1e-4);
  CHECK(z1 == doctest::Approx(0.367879).epsilon(1e-6));
}

TEST_CASE("linear crossing is localized within the event tolerance") {
  const auto sys = ramp_with_guards(1, 0.5);
  const std::vector<double> y{0.0};
  const std::vector<Mode> m{Mode::Stick};
  const auto run = integrate(sys, 0.0, 1.0, y, m, SolverConfig{});
  REQUIRE(run.report.events.size() == 1);
  const auto& e = run.report.events[0];
  CHECK(std::abs(e.time - 0.5) <= 1e-9);
  CHECK(e.bracket <= 1e-9);
  CHECK(e.from == Mode::Stick);
  CHECK(e.to == Mode::Slip);
  CHECK(run.report.final_modes[0] == Mode::Slip);
}

TEST_CASE("localize_event on a given bracket") {
  const auto sys = ramp_with_guards(1, 0.5);
  const std::vector<Mode> m{Mode::Stick};
  DenseSegment seg{0.4999, 0.5008, {0.4999}, {1.0}, {0.5008}, {1.0}};
  const Event e = localize_event(sys, 0.4999, 0.5008, seg, 0, m, SolverConfig{});
  CHECK(std::abs(e.time - 0.5) <= 1e-9);
  CHECK(e.element == 0);

  DenseSegment none{0.1, 0.2, {0.1}, {1.0}, {0.2}, {1.0}};
  CHECK_THROWS_AS(localize_event(sys, 0.1, 0.2, none, 0, m, SolverConfig{}), std::logic_error);
}

TEST_CASE("simultaneous guards fire together in ascending element order") {
  const auto sys = ramp_with_guards(3, 0.25);
  const std::vector<double> y{0.0};
  const std::vector<Mode> m(3, Mode::Stick);
  const auto run = integrate(sys, 0.0, 1.0, y, m, SolverConfig{});
  REQUIRE(run.report.events.size() == 3);
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(run.report.events[j].element == j);
    CHECK(run.report.events[j].time == run.report.events[0].time);
  }
  CHECK(std::abs(run.report.events[0].time - 0.25) <= 1e-9);
}

TEST_CASE("velocity band crossings of a sine input") {
  const double A = 0.5, T = 20.0, v_c = 1e-6;
  const auto vel = [=](double t) { return A * std::sin(2.0 * std::numbers::pi * t / T); };
  FunctionalSystem sys(
      1, 1,
      [&](double t, std::span<const double>, std::span<const Mode>, std::span<double> d) {
        d[0] = vel(t);
      },
      [&](std::size_t, double t, std::span<const double>, std::span<const Mode> m) {
        // Positive half-cycle only: leave the band upward, re-enter it downward.
        return m[0] == Mode::Stick ? vel(t) - v_c : v_c - vel(t);
      },
      [&](std::size_t, double t, std::span<const double>, std::span<const Mode> m) {
        if (m[0] == Mode::Stick) return vel(t) >= v_c ? Mode::Slip : Mode::Stick;
        return std::abs(vel(t)) <= v_c ? Mode::Stick : Mode::Slip;
      });
  const std::vector<double> y{0.0};
  const std::vector<Mode> m{Mode::Stick};
  const auto run = integrate(sys, 0.0, 15.0, y, m, SolverConfig{});
  REQUIRE(run.report.events.size() == 2);
  const double lead = T / (2.0 * std::numbers::pi) * std::asin(v_c / A);
  CHECK(std::abs(run.report.events[0].time - lead) <= 1e-9);
  CHECK(std::abs(run.report.events[1].time - (T / 2.0 - lead)) <= 1e-9);
}

TEST_CASE("single adaptive steps") {
  SolverConfig cfg;
  const std::vector<Mode> none;
  FunctionalSystem constant(1, [](double, std::span<const double>, std::span<const Mode>,
                                  std::span<double> d) { d[0] = 3.0; });
  const std::vector<double> y0{1.0};
  const auto flat = step_adaptive(constant, 0.0, y0, none, cfg.max_step, cfg);
  CHECK(flat.accepted);
  CHECK(flat.error <= 1e-12);
  CHECK(flat.suggested_step == cfg.max_step);

  const auto sys = decay();
  const auto one = step_adaptive(sys, 0.0, y0, none, 1e-3, cfg);
  CHECK(one.accepted);
  CHECK(std::abs(one.y[0] - std::exp(-1e-3)) < 1e-10);

  FunctionalSystem stiff(1, [](double, std::span<const double> y, std::span<const Mode>,
                               std::span<double> d) { d[0] = -1e5 * (y[0] - 1.0); });
  const std::vector<double> z0{0.0};
  const auto hard = step_adaptive(stiff, 0.0, z0, none, 1e-3, cfg);
  CHECK_FALSE(hard.accepted);
  CHECK(hard.suggested_step < 1e-3);
}

TEST_CASE("fixed RK4 is fourth order") {
  const auto sys = decay();
  SolverConfig cfg;
  cfg.scheme = Scheme::FixedRK4;
  cfg.max_step = 0.2;
  double prev = 0.0;
  for (double h : {0.1, 0.05, 0.025}) {
    cfg.fixed_step = h;
    const double err = std::abs(final_value(sys, 1.0, 1.0, cfg) - std::exp(-1.0));
    if (prev > 0.0) {
      const double ratio = prev / err;
      CHECK(ratio >= 12.0);
      CHECK(ratio <= 20.0);
    }
    prev = err;
  }
}

TEST_CASE("tightening tolerances moves the answer by less than the prior error") {
  // Undamped oscillator over a few periods; exact solution cos(t).
  FunctionalSystem osc(2, [](double, std::span<const double> y, std::span<const Mode>,
                             std::span<double> d) {
    d[0] = y[1];
    d[1] = -y[0];
  });
  const std::vector<double> y0{1.0, 0.0};
  SolverConfig loose;
  loose.max_step = 0.5;
  loose.rel_tol = 1e-4;
  SolverConfig tight = loose;
  tight.max_step /= 2.0;
  tight.rel_tol /= 2.0;
  const double t1 = 10.0;
  const double a = integrate(osc, 0.0, t1, y0, {}, loose).report.final_state[0];
  const double b = integrate(osc, 0.0, t1, y0, {}, tight).report.final_state[0];
  const double prior_error = std::abs(a - std::cos(t1));
  CHECK(prior_error > 0.0);
  CHECK(std::abs(b - a) < prior_error);
  CHECK(std::abs(b - std::cos(t1)) < prior_error);
}

TEST_CASE("uniform output lands on the grid") {
  const auto sys = decay();
  const std::vector<double> y0{1.0};
  IntegrateOptions opt;
  opt.output_interval = 0.01;
  const auto run = integrate(sys, 0.0, 1.0, y0, {}, SolverConfig{}, opt);
  REQUIRE(run.samples.size() == 101);
  for (std::size_t k = 0; k < run.samples.size(); ++k) {
    CHECK(run.samples.t[k] == doctest::Approx(0.01 * k).epsilon(1e-12));
    CHECK(std::abs(run.samples.state(k)[0] - std::exp(-run.samples.t[k])) < 1e-8);
  }
}

TEST_CASE("integration is deterministic") {
  const auto sc = preset("stick-slip");
  SliderSystem sys(sc);
  const auto y0 = sys.initial_state();
  const auto a = integrate(sys, 0.0, 20.0, y0, sc.initial.modes, sc.solver);
  const auto b = integrate(sys, 0.0, 20.0, y0, sc.initial.modes, sc.solver);
  CHECK(a.samples.t == b.samples.t);
  CHECK(a.samples.y == b.samples.y);
  CHECK(a.samples.mode == b.samples.mode);
  CHECK(a.report.events == b.report.events);
}

TEST_CASE("failures are reported") {
  FunctionalSystem blowup(1, [](double t, std::span<const double>, std::span<const Mode>,
                                std::span<double> d) { d[0] = 1.0 / std::pow(0.5 - t, 2.0); });
  const std::vector<double> y0{0.0};
  SolverConfig cfg;
  cfg.min_step = 1e-6;
  CHECK_THROWS_AS(integrate(blowup, 0.0, 1.0, y0, {}, cfg), IntegrationFailure);

  FunctionalSystem nan(1, [](double, std::span<const double>, std::span<const Mode>,
                             std::span<double> d) { d[0] = std::nan(""); });
  CHECK_THROWS_AS(integrate(nan, 0.0, 1.0, y0, {}, SolverConfig{}), DivergenceError);

  const auto sys = decay();
  CHECK_THROWS_AS(integrate(sys, 1.0, 0.0, y0, {}, SolverConfig{}), ConfigurationError);
}

TEST_CASE("solver configuration invariants") {
  SolverConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.min_step = 1e-2;
  try {
    cfg.validate();
    FAIL("expected InvariantViolation");
  } catch (const InvariantViolation& e) {
    CHECK(e.field() == "solver.min_step");
  }
  cfg = SolverConfig{};
  cfg.rel_tol = 0.0;
  CHECK_THROWS_AS(cfg.validate(), InvariantViolation);
  cfg = SolverConfig{};
  cfg.event_time_tol = -1.0;
  CHECK_THROWS_AS(cfg.validate(), InvariantViolation);
}

TEST_CASE("modes only change at logged events") {
  for (Dispatch d : {Dispatch::BoundaryLeft, Dispatch::BoundaryRight}) {
    const Trace tr = run_dispatch_variant(preset("stick-slip"), d);
    REQUIRE_FALSE(tr.events.empty());
    const auto t = tr.column("t");
    for (std::size_t i = 1; i <= 4; ++i) {
      const auto mode = tr.column("mode_" + std::to_string(i));
      for (std::size_t k = 1; k < t.size(); ++k) {
        if (mode[k] == mode[k - 1]) continue;
        bool logged = false;
        for (const auto& e : tr.events) {
          logged = logged || (e.element == i - 1 && e.time > t[k - 1] && e.time <= t[k]);
        }
        CHECK_MESSAGE(logged, "element " << i << " switched at t=" << t[k] << " without an event");
      }
    }
    for (const auto& e : tr.events) CHECK(e.bracket <= 1e-9);
  }
}

TEST_CASE("dispatch variants") {
  const auto nd = preset("non-drifting");
  CHECK(run_dispatch_variant(nd, Dispatch::BoundaryLeft).column("F")[1000] ==
        run_dispatch_variant(nd, Dispatch::BoundaryRight).column("F")[1000]);

  const auto ss = preset("stick-slip");
  const Trace a = run_dispatch_variant(ss, Dispatch::BoundaryLeft);
  const Trace b = run_dispatch_variant(ss, Dispatch::BoundaryRight);
  CHECK(a == run_dispatch_variant(ss, Dispatch::BoundaryLeft));
  // Same event count per half-cycle, give or take one.
  for (int h = 0; h < 6; ++h) {
    int na = 0, nb = 0;
    for (const auto& e : a.events) na += (e.time >= 10.0 * h && e.time < 10.0 * (h + 1));
    for (const auto& e : b.events) nb += (e.time >= 10.0 * h && e.time < 10.0 * (h + 1));
    CHECK(std::abs(na - nb) <= 1);
  }
  CHECK(residual_compare(a, b).at("F").max_abs <= 1e-2);
}

TEST_CASE("adaptive RK45 against fixed RK4 on the stick-slip preset") {
  Scenario sc = preset("stick-slip");
  sc.output = {Sampling::Uniform, 1e-3, {}};
  std::get<Sine>(std::get<OpenLoop>(sc.loop).velocity).duration = 20.0;
  Scenario fixed = sc;
  fixed.solver.scheme = Scheme::FixedRK4;
  fixed.solver.fixed_step = 1e-5;
  const Trace a = simulate(sc);
  const Trace b = simulate(fixed);
  const auto rep = residual_compare(a, b);
  CHECK(rep.at("F").rms <= 1e-3);

  // Deflections agree to 1e-5 up to the first re-stick. Afterwards the
  // difference left by the re-stick transient (where s(v) climbs from f_c
  // to f_s within a few ms) is amplified by the unstable negative slip
  // branch; it stays within the adaptive scheme's local tolerance scale.
  double first_restick = 20.0;
  for (const auto& e : a.events) {
    if (e.to == Mode::Stick) {
      first_restick = e.time;
      break;
    }
  }
  const auto t = a.column("t");
  double before = 0.0, after = 0.0;
  for (std::size_t i = 1; i <= 4; ++i) {
    const auto za = a.column("z_" + std::to_string(i));
    const auto zb = b.column("z_" + std::to_string(i));
    for (std::size_t k = 0; k < t.size(); ++k) {
      double& slot = t[k] < first_restick ? before : after;
      slot = std::max(slot, std::abs(za[k] - zb[k]));
    }
  }
  CHECK(before <= 1e-5);
  CHECK(after <= 1e-4);
  MESSAGE("max |dz| before first re-stick " << before << ", after " << after);

  // A tighter adaptive run closes most of the gap, so the residual is the
  // adaptive scheme's tolerance and not a defect of the event handling.
  Scenario tight = sc;
  tight.solver.rel_tol = 1e-8;
  tight.solver.abs_tol = 1e-11;
  const auto rt = residual_compare(simulate(tight), b);
  double tight_z = 0.0;
  for (std::size_t i = 1; i <= 4; ++i) {
    tight_z = std::max(tight_z, rt.at("z_" + std::to_string(i)).max_abs);
  }
  CHECK(tight_z < after);
  MESSAGE("max |dz| with rel_tol 1e-8: " << tight_z);
}

}  // TEST_SUITE
