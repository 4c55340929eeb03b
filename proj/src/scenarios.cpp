#include "gmsim/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "gmsim/errors.hpp"
#include "gmsim/version.hpp"

namespace gmsim {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

[[noreturn]] void violated(const std::string& field, const std::string& rule,
                           double value) {
  std::ostringstream os;
  os << field << ": " << rule << " (got " << value << ")";
  throw InvariantViolation(os.str(), field);
}

void require_positive(double v, const std::string& field) {
  if (!std::isfinite(v) || v <= 0.0) violated(field, "must be finite and > 0", v);
}

void require_finite(double v, const std::string& field) {
  if (!std::isfinite(v)) violated(field, "must be finite", v);
}

}  // namespace

double signal_duration(const Signal& sig) {
  return std::visit(overloaded{
                        [](const RampThenSine& s) { return s.total_duration; },
                        [](const Sine& s) { return s.duration; },
                        [](const Constant& s) { return s.duration; },
                        [](const PiecewiseLinear& s) {
                          return s.breakpoints.empty() ? 0.0 : s.breakpoints.back().t;
                        },
                    },
                    sig);
}

void validate_signal(const Signal& sig, const std::string& path) {
  std::visit(overloaded{
                 [&](const RampThenSine& s) {
                   require_finite(s.ramp_target, path + ".ramp_target");
                   require_positive(s.ramp_duration, path + ".ramp_duration");
                   require_finite(s.sine_amplitude, path + ".sine_amplitude");
                   if (!std::isfinite(s.sine_frequency) || s.sine_frequency < 0.0) {
                     violated(path + ".sine_frequency", "must be finite and >= 0",
                              s.sine_frequency);
                   }
                   require_positive(s.total_duration, path + ".total_duration");
                   if (s.total_duration < s.ramp_duration) {
                     violated(path + ".total_duration", "must be >= ramp_duration",
                              s.total_duration);
                   }
                 },
                 [&](const Sine& s) {
                   require_finite(s.amplitude, path + ".amplitude");
                   require_positive(s.period, path + ".period");
                   require_positive(s.duration, path + ".duration");
                 },
                 [&](const Constant& s) {
                   require_finite(s.value, path + ".value");
                   require_positive(s.duration, path + ".duration");
                 },
                 [&](const PiecewiseLinear& s) {
                   const std::string bp = path + ".breakpoints";
                   if (s.breakpoints.empty()) {
                     throw InvariantViolation(bp + ": at least one breakpoint is required", bp);
                   }
                   double prev = -1.0;
                   for (std::size_t i = 0; i < s.breakpoints.size(); ++i) {
                     const auto& b = s.breakpoints[i];
                     const std::string idx = bp + "[" + std::to_string(i) + "]";
                     require_finite(b.value, idx + ".value");
                     if (!std::isfinite(b.t) || b.t < 0.0) violated(idx + ".t", "must be >= 0", b.t);
                     if (b.t <= prev) violated(idx + ".t", "breakpoints must be strictly increasing", b.t);
                     prev = b.t;
                   }
                   require_positive(s.breakpoints.back().t, bp + ".duration");
                 },
             },
             sig);
}

double eval_signal(const Signal& sig, double t) {
  const double duration = signal_duration(sig);
  const double slack = 1e-12 * std::max(1.0, duration);
  if (!(t >= -slack && t <= duration + slack)) {
    std::ostringstream os;
    os << "signal evaluated at t = " << t << " outside [0, " << duration << "]";
    throw DomainError(os.str());
  }
  constexpr double two_pi = 2.0 * std::numbers::pi;
  return std::visit(
      overloaded{
          [t](const RampThenSine& s) {
            if (t < s.ramp_duration) return (t / s.ramp_duration) * s.ramp_target;
            return s.ramp_target +
                   s.sine_amplitude * std::sin(two_pi * s.sine_frequency * (t - s.ramp_duration));
          },
          [t](const Sine& s) { return s.amplitude * std::sin(two_pi * t / s.period); },
          [](const Constant& s) { return s.value; },
          [t](const PiecewiseLinear& s) {
            const auto& bp = s.breakpoints;
            if (t <= bp.front().t) return bp.front().value;
            for (std::size_t i = 1; i < bp.size(); ++i) {
              if (t <= bp[i].t) {
                const double w = (t - bp[i - 1].t) / (bp[i].t - bp[i - 1].t);
                return bp[i - 1].value + w * (bp[i].value - bp[i - 1].value);
              }
            }
            return bp.back().value;
          },
      },
      sig);
}

std::size_t Scenario::elements() const noexcept {
  if (const auto* g = std::get_if<GmsParams>(&model)) return g->size();
  return 1;
}

double Scenario::horizon() const {
  return std::visit(overloaded{
                        [](const ClosedLoop& c) { return signal_duration(c.applied_force); },
                        [](const OpenLoop& o) { return signal_duration(o.velocity); },
                    },
                    loop);
}

void Scenario::validate() const {
  std::visit(overloaded{
                 [](const GmsParams& p) { p.validate("model.params"); },
                 [](const LugreParams& p) { p.validate("model.params"); },
             },
             model);
  std::visit(overloaded{
                 [](const ClosedLoop& c) {
                   require_positive(c.mass, "loop.mass");
                   validate_signal(c.applied_force, "loop.signal");
                 },
                 [](const OpenLoop& o) { validate_signal(o.velocity, "loop.signal"); },
             },
             loop);

  const std::size_t n = elements();
  if (initial.z.size() != n) {
    std::ostringstream os;
    os << "initial.z: expected " << n << " values, got " << initial.z.size();
    throw LengthMismatchError(os.str(), "initial.z");
  }
  for (std::size_t i = 0; i < n; ++i) {
    require_finite(initial.z[i], "initial.z[" + std::to_string(i) + "]");
  }
  const std::size_t expected_modes = is_gms() ? n : 0;
  if (initial.modes.size() != expected_modes) {
    std::ostringstream os;
    os << "initial.modes: expected " << expected_modes << " values, got "
       << initial.modes.size();
    throw LengthMismatchError(os.str(), "initial.modes");
  }
  require_finite(initial.x0, "initial.x0");
  require_finite(initial.v0, "initial.v0");
  solver.validate("solver");
  if (output.sampling == Sampling::Uniform) require_positive(output.interval, "output.interval");
  if (!output.columns.empty()) {
    const auto names = Trace::schema(loop_kind(), n);
    for (std::size_t i = 0; i < output.columns.size(); ++i) {
      if (std::find(names.begin(), names.end(), output.columns[i]) == names.end()) {
        const std::string field = "output.columns[" + std::to_string(i) + "]";
        throw InvariantViolation(field + ": unknown column '" + output.columns[i] + "'", field);
      }
    }
  }
}

SliderSystem::SliderSystem(const Scenario& scenario)
    : sc_(scenario),
      gms_(std::get_if<GmsParams>(&scenario.model)),
      lugre_(std::get_if<LugreParams>(&scenario.model)),
      closed_(std::get_if<ClosedLoop>(&scenario.loop)),
      open_(std::get_if<OpenLoop>(&scenario.loop)),
      nz_(scenario.elements()),
      zdot_(nz_),
      force_(nz_) {}

std::size_t SliderSystem::dimension() const { return nz_ + (closed_ ? 2 : 0); }

std::size_t SliderSystem::mode_count() const { return gms_ ? nz_ : 0; }

double SliderSystem::velocity(double t, std::span<const double> y) const {
  return closed_ ? y[nz_ + 1] : eval_signal(open_->velocity, t);
}

void SliderSystem::rhs(double t, std::span<const double> y,
                       std::span<const Mode> modes, std::span<double> dydt) const {
  const double v = velocity(t, y);
  double friction = 0.0;
  if (gms_) {
    friction = gms_rhs(y.first(nz_), modes, v, *gms_, dydt.first(nz_), force_);
  } else {
    dydt[0] = lugre_rate(y[0], v, *lugre_);
    friction = lugre_force(y[0], dydt[0], v, *lugre_);
  }
  if (closed_) {
    dydt[nz_] = v;
    dydt[nz_ + 1] = (eval_signal(closed_->applied_force, t) - friction) / closed_->mass;
  }
}

double SliderSystem::guard_orientation(std::size_t, double t, std::span<const double> y,
                                       std::span<const Mode>) const {
  return sgn(velocity(t, y));
}

double SliderSystem::guard(std::size_t j, double t, std::span<const double> y,
                           std::span<const Mode> modes, double orientation) const {
  const double v = velocity(t, y);
  const double s = stribeck(v, gms_->stribeck);
  return gms_guard(modes[j], y[j], v, s, gms_->v_c, orientation, gms_->slip_to_stick);
}

Mode SliderSystem::transition(std::size_t j, double t, std::span<const double> y,
                              std::span<const Mode> modes) const {
  const double v = velocity(t, y);
  const double s = stribeck(v, gms_->stribeck);
  return gms_transition(modes[j], y[j], v, s, gms_->v_c, gms_->slip_to_stick);
}

void SliderSystem::row(double t, std::span<const double> y, std::span<const Mode> modes,
                       std::span<double> out) const {
  const double v = velocity(t, y);
  double friction = 0.0;
  if (gms_) {
    friction = gms_rhs(y.first(nz_), modes, v, *gms_, zdot_, force_);
  } else {
    zdot_[0] = lugre_rate(y[0], v, *lugre_);
    friction = lugre_force(y[0], zdot_[0], v, *lugre_);
    force_[0] = friction - lugre_->sigma2 * v;
  }
  std::size_t c = 0;
  out[c++] = t;
  out[c++] = v;
  if (closed_) out[c++] = y[nz_];
  out[c++] = friction;
  for (std::size_t i = 0; i < nz_; ++i) out[c++] = y[i];
  for (std::size_t i = 0; i < nz_; ++i) out[c++] = force_[i];
  for (std::size_t i = 0; i < nz_; ++i) {
    out[c++] = gms_ ? static_cast<double>(static_cast<int>(modes[i])) : 0.0;
  }
}

std::vector<double> SliderSystem::initial_state() const {
  std::vector<double> y(sc_.initial.z.begin(), sc_.initial.z.end());
  if (closed_) {
    y.push_back(sc_.initial.x0);
    y.push_back(sc_.initial.v0);
  }
  return y;
}

namespace {

Trace run(const Scenario& sc, const IntegrateOptions& extra) {
  sc.validate();
  SliderSystem sys(sc);
  Trace trace(sc.loop_kind(), sc.elements());
  IntegrateOptions options = extra;
  if (sc.output.sampling == Sampling::Uniform && !options.output_interval) {
    options.output_interval = sc.output.interval;
  }
  if (options.output_interval) {
    trace.reserve(static_cast<std::size_t>(sc.horizon() / *options.output_interval) + 2);
  }
  std::vector<double> row(trace.columns().size());
  const auto y0 = sys.initial_state();
  IntegrationReport report;
  try {
    report = integrate(
        sys, 0.0, sc.horizon(), y0, sc.initial.modes, sc.solver,
        [&](double t, std::span<const double> y, std::span<const Mode> m) {
          sys.row(t, y, m, row);
          trace.append_row(row);
        },
        options);
  } catch (const IntegrationFailure& e) {
    throw IntegrationFailure("scenario '" + sc.name + "': " + e.what(), e.time());
  } catch (const DivergenceError& e) {
    throw DivergenceError("scenario '" + sc.name + "': " + e.what(), e.time());
  }
  trace.events = std::move(report.events);
  trace.metadata["scenario"] = sc.name;
  trace.metadata["model"] = sc.is_gms() ? "gms" : "lugre";
  trace.metadata["loop"] = std::string(to_string(sc.loop_kind()));
  trace.metadata["scheme"] = std::string(to_string(sc.solver.scheme));
  trace.metadata["dispatch"] = std::string(to_string(sc.solver.dispatch));
  trace.metadata["accepted_steps"] = std::to_string(report.stats.accepted);
  trace.metadata["rejected_steps"] = std::to_string(report.stats.rejected);
  trace.metadata["tool_version"] = GMSIM_VERSION;
  const auto put = [&](const char* key, double value) {
    std::ostringstream os;
    os.precision(17);
    os << value;
    trace.metadata[key] = os.str();
  };
  if (sc.is_gms()) {
    const auto& p = std::get<GmsParams>(sc.model);
    put("v_c", p.v_c);
    put("f_c", p.stribeck.f_c);
  } else {
    put("f_c", std::get<LugreParams>(sc.model).stribeck.f_c);
  }
  if (!sc.output.columns.empty()) {
    auto keep = sc.output.columns;
    keep.emplace_back("t");
    trace = trace.select(keep);
  }
  return trace;
}

}  // namespace

Trace simulate(const Scenario& sc, const IntegrateOptions& extra) { return run(sc, extra); }

Trace simulate_closed_loop(const Scenario& sc, const IntegrateOptions& extra) {
  if (sc.loop_kind() != LoopKind::Closed) {
    throw ConfigurationError("simulate_closed_loop: scenario '" + sc.name + "' is open loop");
  }
  return run(sc, extra);
}

Trace simulate_open_loop(const Scenario& sc, const IntegrateOptions& extra) {
  if (sc.loop_kind() != LoopKind::Open) {
    throw ConfigurationError("simulate_open_loop: scenario '" + sc.name + "' is closed loop");
  }
  return run(sc, extra);
}

Trace run_dispatch_variant(Scenario sc, Dispatch dispatch) {
  sc.solver.dispatch = dispatch;
  return simulate(sc);
}

double breakaway_force(const GmsParams& p) { return p.total_stiffness() * p.stribeck.f_s; }

namespace {

GmsParams table_params(const std::vector<double>& k, const std::vector<double>& sigma,
                       const std::vector<double>& c, double sigma2, double f_s, double f_c) {
  GmsParams p;
  for (std::size_t i = 0; i < k.size(); ++i) p.elements.push_back({k[i], sigma[i], c[i]});
  p.sigma2 = sigma2;
  p.stribeck = {f_c, f_s, 1e-3};
  p.v_c = 1e-6;
  return p;
}

}  // namespace

Scenario preset(std::string_view name) {
  Scenario sc;
  sc.name = std::string(name);
  if (name == "non-drifting") {
    auto p = table_params({100, 10, 1, 0.1}, {10, 0.1, 1, 1}, {1, 1, 1, 1}, 4, 1.5, 1);
    const double f_ba = breakaway_force(p);
    sc.loop = ClosedLoop{1.0, RampThenSine{0.5 * f_ba, 10.0, 0.02 * f_ba, 5.0, 30.0}};
    sc.model = std::move(p);
  } else if (name == "stick-slip") {
    sc.model = table_params({0.7, 0.7, 0.7, 0.7}, {0.3, 0.4, 0.5, 0.6},
                            {0.1, 0.05, 0.025, 1e-4}, 0.1, 1.5, 0.4);
    sc.loop = OpenLoop{Sine{0.5, 20.0, 60.0}};
  } else {
    throw LookupError("unknown preset '" + std::string(name) +
                      "' (expected 'non-drifting' or 'stick-slip')");
  }
  sc.initial = InitialConditions{std::vector<double>(4, 0.0),
                                 std::vector<Mode>(4, Mode::Stick), 0.0, 0.0};
  return sc;
}

std::vector<std::string> preset_names() { return {"non-drifting", "stick-slip"}; }

Scenario with_lugre(const Scenario& gms_scenario) {
  const auto* g = std::get_if<GmsParams>(&gms_scenario.model);
  if (!g) throw ConfigurationError("with_lugre: scenario already uses the LuGre model");
  Scenario sc = gms_scenario;
  sc.name = gms_scenario.name + "/lugre";
  sc.model = LugreParams{1e3, 31.6, g->sigma2, g->stribeck};
  sc.initial.z = {0.0};
  sc.initial.modes.clear();
  return sc;
}

}  // namespace gmsim
