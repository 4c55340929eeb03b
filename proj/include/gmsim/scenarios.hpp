#pragma once

/**
 * \file scenarios.hpp
 *
 * Experiment definitions. A closed-loop run drives a slider of mass m with an
 * applied force and feeds friction back:
 *
 *   m dv/dt = F_app(t) - F,   dx/dt = v
 *
 * An open-loop run prescribes v(t) and integrates only the friction states.
 */

#include <cstddef>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "gmsim/friction_models.hpp"
#include "gmsim/hybrid_integrator.hpp"
#include "gmsim/trace.hpp"

namespace gmsim {

/// Linear ramp from 0 to ramp_target, then a sine around ramp_target.
struct RampThenSine {
  double ramp_target = 0.0;
  double ramp_duration = 1.0;
  double sine_amplitude = 0.0;
  double sine_frequency = 1.0;  ///< Hz
  double total_duration = 1.0;
  bool operator==(const RampThenSine&) const = default;
};

/// amplitude * sin(2 pi t / period)
struct Sine {
  double amplitude = 0.0;
  double period = 1.0;
  double duration = 1.0;
  bool operator==(const Sine&) const = default;
};

struct Constant {
  double value = 0.0;
  double duration = 1.0;
  bool operator==(const Constant&) const = default;
};

struct Breakpoint {
  double t = 0.0;
  double value = 0.0;
  bool operator==(const Breakpoint&) const = default;
};

/// Linear interpolation between breakpoints; held constant before the first.
struct PiecewiseLinear {
  std::vector<Breakpoint> breakpoints;
  bool operator==(const PiecewiseLinear&) const = default;
};

using Signal = std::variant<RampThenSine, Sine, Constant, PiecewiseLinear>;

double signal_duration(const Signal& sig);
void validate_signal(const Signal& sig, const std::string& path = "signal");

/// Throws DomainError for t outside [0, duration].
double eval_signal(const Signal& sig, double t);

struct ClosedLoop {
  double mass = 1.0;
  Signal applied_force = Constant{};
  bool operator==(const ClosedLoop&) const = default;
};

struct OpenLoop {
  Signal velocity = Constant{};
  bool operator==(const OpenLoop&) const = default;
};

using Loop = std::variant<ClosedLoop, OpenLoop>;
using Model = std::variant<GmsParams, LugreParams>;

struct InitialConditions {
  std::vector<double> z;
  std::vector<Mode> modes;  ///< empty for LuGre
  double x0 = 0.0;
  double v0 = 0.0;
  bool operator==(const InitialConditions&) const = default;
};

enum class Sampling { Steps, Uniform };

struct OutputPolicy {
  Sampling sampling = Sampling::Steps;
  double interval = 1e-3;            ///< used when sampling == Uniform
  std::vector<std::string> columns;  ///< empty selects every column
  bool operator==(const OutputPolicy&) const = default;
};

struct Scenario {
  std::string name;
  Model model;
  Loop loop;
  InitialConditions initial;
  SolverConfig solver;
  OutputPolicy output;

  bool is_gms() const noexcept { return std::holds_alternative<GmsParams>(model); }
  LoopKind loop_kind() const noexcept {
    return std::holds_alternative<ClosedLoop>(loop) ? LoopKind::Closed : LoopKind::Open;
  }
  /// Number of friction states (GMS elements, or 1 for LuGre).
  std::size_t elements() const noexcept;
  double horizon() const;

  /// Throws InvariantViolation / LengthMismatchError naming the field.
  void validate() const;
  bool operator==(const Scenario&) const = default;
};

/// Friction states (+ x, v when closed loop) as a switched system.
class SliderSystem final : public HybridSystem {
 public:
  explicit SliderSystem(const Scenario& scenario);

  std::size_t dimension() const override;
  std::size_t mode_count() const override;
  void rhs(double t, std::span<const double> y, std::span<const Mode> modes,
           std::span<double> dydt) const override;
  double guard_orientation(std::size_t j, double t, std::span<const double> y,
                           std::span<const Mode> modes) const override;
  double guard(std::size_t j, double t, std::span<const double> y,
               std::span<const Mode> modes, double orientation) const override;
  Mode transition(std::size_t j, double t, std::span<const double> y,
                  std::span<const Mode> modes) const override;

  double velocity(double t, std::span<const double> y) const;

  /// One full trace row (schema order) for the given sample.
  void row(double t, std::span<const double> y, std::span<const Mode> modes,
           std::span<double> out) const;

  std::vector<double> initial_state() const;

 private:
  const Scenario& sc_;
  const GmsParams* gms_ = nullptr;
  const LugreParams* lugre_ = nullptr;
  const ClosedLoop* closed_ = nullptr;
  const OpenLoop* open_ = nullptr;
  std::size_t nz_ = 0;
  mutable std::vector<double> zdot_, force_;
};

Trace simulate(const Scenario& sc, const IntegrateOptions& extra = {});
Trace simulate_closed_loop(const Scenario& sc, const IntegrateOptions& extra = {});
Trace simulate_open_loop(const Scenario& sc, const IntegrateOptions& extra = {});

/// Same scenario with the dispatch variant overridden.
Trace run_dispatch_variant(Scenario sc, Dispatch dispatch);

/// All-stuck break-away force of a GMS parameter set: (sum k_i) * f_s.
double breakaway_force(const GmsParams& p);

/// "non-drifting" or "stick-slip". Throws LookupError otherwise.
Scenario preset(std::string_view name);
std::vector<std::string> preset_names();

/// LuGre benchmark on the same scenario: sigma0 = 1e3, sigma1 = 31.6,
/// sigma2 and the Stribeck curve taken from the GMS model, z0 = 0.
Scenario with_lugre(const Scenario& gms_scenario);

}  // namespace gmsim
