#pragma once

/**
 * \file hybrid_integrator.hpp
 *
 * Explicit Runge-Kutta integration of switched systems. Continuous states
 * evolve under a vector field selected by a vector of discrete modes; modes
 * are piecewise constant and change only at logged events.
 *
 * Each step runs with the modes that held at its left end. After the step the
 * per-element guards are compared left vs right; an upward zero crossing is
 * localized to `event_time_tol`, the step is cut back to the event time, and
 * the transition map is evaluated there. Two localization routes exist
 * (see Dispatch); they are meant to agree to within solver tolerance.
 */

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gmsim/friction_models.hpp"

namespace gmsim {

enum class Dispatch : std::uint8_t {
  /// Guard bisection on the cubic Hermite interpolant of the accepted step;
  /// the restart state is read off the interpolant.
  BoundaryLeft,
  /// The step is replayed from its left end with shortened step sizes until
  /// the switching time is bracketed; the restart state comes from a fresh
  /// Runge-Kutta step.
  BoundaryRight,
};

enum class Scheme : std::uint8_t { AdaptiveRK45, FixedRK4 };

std::string_view to_string(Dispatch d) noexcept;
std::string_view to_string(Scheme s) noexcept;

struct SolverConfig {
  double max_step = 1e-3;
  double min_step = 1e-12;
  double rel_tol = 1e-4;
  double abs_tol = 1e-7;
  double event_time_tol = 1e-9;
  Dispatch dispatch = Dispatch::BoundaryLeft;
  Scheme scheme = Scheme::AdaptiveRK45;
  double fixed_step = 1e-5;

  void validate(const std::string& path = "solver") const;
  bool operator==(const SolverConfig&) const = default;
};

struct Event {
  double time = 0.0;
  std::size_t element = 0;
  Mode from = Mode::Stick;
  Mode to = Mode::Stick;
  /// Guard value at the restart state.
  double guard_value = 0.0;
  /// Width of the final time bracket; 0 when the transition was found at a
  /// step boundary without a crossing inside the step.
  double bracket = 0.0;

  bool operator==(const Event&) const = default;
};

/// A switched system. Guard j belongs to mode slot j; the transition map is
/// applied slot by slot.
class HybridSystem {
 public:
  virtual ~HybridSystem() = default;

  virtual std::size_t dimension() const = 0;
  virtual std::size_t mode_count() const = 0;

  virtual void rhs(double t, std::span<const double> y,
                   std::span<const Mode> modes,
                   std::span<double> dydt) const = 0;

  /// Frozen per step: evaluated at the left end and handed back to guard().
  virtual double guard_orientation(std::size_t j, double t,
                                   std::span<const double> y,
                                   std::span<const Mode> modes) const {
    (void)j, (void)t, (void)y, (void)modes;
    return 0.0;
  }

  virtual double guard(std::size_t j, double t, std::span<const double> y,
                       std::span<const Mode> modes,
                       double orientation) const = 0;

  virtual Mode transition(std::size_t j, double t, std::span<const double> y,
                          std::span<const Mode> modes) const = 0;
};

/// HybridSystem assembled from callables. Handy for tests and one-off models.
class FunctionalSystem final : public HybridSystem {
 public:
  using Rhs = std::function<void(double, std::span<const double>,
                                 std::span<const Mode>, std::span<double>)>;
  using Guard = std::function<double(std::size_t, double,
                                     std::span<const double>,
                                     std::span<const Mode>)>;
  using Transition = std::function<Mode(std::size_t, double,
                                        std::span<const double>,
                                        std::span<const Mode>)>;

  FunctionalSystem(std::size_t dimension, Rhs rhs)
      : dimension_(dimension), rhs_(std::move(rhs)) {}
  FunctionalSystem(std::size_t dimension, std::size_t modes, Rhs rhs,
                   Guard guard, Transition transition)
      : dimension_(dimension),
        modes_(modes),
        rhs_(std::move(rhs)),
        guard_(std::move(guard)),
        transition_(std::move(transition)) {}

  std::size_t dimension() const override { return dimension_; }
  std::size_t mode_count() const override { return modes_; }
  void rhs(double t, std::span<const double> y, std::span<const Mode> m,
           std::span<double> dydt) const override {
    rhs_(t, y, m, dydt);
  }
  double guard(std::size_t j, double t, std::span<const double> y,
               std::span<const Mode> m, double) const override {
    return guard_(j, t, y, m);
  }
  Mode transition(std::size_t j, double t, std::span<const double> y,
                  std::span<const Mode> m) const override {
    return transition_(j, t, y, m);
  }

 private:
  std::size_t dimension_;
  std::size_t modes_ = 0;
  Rhs rhs_;
  Guard guard_;
  Transition transition_;
};

/// Cubic Hermite interpolant over one step.
struct DenseSegment {
  double t0 = 0.0;
  double t1 = 0.0;
  std::vector<double> y0, f0, y1, f1;

  void evaluate(double t, std::span<double> out) const;
  std::vector<double> operator()(double t) const;
};

struct StepResult {
  bool accepted = false;
  std::vector<double> y;
  double error = 0.0;  ///< scaled error norm; <= 1 means within tolerance
  double suggested_step = 0.0;
};

/// One Dormand-Prince 5(4) step of size h from (t, y). Error is the max norm
/// of the embedded difference scaled by abs_tol + rel_tol * |y|.
StepResult step_adaptive(const HybridSystem& sys, double t,
                         std::span<const double> y,
                         std::span<const Mode> modes, double h,
                         const SolverConfig& cfg);

/// Bisect guard `j` on the interpolant until the bracket is narrower than
/// cfg.event_time_tol. Throws std::logic_error if the guard does not cross
/// from negative to non-negative over [t_lo, t_hi].
Event localize_event(const HybridSystem& sys, double t_lo, double t_hi,
                     const DenseSegment& segment, std::size_t j,
                     std::span<const Mode> modes, const SolverConfig& cfg);

struct IntegrateOptions {
  /// Emit on a uniform grid t0 + k*interval instead of at accepted steps.
  std::optional<double> output_interval;
  /// Hold modes fixed; guards are not evaluated.
  bool freeze_modes = false;
};

struct IntegrationStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t rhs_evaluations = 0;
  double smallest_step = 0.0;
};

using Observer = std::function<void(double t, std::span<const double> y,
                                    std::span<const Mode> modes)>;

struct IntegrationReport {
  std::vector<Event> events;
  IntegrationStats stats;
  std::vector<double> final_state;
  std::vector<Mode> final_modes;
};

/// Integrate from t0 to t1. The observer sees the initial point (after any
/// transitions that hold there), then either every accepted step end (event
/// points included, with post-switch modes) or every grid point.
///
/// Throws IntegrationFailure on step underflow and DivergenceError on a
/// non-finite state.
IntegrationReport integrate(const HybridSystem& sys, double t0, double t1,
                            std::span<const double> y0,
                            std::span<const Mode> modes0,
                            const SolverConfig& cfg, const Observer& observer,
                            const IntegrateOptions& options = {});

/// Row-major sample storage for callers that want everything in memory.
struct Samples {
  std::size_t dimension = 0;
  std::size_t modes = 0;
  std::vector<double> t;
  std::vector<double> y;
  std::vector<Mode> mode;

  std::size_t size() const noexcept { return t.size(); }
  std::span<const double> state(std::size_t row) const {
    return {y.data() + row * dimension, dimension};
  }
  std::span<const Mode> modes_at(std::size_t row) const {
    return {mode.data() + row * modes, modes};
  }
};

struct Integration {
  Samples samples;
  IntegrationReport report;
};

Integration integrate(const HybridSystem& sys, double t0, double t1,
                      std::span<const double> y0, std::span<const Mode> modes0,
                      const SolverConfig& cfg,
                      const IntegrateOptions& options = {});

}  // namespace gmsim
