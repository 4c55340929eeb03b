#include "gmsim/hybrid_integrator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "gmsim/errors.hpp"

namespace gmsim {

std::string_view to_string(Dispatch d) noexcept {
  return d == Dispatch::BoundaryLeft ? "boundary-left" : "boundary-right";
}

std::string_view to_string(Scheme s) noexcept {
  return s == Scheme::AdaptiveRK45 ? "adaptive-rk45" : "fixed-rk4";
}

void SolverConfig::validate(const std::string& path) const {
  auto positive = [&](double v, const char* name) {
    if (!std::isfinite(v) || v <= 0.0) {
      std::ostringstream os;
      os << path << "." << name << ": must be finite and > 0 (got " << v << ")";
      throw InvariantViolation(os.str(), path + "." + name);
    }
  };
  positive(max_step, "max_step");
  positive(min_step, "min_step");
  positive(rel_tol, "rel_tol");
  positive(abs_tol, "abs_tol");
  positive(event_time_tol, "event_time_tol");
  positive(fixed_step, "fixed_step");
  if (min_step > max_step) {
    std::ostringstream os;
    os << path << ".min_step: must not exceed max_step (" << min_step << " > "
       << max_step << ")";
    throw InvariantViolation(os.str(), path + ".min_step");
  }
}

void DenseSegment::evaluate(double t, std::span<double> out) const {
  const double h = t1 - t0;
  const double th = h > 0.0 ? (t - t0) / h : 1.0;
  const double th2 = th * th;
  const double th3 = th2 * th;
  const double h00 = 2.0 * th3 - 3.0 * th2 + 1.0;
  const double h10 = th3 - 2.0 * th2 + th;
  const double h01 = -2.0 * th3 + 3.0 * th2;
  const double h11 = th3 - th2;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i];
  }
}

std::vector<double> DenseSegment::operator()(double t) const {
  std::vector<double> out(y0.size());
  evaluate(t, out);
  return out;
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

class Stepper {
 public:
  Stepper(const HybridSystem& sys, const SolverConfig& cfg)
      : sys_(sys), cfg_(cfg), n_(sys.dimension()), tmp_(n_) {
    for (auto& k : k_) k.resize(n_);
  }

  std::size_t evaluations() const noexcept { return evals_; }

  void eval(double t, std::span<const double> y, std::span<const Mode> modes,
            std::span<double> out) {
    ++evals_;
    sys_.rhs(t, y, modes, out);
  }

  /// Advance (t, y) with derivative f0 by h. Writes y1 and f1 = f(t+h, y1).
  /// Returns the scaled error norm (always 0 for the fixed-step scheme).
  double advance(double t, std::span<const double> y, std::span<const double> f0,
                 std::span<const Mode> modes, double h, std::span<double> y1,
                 std::span<double> f1) {
    return cfg_.scheme == Scheme::AdaptiveRK45 ? dopri(t, y, f0, modes, h, y1, f1)
                                               : rk4(t, y, f0, modes, h, y1, f1);
  }

 private:
  double dopri(double t, std::span<const double> y, std::span<const double> f0,
               std::span<const Mode> modes, double h, std::span<double> y1,
               std::span<double> f1) {
    auto& k2 = k_[1];
    auto& k3 = k_[2];
    auto& k4 = k_[3];
    auto& k5 = k_[4];
    auto& k6 = k_[5];
    for (std::size_t i = 0; i < n_; ++i) tmp_[i] = y[i] + h * a21 * f0[i];
    eval(t + c2 * h, tmp_, modes, k2);
    for (std::size_t i = 0; i < n_; ++i)
      tmp_[i] = y[i] + h * (a31 * f0[i] + a32 * k2[i]);
    eval(t + c3 * h, tmp_, modes, k3);
    for (std::size_t i = 0; i < n_; ++i)
      tmp_[i] = y[i] + h * (a41 * f0[i] + a42 * k2[i] + a43 * k3[i]);
    eval(t + c4 * h, tmp_, modes, k4);
    for (std::size_t i = 0; i < n_; ++i)
      tmp_[i] = y[i] + h * (a51 * f0[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    eval(t + c5 * h, tmp_, modes, k5);
    for (std::size_t i = 0; i < n_; ++i)
      tmp_[i] = y[i] + h * (a61 * f0[i] + a62 * k2[i] + a63 * k3[i] +
                            a64 * k4[i] + a65 * k5[i]);
    eval(t + h, tmp_, modes, k6);
    for (std::size_t i = 0; i < n_; ++i)
      y1[i] = y[i] + h * (b1 * f0[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] +
                          b6 * k6[i]);
    eval(t + h, y1, modes, f1);

    double err = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      const double e = h * (e1 * f0[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                            e6 * k6[i] + e7 * f1[i]);
      const double scale =
          cfg_.abs_tol + cfg_.rel_tol * std::max(std::abs(y[i]), std::abs(y1[i]));
      err = std::max(err, std::abs(e) / scale);
    }
    return err;
  }

  double rk4(double t, std::span<const double> y, std::span<const double> f0,
             std::span<const Mode> modes, double h, std::span<double> y1,
             std::span<double> f1) {
    auto& k2 = k_[1];
    auto& k3 = k_[2];
    auto& k4 = k_[3];
    for (std::size_t i = 0; i < n_; ++i) tmp_[i] = y[i] + 0.5 * h * f0[i];
    eval(t + 0.5 * h, tmp_, modes, k2);
    for (std::size_t i = 0; i < n_; ++i) tmp_[i] = y[i] + 0.5 * h * k2[i];
    eval(t + 0.5 * h, tmp_, modes, k3);
    for (std::size_t i = 0; i < n_; ++i) tmp_[i] = y[i] + h * k3[i];
    eval(t + h, tmp_, modes, k4);
    for (std::size_t i = 0; i < n_; ++i)
      y1[i] = y[i] + h / 6.0 * (f0[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    eval(t + h, y1, modes, f1);
    return 0.0;
  }

  const HybridSystem& sys_;
  const SolverConfig& cfg_;
  std::size_t n_;
  std::array<std::vector<double>, 6> k_;
  std::vector<double> tmp_;
  std::size_t evals_ = 0;
};

double next_step_size(double h, double err, const SolverConfig& cfg) {
  double factor = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
  factor = std::clamp(factor, 0.2, 5.0);
  return std::clamp(h * factor, cfg.min_step, cfg.max_step);
}

bool all_finite(std::span<const double> y) {
  return std::all_of(y.begin(), y.end(), [](double v) { return std::isfinite(v); });
}

class Integrator {
 public:
  Integrator(const HybridSystem& sys, const SolverConfig& cfg,
             const Observer& observer, const IntegrateOptions& options)
      : sys_(sys),
        cfg_(cfg),
        observer_(observer),
        options_(options),
        stepper_(sys, cfg),
        n_(sys.dimension()),
        m_(options.freeze_modes ? 0 : sys.mode_count()) {}

  IntegrationReport run(double t0, double t1, std::span<const double> y0,
                        std::span<const Mode> modes0) {
    if (!(t1 > t0)) {
      throw ConfigurationError("integration interval must satisfy t1 > t0");
    }
    if (y0.size() != n_) {
      throw ConfigurationError("initial state length does not match system dimension");
    }
    if (modes0.size() != sys_.mode_count()) {
      throw ConfigurationError("initial mode vector length does not match system");
    }
    if (!all_finite(y0)) throw DivergenceError("initial state is not finite", t0);

    t0_ = t0;
    t1_ = t1;
    modes_.assign(modes0.begin(), modes0.end());
    std::vector<double> y(y0.begin(), y0.end()), f(n_), y1(n_), f1(n_);
    std::vector<double> orient(m_), g_left(m_), g_right(m_);
    double t = t0;

    stepper_.eval(t, y, modes_, f);
    if (apply_transitions(t, y, 0.0)) stepper_.eval(t, y, modes_, f);

    if (options_.output_interval) {
      grid_step_ = *options_.output_interval;
      if (!(grid_step_ > 0.0) || !std::isfinite(grid_step_)) {
        throw ConfigurationError("output interval must be finite and > 0");
      }
      grid_last_ = static_cast<std::size_t>(std::floor((t1 - t0) / grid_step_ + 1e-9));
      observer_(t, y, modes_);
      grid_next_ = 1;
    } else {
      observer_(t, y, modes_);
    }

    const bool adaptive = cfg_.scheme == Scheme::AdaptiveRK45;
    double h = adaptive ? cfg_.max_step : cfg_.fixed_step;
    report_.stats.smallest_step = std::numeric_limits<double>::infinity();

    while (t < t1) {
      const double remaining = t1 - t;
      const bool last = h >= remaining;
      const double h_try = last ? remaining : h;
      const double t_new = last ? t1 : t + h_try;

      const double err = stepper_.advance(t, y, f, modes_, h_try, y1, f1);
      if (!all_finite(y1) || !std::isfinite(err)) {
        std::ostringstream os;
        os << "state became non-finite at t = " << t_new;
        throw DivergenceError(os.str(), t_new);
      }
      if (adaptive && err > 1.0) {
        ++report_.stats.rejected;
        const double shrunk = h_try * std::clamp(0.9 * std::pow(err, -0.2), 0.2, 1.0);
        if (shrunk < cfg_.min_step) {
          std::ostringstream os;
          os << "step size underflow at t = " << t << ": required step "
             << shrunk << " < min_step " << cfg_.min_step;
          throw IntegrationFailure(os.str(), t);
        }
        h = shrunk;
        continue;
      }
      ++report_.stats.accepted;
      report_.stats.smallest_step = std::min(report_.stats.smallest_step, h_try);

      // Guard crossings inside [t, t_new] under the step's modes.
      double t_end = t_new;
      double bracket = 0.0;
      triggered_.clear();
      for (std::size_t j = 0; j < m_; ++j) {
        orient[j] = sys_.guard_orientation(j, t, y, modes_);
        g_left[j] = sys_.guard(j, t, y, modes_, orient[j]);
        g_right[j] = sys_.guard(j, t_new, y1, modes_, orient[j]);
        if (g_left[j] < 0.0 && g_right[j] >= 0.0) triggered_.push_back(j);
      }
      if (!triggered_.empty()) {
        bracket = localize(t, y, f, t_new, y1, f1, orient, t_end);
      }

      emit_grid(t, y, f, t_end, y1, f1);
      t = t_end;
      std::swap(y, y1);
      std::swap(f, f1);

      const bool switched = apply_transitions(t, y, bracket);
      if (switched) stepper_.eval(t, y, modes_, f);
      if (!options_.output_interval) observer_(t, y, modes_);

      if (adaptive) {
        h = next_step_size(h_try, err, cfg_);
        if (switched || !triggered_.empty()) h = std::min(h_try, cfg_.max_step / 10.0);
        h = std::max(h, cfg_.min_step);
      } else {
        h = cfg_.fixed_step;
      }
    }

    report_.stats.rhs_evaluations = stepper_.evaluations();
    report_.final_state = y;
    report_.final_modes = modes_;
    return std::move(report_);
  }

 private:
  // Returns the width of the final bracket; writes the event time to t_end
  // and the restart state/derivative into y1/f1.
  double localize(double t, std::span<const double> y, std::span<const double> f,
                  double t_new, std::vector<double>& y1, std::vector<double>& f1,
                  std::span<const double> orient, double& t_end) {
    auto crossed = [&](double tau, std::span<const double> state) {
      for (std::size_t j : triggered_) {
        if (sys_.guard(j, tau, state, modes_, orient[j]) >= 0.0) return true;
      }
      return false;
    };

    double lo = t;
    double hi = t_new;
    if (cfg_.dispatch == Dispatch::BoundaryLeft) {
      DenseSegment seg{t, t_new, {y.begin(), y.end()}, {f.begin(), f.end()}, y1, f1};
      std::vector<double> probe(n_);
      while (hi - lo > cfg_.event_time_tol) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        seg.evaluate(mid, probe);
        if (crossed(mid, probe)) {
          hi = mid;
        } else {
          lo = mid;
        }
      }
      if (hi < t_new) {
        seg.evaluate(hi, y1);
        stepper_.eval(hi, y1, modes_, f1);
      }
    } else {
      std::vector<double> ytrial(n_), ftrial(n_);
      std::vector<double> yhi = y1, fhi = f1;
      while (hi - lo > cfg_.event_time_tol) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        stepper_.advance(t, y, f, modes_, mid - t, ytrial, ftrial);
        if (crossed(mid, ytrial)) {
          hi = mid;
          yhi = ytrial;
          fhi = ftrial;
        } else {
          lo = mid;
        }
      }
      y1 = std::move(yhi);
      f1 = std::move(fhi);
    }
    t_end = hi;
    return hi - lo;
  }

  bool apply_transitions(double t, std::span<const double> y, double bracket) {
    if (m_ == 0) return false;
    next_modes_ = modes_;
    bool changed = false;
    for (std::size_t j = 0; j < m_; ++j) {
      const Mode to = sys_.transition(j, t, y, modes_);
      if (to == modes_[j]) continue;
      changed = true;
      next_modes_[j] = to;
      const double orient = sys_.guard_orientation(j, t, y, modes_);
      report_.events.push_back(Event{t, j, modes_[j], to,
                                     sys_.guard(j, t, y, modes_, orient), bracket});
    }
    if (changed) modes_.swap(next_modes_);
    return changed;
  }

  void emit_grid(double ta, std::span<const double> ya, std::span<const double> fa,
                 double tb, std::span<const double> yb, std::span<const double> fb) {
    if (!options_.output_interval) return;
    DenseSegment seg;
    bool built = false;
    std::vector<double> out(n_);
    while (grid_next_ <= grid_last_) {
      double g = t0_ + static_cast<double>(grid_next_) * grid_step_;
      if (grid_next_ == grid_last_ || g > t1_) g = std::min(g, t1_);
      if (g > tb) break;
      if (!built) {
        seg = DenseSegment{ta, tb, {ya.begin(), ya.end()}, {fa.begin(), fa.end()},
                           {yb.begin(), yb.end()}, {fb.begin(), fb.end()}};
        built = true;
      }
      if (g == tb) {
        std::copy(yb.begin(), yb.end(), out.begin());
      } else {
        seg.evaluate(g, out);
      }
      observer_(g, out, modes_);
      ++grid_next_;
    }
  }

  const HybridSystem& sys_;
  const SolverConfig& cfg_;
  const Observer& observer_;
  const IntegrateOptions& options_;
  Stepper stepper_;
  std::size_t n_;
  std::size_t m_;
  std::vector<Mode> modes_, next_modes_;
  std::vector<std::size_t> triggered_;
  IntegrationReport report_;
  double t0_ = 0.0, t1_ = 0.0;
  double grid_step_ = 0.0;
  std::size_t grid_next_ = 0, grid_last_ = 0;
};

}  // namespace

StepResult step_adaptive(const HybridSystem& sys, double t,
                         std::span<const double> y,
                         std::span<const Mode> modes, double h,
                         const SolverConfig& cfg) {
  SolverConfig dp = cfg;
  dp.scheme = Scheme::AdaptiveRK45;
  Stepper stepper(sys, dp);
  std::vector<double> f0(y.size()), f1(y.size());
  StepResult r;
  r.y.resize(y.size());
  stepper.eval(t, y, modes, f0);
  r.error = stepper.advance(t, y, f0, modes, h, r.y, f1);
  r.accepted = std::isfinite(r.error) && r.error <= 1.0;
  r.suggested_step = r.accepted
                         ? next_step_size(h, r.error, cfg)
                         : std::max(cfg.min_step,
                                    h * std::clamp(0.9 * std::pow(r.error, -0.2), 0.2, 1.0));
  return r;
}

Event localize_event(const HybridSystem& sys, double t_lo, double t_hi,
                     const DenseSegment& segment, std::size_t j,
                     std::span<const Mode> modes, const SolverConfig& cfg) {
  const double orient = sys.guard_orientation(j, segment.t0, segment.y0, modes);
  std::vector<double> probe(segment.y0.size());
  auto guard_at = [&](double tau) {
    segment.evaluate(tau, probe);
    return sys.guard(j, tau, probe, modes, orient);
  };
  if (!(guard_at(t_lo) < 0.0 && guard_at(t_hi) >= 0.0)) {
    throw std::logic_error("localize_event: guard does not cross zero upward on the bracket");
  }
  double lo = t_lo;
  double hi = t_hi;
  while (hi - lo > cfg.event_time_tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (guard_at(mid) >= 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  Event ev;
  ev.time = hi;
  ev.element = j;
  ev.from = modes.empty() ? Mode::Stick : modes[j];
  ev.guard_value = guard_at(hi);
  segment.evaluate(hi, probe);
  ev.to = modes.empty() ? Mode::Stick : sys.transition(j, hi, probe, modes);
  ev.bracket = hi - lo;
  return ev;
}

IntegrationReport integrate(const HybridSystem& sys, double t0, double t1,
                            std::span<const double> y0,
                            std::span<const Mode> modes0,
                            const SolverConfig& cfg, const Observer& observer,
                            const IntegrateOptions& options) {
  cfg.validate();
  Integrator integrator(sys, cfg, observer, options);
  return integrator.run(t0, t1, y0, modes0);
}

Integration integrate(const HybridSystem& sys, double t0, double t1,
                      std::span<const double> y0, std::span<const Mode> modes0,
                      const SolverConfig& cfg, const IntegrateOptions& options) {
  Integration out;
  out.samples.dimension = sys.dimension();
  out.samples.modes = sys.mode_count();
  auto& s = out.samples;
  out.report = integrate(
      sys, t0, t1, y0, modes0, cfg,
      [&s](double t, std::span<const double> y, std::span<const Mode> m) {
        s.t.push_back(t);
        s.y.insert(s.y.end(), y.begin(), y.end());
        s.mode.insert(s.mode.end(), m.begin(), m.end());
      },
      options);
  return out;
}

}  // namespace gmsim
