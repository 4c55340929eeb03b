#pragma once

/**
 * \file analysis.hpp
 *
 * Metrics over finished traces: positional drift, break-away peak census,
 * directional asymmetry and residuals between two runs of one scenario.
 * All functions are pure.
 */

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gmsim/trace.hpp"

namespace gmsim {

struct TimeWindow {
  double start = 0.0;
  double end = 0.0;
  bool operator==(const TimeWindow&) const = default;
};

struct DriftReport {
  TimeWindow window;
  double averaging_period = 0.0;
  /// Least-squares slope of x (or of its moving period average) against t.
  double slope = 0.0;
  double net_displacement = 0.0;  ///< x(end) - x(start)
  double peak_to_peak = 0.0;      ///< max x - min x inside the window
  bool monotone = false;          ///< x never reverses inside the window
  std::size_t samples = 0;        ///< points entering the fit
};

/// OLS slope of x(t) over `window`.
///
/// With `averaging_period` P > 0 each sample x(t_k) is replaced by the mean
/// of the piecewise-linear interpolant over [t_k - P, t_k] before fitting,
/// and only samples with t_k - P >= window.start enter the fit. Choosing P
/// equal to the excitation period removes the periodic part so the slope
/// measures secular drift only.
DriftReport drift_slope(const Trace& trace, TimeWindow window,
                        double averaging_period = 0.0);

struct Peak {
  double time = 0.0;
  double magnitude = 0.0;  ///< |F| at the peak
  double prominence = 0.0;
};

struct HalfCycle {
  double start = 0.0;
  double end = 0.0;
  int direction = 0;  ///< sign of v, 0 if v never leaves the band
  std::vector<Peak> peaks;
};

struct BreakawayReport {
  double threshold = 0.0;
  double velocity_band = 0.0;
  std::vector<HalfCycle> half_cycles;

  std::size_t total_peaks() const noexcept;
  /// Time of the first sign change of v, if any.
  std::optional<double> first_reversal() const noexcept;
};

/// Splits the trace at sign changes of v (samples with |v| <= velocity_band
/// never start a new half-cycle) and reports the interior local maxima of
/// |F| whose topographic prominence within their half-cycle is at least
/// `prominence_threshold`. The band defaults to the `v_c` metadata entry,
/// or 0 when absent.
BreakawayReport breakaway_peaks(const Trace& trace, double prominence_threshold,
                                std::optional<double> velocity_band = std::nullopt);

/// 10% of the Coulomb level when the trace records `f_c`, else 5% of max |F|.
double default_prominence_threshold(const Trace& trace);

struct AsymmetryReport {
  double value = 0.0;
  double max_force = 0.0;
  double min_force = 0.0;
  double from_time = 0.0;  ///< start of the post-first-cycle data
  std::size_t half_cycles = 0;
};

/// |max F - |min F|| / max(max F, |min F|) over the samples after the first
/// full velocity cycle. Needs at least two full cycles.
AsymmetryReport asymmetry(const Trace& trace,
                          std::optional<double> velocity_band = std::nullopt);

struct ColumnResidual {
  std::string column;
  double max_abs = 0.0;
  double rms = 0.0;
  double max_time = 0.0;  ///< grid time of the largest difference
  std::vector<double> spike_times;  ///< |diff| > 10 * rms
};

struct ResidualReport {
  double grid_step = 0.0;
  TimeWindow span;
  std::size_t grid_points = 0;
  std::vector<ColumnResidual> columns;

  const ColumnResidual& at(std::string_view column) const;
};

/// Resamples both traces by linear interpolation onto t0 + k*grid_step and
/// compares F, x (closed loop) and every z_i.
ResidualReport residual_compare(const Trace& a, const Trace& b,
                                double grid_step = 1e-3);

}  // namespace gmsim
