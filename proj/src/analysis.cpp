#include "gmsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "gmsim/errors.hpp"

namespace gmsim {
namespace {

struct Segment {
  std::size_t begin = 0;
  std::size_t end = 0;
  int direction = 0;
};

std::vector<Segment> split_half_cycles(std::span<const double> v, double band) {
  std::vector<Segment> out;
  if (v.empty()) return out;
  Segment cur;
  for (std::size_t k = 0; k < v.size(); ++k) {
    const int s = v[k] > band ? 1 : (v[k] < -band ? -1 : 0);
    if (s == 0) continue;
    if (cur.direction == 0) {
      cur.direction = s;
    } else if (s != cur.direction) {
      cur.end = k;
      out.push_back(cur);
      cur = Segment{k, 0, s};
    }
  }
  cur.end = v.size();
  out.push_back(cur);
  return out;
}

double velocity_band(const Trace& trace, std::optional<double> band) {
  double b = 0.0;
  if (band) {
    b = *band;
  } else if (auto it = trace.metadata.find("v_c"); it != trace.metadata.end()) {
    try {
      b = std::stod(it->second);
    } catch (const std::exception&) {
      throw UnsupportedTraceError("trace metadata 'v_c' is not a number: " + it->second);
    }
  }
  if (!std::isfinite(b) || b < 0.0) {
    throw ParameterError("velocity band must be finite and >= 0");
  }
  return b;
}

void require_column(const Trace& trace, std::string_view name, std::string_view op) {
  if (!trace.has(name)) {
    throw UnsupportedTraceError(std::string(op) + " needs column '" + std::string(name) +
                                "'");
  }
}

/// Topographic prominence of the peak occupying [lo, hi] (a plateau when
/// lo < hi) inside a[b, e).
double prominence(std::span<const double> a, std::size_t b, std::size_t e,
                  std::size_t lo, std::size_t hi) {
  const double top = a[lo];
  double left_min = top;
  for (std::size_t l = lo; l-- > b;) {
    if (a[l] > top) break;
    left_min = std::min(left_min, a[l]);
  }
  double right_min = top;
  for (std::size_t r = hi + 1; r < e; ++r) {
    if (a[r] > top) break;
    right_min = std::min(right_min, a[r]);
  }
  return top - std::max(left_min, right_min);
}

void find_peaks(std::span<const double> t, std::span<const double> a, std::size_t b,
                std::size_t e, double threshold, std::vector<Peak>& out) {
  std::size_t i = b + 1;
  while (i + 1 < e) {
    if (!(a[i - 1] < a[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < e && a[j + 1] == a[i]) ++j;
    if (j + 1 < e && a[j + 1] < a[i]) {
      const double p = prominence(a, b, e, i, j);
      if (p >= threshold) {
        const std::size_t mid = i + (j - i) / 2;
        out.push_back(Peak{t[mid], a[mid], p});
      }
    }
    i = j + 1;
  }
}

/// Linear resampling of (t, y) onto an increasing grid.
std::vector<double> resample(std::span<const double> t, std::span<const double> y,
                             const std::vector<double>& grid) {
  std::vector<double> out(grid.size());
  std::size_t k = 0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double tau = grid[g];
    if (tau <= t.front()) {
      out[g] = y.front();
      continue;
    }
    if (tau >= t.back()) {
      out[g] = y.back();
      continue;
    }
    while (k + 1 < t.size() && t[k + 1] <= tau) ++k;
    const double w = (tau - t[k]) / (t[k + 1] - t[k]);
    out[g] = w == 0.0 ? y[k] : y[k] + w * (y[k + 1] - y[k]);
  }
  return out;
}

}  // namespace

DriftReport drift_slope(const Trace& trace, TimeWindow window, double averaging_period) {
  require_column(trace, "x", "drift analysis");
  if (!std::isfinite(averaging_period) || averaging_period < 0.0) {
    throw ParameterError("averaging period must be finite and >= 0");
  }
  const auto t = trace.column("t");
  const auto x = trace.column("x");
  if (t.size() < 2) throw ParameterError("drift analysis needs at least 2 samples");
  if (!(window.start < window.end) || window.start < t.front() || window.end > t.back()) {
    std::ostringstream os;
    os.precision(17);
    os << "window [" << window.start << ", " << window.end << "] is not inside the trace domain ["
       << t.front() << ", " << t.back() << "]";
    throw ParameterError(os.str());
  }

  const double P = averaging_period;
  // Running integral of the piecewise-linear interpolant of x.
  std::vector<double> integral;
  if (P > 0.0) {
    integral.resize(t.size());
    integral[0] = 0.0;
    for (std::size_t k = 1; k < t.size(); ++k) {
      integral[k] = integral[k - 1] + 0.5 * (t[k] - t[k - 1]) * (x[k] + x[k - 1]);
    }
  }
  const auto integral_at = [&](double tau) {
    auto it = std::upper_bound(t.begin(), t.end(), tau);
    std::size_t j = static_cast<std::size_t>(it - t.begin());
    j = j == 0 ? 0 : j - 1;
    if (j + 1 >= t.size()) return integral.back();
    const double xt = interpolate(t, x, tau);
    return integral[j] + 0.5 * (tau - t[j]) * (x[j] + xt);
  };

  std::vector<double> ts, ys;
  DriftReport rep;
  rep.window = window;
  rep.averaging_period = P;
  double lo = interpolate(t, x, window.start);
  double hi = lo;
  bool up = true;
  bool down = true;
  double prev = lo;
  const double slack = 1e-12 * std::max(1.0, std::abs(window.end));
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (t[k] < window.start || t[k] > window.end) continue;
    lo = std::min(lo, x[k]);
    hi = std::max(hi, x[k]);
    up = up && x[k] >= prev;
    down = down && x[k] <= prev;
    prev = x[k];
    if (P > 0.0) {
      if (t[k] - P < window.start - slack) continue;
      ts.push_back(t[k]);
      ys.push_back((integral[k] - integral_at(t[k] - P)) / P);
    } else {
      ts.push_back(t[k]);
      ys.push_back(x[k]);
    }
  }
  const double x_end = interpolate(t, x, window.end);
  lo = std::min(lo, x_end);
  hi = std::max(hi, x_end);
  up = up && x_end >= prev;
  down = down && x_end <= prev;

  if (ts.size() < 10) {
    throw ParameterError("drift window holds " + std::to_string(ts.size()) +
                         " usable samples, at least 10 are required");
  }
  const double n = static_cast<double>(ts.size());
  double tm = 0.0, ym = 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    tm += ts[k];
    ym += ys[k];
  }
  tm /= n;
  ym /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    sxy += (ts[k] - tm) * (ys[k] - ym);
    sxx += (ts[k] - tm) * (ts[k] - tm);
  }
  rep.slope = sxy / sxx;
  rep.net_displacement = x_end - interpolate(t, x, window.start);
  rep.peak_to_peak = hi - lo;
  rep.monotone = up || down;
  rep.samples = ts.size();
  return rep;
}

std::size_t BreakawayReport::total_peaks() const noexcept {
  std::size_t n = 0;
  for (const auto& h : half_cycles) n += h.peaks.size();
  return n;
}

std::optional<double> BreakawayReport::first_reversal() const noexcept {
  if (half_cycles.size() < 2) return std::nullopt;
  return half_cycles[1].start;
}

BreakawayReport breakaway_peaks(const Trace& trace, double prominence_threshold,
                                std::optional<double> band) {
  if (!std::isfinite(prominence_threshold) || prominence_threshold <= 0.0) {
    throw ParameterError("prominence threshold must be > 0");
  }
  require_column(trace, "F", "break-away analysis");
  require_column(trace, "v", "break-away analysis");
  BreakawayReport rep;
  rep.threshold = prominence_threshold;
  rep.velocity_band = velocity_band(trace, band);
  const auto t = trace.column("t");
  const auto v = trace.column("v");
  const auto F = trace.column("F");
  if (t.empty()) return rep;

  std::vector<double> mag(F.size());
  std::transform(F.begin(), F.end(), mag.begin(), [](double f) { return std::abs(f); });
  for (const auto& seg : split_half_cycles(v, rep.velocity_band)) {
    HalfCycle h;
    h.start = t[seg.begin];
    h.end = seg.end < t.size() ? t[seg.end] : t.back();
    h.direction = seg.direction;
    find_peaks(t, mag, seg.begin, seg.end, prominence_threshold, h.peaks);
    rep.half_cycles.push_back(std::move(h));
  }
  return rep;
}

double default_prominence_threshold(const Trace& trace) {
  if (auto it = trace.metadata.find("f_c"); it != trace.metadata.end()) {
    double fc = 0.0;
    try {
      fc = std::stod(it->second);
    } catch (const std::exception&) {
      throw UnsupportedTraceError("trace metadata 'f_c' is not a number: " + it->second);
    }
    if (std::isfinite(fc) && fc > 0.0) return 0.1 * fc;
  }
  require_column(trace, "F", "break-away analysis");
  double m = 0.0;
  for (double f : trace.column("F")) m = std::max(m, std::abs(f));
  if (!(m > 0.0)) throw UndefinedMetricError("friction force is identically zero");
  return 0.05 * m;
}

AsymmetryReport asymmetry(const Trace& trace, std::optional<double> band) {
  require_column(trace, "F", "asymmetry analysis");
  require_column(trace, "v", "asymmetry analysis");
  const auto t = trace.column("t");
  const auto F = trace.column("F");
  const auto segs = split_half_cycles(trace.column("v"), velocity_band(trace, band));
  if (segs.size() < 4) {
    throw ParameterError("asymmetry needs at least two full velocity cycles, trace has " +
                         std::to_string(segs.size()) + " half-cycles");
  }
  AsymmetryReport rep;
  rep.half_cycles = segs.size();
  const std::size_t from = segs[2].begin;
  rep.from_time = t[from];
  rep.max_force = -std::numeric_limits<double>::infinity();
  rep.min_force = std::numeric_limits<double>::infinity();
  for (std::size_t k = from; k < F.size(); ++k) {
    rep.max_force = std::max(rep.max_force, F[k]);
    rep.min_force = std::min(rep.min_force, F[k]);
  }
  const double denom = std::max(rep.max_force, std::abs(rep.min_force));
  if (!(denom > 0.0)) {
    throw UndefinedMetricError("asymmetry is undefined for identically zero friction");
  }
  rep.value = std::abs(rep.max_force - std::abs(rep.min_force)) / denom;
  return rep;
}

const ColumnResidual& ResidualReport::at(std::string_view column) const {
  for (const auto& c : columns) {
    if (c.column == column) return c;
  }
  throw UnknownColumnError("residual report has no column '" + std::string(column) + "'");
}

ResidualReport residual_compare(const Trace& a, const Trace& b, double grid_step) {
  if (!std::isfinite(grid_step) || grid_step <= 0.0) {
    throw ParameterError("grid step must be > 0");
  }
  if (a.loop() != b.loop() || a.elements() != b.elements()) {
    throw IncompatibleTraceError("traces differ in loop kind or element count");
  }
  std::vector<std::string> names{"F"};
  if (a.loop() == LoopKind::Closed) names.emplace_back("x");
  for (std::size_t i = 1; i <= a.elements(); ++i) names.push_back("z_" + std::to_string(i));
  for (const auto& n : names) {
    if (!a.has(n) || !b.has(n)) {
      throw IncompatibleTraceError("column '" + n + "' is missing from one of the traces");
    }
  }
  if (a.rows() < 2 || b.rows() < 2) {
    throw IncompatibleTraceError("both traces need at least 2 rows");
  }
  const auto ta = a.column("t");
  const auto tb = b.column("t");
  const double tol = 1e-9 * std::max({1.0, std::abs(ta.back()), std::abs(tb.back())});
  if (std::abs(ta.front() - tb.front()) > tol || std::abs(ta.back() - tb.back()) > tol) {
    std::ostringstream os;
    os.precision(17);
    os << "traces cover different horizons: [" << ta.front() << ", " << ta.back() << "] vs ["
       << tb.front() << ", " << tb.back() << "]";
    throw IncompatibleTraceError(os.str());
  }

  ResidualReport rep;
  rep.grid_step = grid_step;
  rep.span = {std::max(ta.front(), tb.front()), std::min(ta.back(), tb.back())};
  const auto count =
      static_cast<std::size_t>(std::floor((rep.span.end - rep.span.start) / grid_step + 1e-9)) + 1;
  std::vector<double> grid(count);
  for (std::size_t k = 0; k < count; ++k) {
    grid[k] = std::min(rep.span.start + static_cast<double>(k) * grid_step, rep.span.end);
  }
  rep.grid_points = count;

  for (const auto& n : names) {
    const auto ya = resample(ta, a.column(n), grid);
    const auto yb = resample(tb, b.column(n), grid);
    ColumnResidual c;
    c.column = n;
    double sq = 0.0;
    std::vector<double> d(count);
    for (std::size_t k = 0; k < count; ++k) {
      d[k] = std::abs(ya[k] - yb[k]);
      sq += d[k] * d[k];
      if (d[k] > c.max_abs) {
        c.max_abs = d[k];
        c.max_time = grid[k];
      }
    }
    c.rms = std::sqrt(sq / static_cast<double>(count));
    if (c.rms > 0.0) {
      for (std::size_t k = 0; k < count; ++k) {
        if (d[k] > 10.0 * c.rms) c.spike_times.push_back(grid[k]);
      }
    }
    rep.columns.push_back(std::move(c));
  }
  return rep;
}

}  // namespace gmsim
