#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "gmsim/errors.hpp"
#include "gmsim/io.hpp"

namespace gmsim {
namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 500.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 150.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string fmt(const char* pattern, double v) {
  char buf[64];
  const int n = std::snprintf(buf, sizeof buf, pattern, v);
  return std::string(buf, static_cast<std::size_t>(n));
}

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void settle() {
    if (!(lo <= hi)) {
      lo = 0.0;
      hi = 1.0;
    } else if (lo == hi) {
      const double pad = lo == 0.0 ? 1.0 : 0.05 * std::abs(lo);
      lo -= pad;
      hi += pad;
    }
  }
};

/// Roughly five ticks at 1, 2 or 5 times a power of ten.
std::vector<double> ticks(const Range& r) {
  const double raw = (r.hi - r.lo) / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * mag;
    if (step >= raw) break;
  }
  std::vector<double> out;
  for (double v = std::ceil(r.lo / step) * step; v <= r.hi + 1e-9 * step; v += step) {
    out.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
  }
  return out;
}

}  // namespace

std::string render_svg(const Trace& trace, const PlotSpec& spec) {
  if (spec.y.empty()) throw UnknownColumnError("plot needs at least one y column");
  const auto xs = trace.column(spec.x);
  std::vector<std::span<const double>> ys;
  for (const auto& name : spec.y) ys.push_back(trace.column(name));

  Range rx, ry;
  for (double v : xs) rx.add(v);
  for (const auto& col : ys) {
    for (double v : col) ry.add(v);
  }
  rx.settle();
  ry.settle();

  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  const auto px = [&](double v) { return kLeft + (v - rx.lo) / (rx.hi - rx.lo) * pw; };
  const auto py = [&](double v) { return kTop + (ry.hi - v) / (ry.hi - ry.lo) * ph; };

  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"500\" "
       "viewBox=\"0 0 800 500\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect x=\"0\" y=\"0\" width=\"800\" height=\"500\" fill=\"white\"/>\n";
  if (!spec.title.empty()) {
    s += "<text x=\"" + fmt("%.2f", kLeft + pw / 2) +
         "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" + escape(spec.title) +
         "</text>\n";
  }

  s += "<g stroke=\"#cccccc\" stroke-width=\"0.5\">\n";
  for (double t : ticks(rx)) {
    const std::string x = fmt("%.2f", px(t));
    s += "<line x1=\"" + x + "\" y1=\"" + fmt("%.2f", kTop) + "\" x2=\"" + x + "\" y2=\"" +
         fmt("%.2f", kTop + ph) + "\"/>\n";
  }
  for (double t : ticks(ry)) {
    const std::string y = fmt("%.2f", py(t));
    s += "<line x1=\"" + fmt("%.2f", kLeft) + "\" y1=\"" + y + "\" x2=\"" +
         fmt("%.2f", kLeft + pw) + "\" y2=\"" + y + "\"/>\n";
  }
  s += "</g>\n";
  s += "<rect x=\"" + fmt("%.2f", kLeft) + "\" y=\"" + fmt("%.2f", kTop) + "\" width=\"" +
       fmt("%.2f", pw) + "\" height=\"" + fmt("%.2f", ph) +
       "\" fill=\"none\" stroke=\"black\"/>\n";

  s += "<g text-anchor=\"middle\">\n";
  for (double t : ticks(rx)) {
    s += "<text x=\"" + fmt("%.2f", px(t)) + "\" y=\"" + fmt("%.2f", kTop + ph + 16) + "\">" +
         fmt("%g", t) + "</text>\n";
  }
  s += "</g>\n<g text-anchor=\"end\">\n";
  for (double t : ticks(ry)) {
    s += "<text x=\"" + fmt("%.2f", kLeft - 6) + "\" y=\"" + fmt("%.2f", py(t) + 4) + "\">" +
         fmt("%g", t) + "</text>\n";
  }
  s += "</g>\n";

  std::string ylabel;
  for (const auto& n : spec.y) ylabel += (ylabel.empty() ? "" : ", ") + n;
  s += "<text x=\"" + fmt("%.2f", kLeft + pw / 2) + "\" y=\"" + fmt("%.2f", kHeight - 18) +
       "\" text-anchor=\"middle\">" + escape(spec.x) + "</text>\n";
  s += "<text x=\"18\" y=\"" + fmt("%.2f", kTop + ph / 2) +
       "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " + fmt("%.2f", kTop + ph / 2) +
       ")\">" + escape(ylabel) + "</text>\n";

  for (std::size_t c = 0; c < ys.size(); ++c) {
    const char* color = kPalette[c % std::size(kPalette)];
    s += "<polyline fill=\"none\" stroke=\"";
    s += color;
    s += "\" stroke-width=\"1\" points=\"";
    std::string last;
    bool first = true;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      if (!std::isfinite(xs[k]) || !std::isfinite(ys[c][k])) continue;
      std::string pt = fmt("%.2f", px(xs[k])) + "," + fmt("%.2f", py(ys[c][k]));
      if (pt == last) continue;
      if (!first) s += ' ';
      s += pt;
      last = std::move(pt);
      first = false;
    }
    s += "\"/>\n";
    const double ly = kTop + 12 + 18 * static_cast<double>(c);
    const double lx = kLeft + pw + 14;
    s += "<line x1=\"" + fmt("%.2f", lx) + "\" y1=\"" + fmt("%.2f", ly) + "\" x2=\"" +
         fmt("%.2f", lx + 24) + "\" y2=\"" + fmt("%.2f", ly) + "\" stroke=\"" + color +
         "\" stroke-width=\"2\"/>\n";
    s += "<text x=\"" + fmt("%.2f", lx + 30) + "\" y=\"" + fmt("%.2f", ly + 4) + "\">" +
         escape(spec.y[c]) + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

void emit_plot(const Trace& trace, const PlotSpec& spec, const std::filesystem::path& out) {
  write_text_atomic(out, render_svg(trace, spec));
}

}  // namespace gmsim
