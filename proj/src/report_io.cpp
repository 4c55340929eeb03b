#include <json.hpp>

#include "gmsim/io.hpp"

namespace gmsim {
namespace {

using ojson = nlohmann::ordered_json;

ojson window_json(const TimeWindow& w) { return ojson::array({w.start, w.end}); }

std::string dump(const ojson& j) { return j.dump(2) + "\n"; }

ojson event_json(const Event& e) {
  ojson j;
  j["time"] = e.time;
  j["element"] = e.element + 1;
  j["from"] = std::string(to_string(e.from));
  j["to"] = std::string(to_string(e.to));
  return j;
}

}  // namespace

std::string report_json(const DriftReport& r) {
  ojson j;
  j["report"] = "drift";
  j["window"] = window_json(r.window);
  j["averaging_period"] = r.averaging_period;
  j["slope"] = r.slope;
  j["net_displacement"] = r.net_displacement;
  j["peak_to_peak"] = r.peak_to_peak;
  j["monotone"] = r.monotone;
  j["samples"] = r.samples;
  return dump(j);
}

std::string report_json(const BreakawayReport& r) {
  ojson j;
  j["report"] = "breakaway";
  j["threshold"] = r.threshold;
  j["velocity_band"] = r.velocity_band;
  j["total_peaks"] = r.total_peaks();
  ojson cycles = ojson::array();
  for (const auto& h : r.half_cycles) {
    ojson c;
    c["start"] = h.start;
    c["end"] = h.end;
    c["direction"] = h.direction;
    ojson peaks = ojson::array();
    for (const auto& p : h.peaks) {
      peaks.push_back({{"time", p.time}, {"magnitude", p.magnitude}, {"prominence", p.prominence}});
    }
    c["peaks"] = peaks;
    cycles.push_back(c);
  }
  j["half_cycles"] = cycles;
  return dump(j);
}

std::string report_json(const AsymmetryReport& r) {
  ojson j;
  j["report"] = "asymmetry";
  j["value"] = r.value;
  j["max_force"] = r.max_force;
  j["min_force"] = r.min_force;
  j["from_time"] = r.from_time;
  j["half_cycles"] = r.half_cycles;
  return dump(j);
}

std::string report_json(const ResidualReport& r, const std::vector<Event>& events_a,
                        const std::vector<Event>& events_b) {
  ojson j;
  j["report"] = "residual";
  j["grid_step"] = r.grid_step;
  j["span"] = window_json(r.span);
  j["grid_points"] = r.grid_points;
  ojson cols = ojson::array();
  for (const auto& c : r.columns) {
    ojson o;
    o["column"] = c.column;
    o["max_abs"] = c.max_abs;
    o["rms"] = c.rms;
    o["max_time"] = c.max_time;
    o["spike_times"] = c.spike_times;
    cols.push_back(o);
  }
  j["columns"] = cols;
  for (const auto& [key, events] : {std::pair{"events_a", &events_a}, std::pair{"events_b", &events_b}}) {
    ojson arr = ojson::array();
    for (const auto& e : *events) arr.push_back(event_json(e));
    j[key] = arr;
  }
  return dump(j);
}

}  // namespace gmsim
