#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

#include "gmsim/errors.hpp"
#include "gmsim/io.hpp"

namespace gmsim {
namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

std::string join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

std::string describe(const json& j) {
  switch (j.type()) {
    case json::value_t::null: return "null";
    case json::value_t::boolean: return "a boolean";
    case json::value_t::string: return "a string";
    case json::value_t::array: return "an array";
    case json::value_t::object: return "an object";
    default: return "a number";
  }
}

[[noreturn]] void wrong_type(const std::string& field, std::string_view expected,
                             const json& got) {
  throw InvariantViolation(field + ": expected " + std::string(expected) + ", got " +
                               describe(got),
                           field);
}

double as_number(const json& j, const std::string& field) {
  if (!j.is_number()) wrong_type(field, "a number", j);
  return j.get<double>();
}

/// A JSON object that only admits a fixed key set.
class Object {
 public:
  Object(const json& j, std::string path, std::initializer_list<std::string_view> allowed)
      : j_(j), path_(std::move(path)) {
    if (!j.is_object()) wrong_type(path_.empty() ? "document" : path_, "an object", j);
    for (const auto& item : j.items()) {
      if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
        const std::string field = join(path_, item.key());
        std::string list;
        for (auto a : allowed) list += (list.empty() ? "" : ", ") + std::string(a);
        throw UnknownKeyError(field + ": unknown key (allowed: " + list + ")", field);
      }
    }
  }

  const std::string& path() const { return path_; }
  std::string field(std::string_view key) const { return join(path_, key); }
  bool has(std::string_view key) const { return j_.contains(std::string(key)); }

  const json& at(std::string_view key) const {
    auto it = j_.find(std::string(key));
    if (it == j_.end()) {
      throw InvariantViolation(field(key) + ": required field is missing", field(key));
    }
    return *it;
  }

  double number(std::string_view key) const { return as_number(at(key), field(key)); }
  double number(std::string_view key, double fallback) const {
    return has(key) ? number(key) : fallback;
  }

  std::string text(std::string_view key) const {
    const json& v = at(key);
    if (!v.is_string()) wrong_type(field(key), "a string", v);
    return v.get<std::string>();
  }

  std::vector<double> numbers(std::string_view key) const {
    const json& v = at(key);
    if (!v.is_array()) wrong_type(field(key), "an array of numbers", v);
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      out.push_back(as_number(v[i], field(key) + "[" + std::to_string(i) + "]"));
    }
    return out;
  }

  Object child(std::string_view key, std::initializer_list<std::string_view> allowed) const {
    return Object(at(key), field(key), allowed);
  }

 private:
  const json& j_;
  std::string path_;
};

template <class E>
E pick(const Object& o, std::string_view key,
       std::initializer_list<std::pair<std::string_view, E>> choices) {
  const std::string value = o.text(key);
  std::string list;
  for (const auto& [name, e] : choices) {
    if (name == value) return e;
    list += (list.empty() ? "" : ", ") + std::string(name);
  }
  throw InvariantViolation(o.field(key) + ": unknown value '" + value + "' (expected one of " +
                               list + ")",
                           o.field(key));
}

StribeckParams parse_stribeck(const Object& params) {
  const auto o = params.child("stribeck", {"f_c", "f_s", "v_s"});
  return StribeckParams{o.number("f_c"), o.number("f_s"), o.number("v_s")};
}

Model parse_model(const Object& root) {
  const auto model = root.child("model", {"type", "params"});
  const std::string type = model.text("type");
  if (type == "gms") {
    const auto p = model.child("params", {"k", "sigma", "c", "sigma2", "stribeck", "v_c",
                                          "slip_to_stick"});
    const auto k = p.numbers("k");
    const auto sigma = p.numbers("sigma");
    const auto c = p.numbers("c");
    for (const auto& [key, arr] : {std::pair{"sigma", &sigma}, std::pair{"c", &c}}) {
      if (arr->size() != k.size()) {
        std::ostringstream os;
        os << p.field(key) << ": expected " << k.size() << " values (one per entry of "
           << p.field("k") << "), got " << arr->size();
        throw LengthMismatchError(os.str(), p.field(key));
      }
    }
    GmsParams g;
    for (std::size_t i = 0; i < k.size(); ++i) g.elements.push_back({k[i], sigma[i], c[i]});
    g.sigma2 = p.number("sigma2");
    g.stribeck = parse_stribeck(p);
    g.v_c = p.number("v_c");
    if (p.has("slip_to_stick")) {
      g.slip_to_stick = pick<SlipToStickRule>(
          p, "slip_to_stick",
          {{"velocity", SlipToStickRule::Velocity},
           {"velocity-and-deflection", SlipToStickRule::VelocityAndDeflection}});
    }
    return g;
  }
  if (type == "lugre") {
    const auto p = model.child("params", {"sigma0", "sigma1", "sigma2", "stribeck"});
    LugreParams l;
    l.sigma0 = p.number("sigma0", l.sigma0);
    l.sigma1 = p.number("sigma1", l.sigma1);
    l.sigma2 = p.number("sigma2");
    l.stribeck = parse_stribeck(p);
    return l;
  }
  throw InvariantViolation(model.field("type") + ": unknown model '" + type +
                               "' (expected gms or lugre)",
                           model.field("type"));
}

Signal parse_signal(const Object& loop) {
  const json& raw = loop.at("signal");
  const std::string path = loop.field("signal");
  if (!raw.is_object()) wrong_type(path, "an object", raw);
  const auto type_it = raw.find("type");
  if (type_it == raw.end()) {
    throw InvariantViolation(path + ".type: required field is missing", path + ".type");
  }
  if (!type_it->is_string()) wrong_type(path + ".type", "a string", *type_it);
  const std::string type = type_it->get<std::string>();
  if (type == "ramp-then-sine") {
    Object s(raw, path, {"type", "ramp_target", "ramp_duration", "sine_amplitude",
                         "sine_frequency", "total_duration"});
    return RampThenSine{s.number("ramp_target"), s.number("ramp_duration"),
                        s.number("sine_amplitude"), s.number("sine_frequency"),
                        s.number("total_duration")};
  }
  if (type == "sine") {
    Object s(raw, path, {"type", "amplitude", "period", "duration"});
    return Sine{s.number("amplitude"), s.number("period"), s.number("duration")};
  }
  if (type == "constant") {
    Object s(raw, path, {"type", "value", "duration"});
    return Constant{s.number("value"), s.number("duration")};
  }
  if (type == "piecewise-linear") {
    Object s(raw, path, {"type", "breakpoints"});
    const json& arr = s.at("breakpoints");
    const std::string bp = s.field("breakpoints");
    if (!arr.is_array()) wrong_type(bp, "an array of [t, value] pairs", arr);
    PiecewiseLinear pl;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string idx = bp + "[" + std::to_string(i) + "]";
      if (!arr[i].is_array() || arr[i].size() != 2) wrong_type(idx, "a [t, value] pair", arr[i]);
      pl.breakpoints.push_back({as_number(arr[i][0], idx + "[0]"), as_number(arr[i][1], idx + "[1]")});
    }
    return pl;
  }
  throw InvariantViolation(path + ".type: unknown signal '" + type +
                               "' (expected ramp-then-sine, sine, constant or piecewise-linear)",
                           path + ".type");
}

Loop parse_loop(const Object& root) {
  const json& raw = root.at("loop");
  if (!raw.is_object()) wrong_type("loop", "an object", raw);
  const Object head(raw, "loop", {"type", "mass", "signal"});
  const std::string type = head.text("type");
  if (type == "closed") return ClosedLoop{head.number("mass"), parse_signal(head)};
  if (type == "open") {
    const Object o(raw, "loop", {"type", "signal"});
    return OpenLoop{parse_signal(o)};
  }
  throw InvariantViolation("loop.type: unknown loop '" + type + "' (expected closed or open)",
                           "loop.type");
}

InitialConditions parse_initial(const Object& root, const Model& model) {
  InitialConditions ic;
  const bool gms = std::holds_alternative<GmsParams>(model);
  const std::size_t n = gms ? std::get<GmsParams>(model).size() : 1;
  ic.z.assign(n, 0.0);
  if (gms) ic.modes.assign(n, Mode::Stick);
  if (!root.has("initial")) return ic;
  const auto o = root.child("initial", {"z", "modes", "x0", "v0"});
  if (o.has("z")) ic.z = o.numbers("z");
  if (o.has("modes")) {
    const json& arr = o.at("modes");
    if (!arr.is_array()) wrong_type(o.field("modes"), "an array of \"stick\"/\"slip\"", arr);
    ic.modes.clear();
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string idx = o.field("modes") + "[" + std::to_string(i) + "]";
      if (arr[i] == "stick") {
        ic.modes.push_back(Mode::Stick);
      } else if (arr[i] == "slip") {
        ic.modes.push_back(Mode::Slip);
      } else {
        throw InvariantViolation(idx + ": expected \"stick\" or \"slip\"", idx);
      }
    }
  }
  ic.x0 = o.number("x0", 0.0);
  ic.v0 = o.number("v0", 0.0);
  return ic;
}

SolverConfig parse_solver(const Object& root) {
  SolverConfig s;
  if (!root.has("solver")) return s;
  const auto o = root.child("solver", {"max_step", "min_step", "rel_tol", "abs_tol",
                                       "event_time_tol", "dispatch", "scheme", "fixed_step"});
  s.max_step = o.number("max_step", s.max_step);
  s.min_step = o.number("min_step", s.min_step);
  s.rel_tol = o.number("rel_tol", s.rel_tol);
  s.abs_tol = o.number("abs_tol", s.abs_tol);
  s.event_time_tol = o.number("event_time_tol", s.event_time_tol);
  s.fixed_step = o.number("fixed_step", s.fixed_step);
  if (o.has("dispatch")) {
    s.dispatch = pick<Dispatch>(o, "dispatch", {{"boundary-left", Dispatch::BoundaryLeft},
                                                {"boundary-right", Dispatch::BoundaryRight}});
  }
  if (o.has("scheme")) {
    s.scheme = pick<Scheme>(o, "scheme", {{"adaptive-rk45", Scheme::AdaptiveRK45},
                                          {"fixed-rk4", Scheme::FixedRK4}});
  }
  return s;
}

OutputPolicy parse_output(const Object& root) {
  OutputPolicy out;
  if (!root.has("output")) return out;
  const auto o = root.child("output", {"sampling", "interval", "columns"});
  if (o.has("sampling")) {
    out.sampling = pick<Sampling>(o, "sampling", {{"steps", Sampling::Steps},
                                                  {"uniform", Sampling::Uniform}});
  }
  out.interval = o.number("interval", out.interval);
  if (o.has("columns")) {
    const json& arr = o.at("columns");
    if (!arr.is_array()) wrong_type(o.field("columns"), "an array of column names", arr);
    for (std::size_t i = 0; i < arr.size(); ++i) {
      if (!arr[i].is_string()) {
        wrong_type(o.field("columns") + "[" + std::to_string(i) + "]", "a string", arr[i]);
      }
      out.columns.push_back(arr[i].get<std::string>());
    }
  }
  return out;
}

ojson signal_json(const Signal& sig) {
  ojson j;
  if (const auto* s = std::get_if<RampThenSine>(&sig)) {
    j["type"] = "ramp-then-sine";
    j["ramp_target"] = s->ramp_target;
    j["ramp_duration"] = s->ramp_duration;
    j["sine_amplitude"] = s->sine_amplitude;
    j["sine_frequency"] = s->sine_frequency;
    j["total_duration"] = s->total_duration;
  } else if (const auto* s = std::get_if<Sine>(&sig)) {
    j["type"] = "sine";
    j["amplitude"] = s->amplitude;
    j["period"] = s->period;
    j["duration"] = s->duration;
  } else if (const auto* s = std::get_if<Constant>(&sig)) {
    j["type"] = "constant";
    j["value"] = s->value;
    j["duration"] = s->duration;
  } else {
    const auto& pl = std::get<PiecewiseLinear>(sig);
    j["type"] = "piecewise-linear";
    j["breakpoints"] = ojson::array();
    for (const auto& b : pl.breakpoints) j["breakpoints"].push_back({b.t, b.value});
  }
  return j;
}

ojson stribeck_json(const StribeckParams& s) {
  ojson j;
  j["f_c"] = s.f_c;
  j["f_s"] = s.f_s;
  j["v_s"] = s.v_s;
  return j;
}

}  // namespace

Scenario parse_scenario(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    int line = 1;
    int column = 1;
    const std::size_t upto = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < upto; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    std::string msg = e.what();
    if (auto pos = msg.find("] "); pos != std::string::npos) msg = msg.substr(pos + 2);
    throw SyntaxError("line " + std::to_string(line) + ", column " + std::to_string(column) +
                          ": " + msg,
                      line, column);
  }

  const Object root(doc, "", {"name", "model", "loop", "initial", "solver", "output"});
  Scenario sc;
  if (root.has("name")) sc.name = root.text("name");
  sc.model = parse_model(root);
  sc.loop = parse_loop(root);
  sc.initial = parse_initial(root, sc.model);
  sc.solver = parse_solver(root);
  sc.output = parse_output(root);
  sc.validate();
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  return parse_scenario(read_text(path));
}

std::string serialize_scenario(const Scenario& sc) {
  ojson doc;
  doc["name"] = sc.name;

  ojson model;
  if (const auto* g = std::get_if<GmsParams>(&sc.model)) {
    model["type"] = "gms";
    ojson p;
    ojson k = ojson::array(), sigma = ojson::array(), c = ojson::array();
    for (const auto& e : g->elements) {
      k.push_back(e.k);
      sigma.push_back(e.sigma);
      c.push_back(e.c);
    }
    p["k"] = k;
    p["sigma"] = sigma;
    p["c"] = c;
    p["sigma2"] = g->sigma2;
    p["stribeck"] = stribeck_json(g->stribeck);
    p["v_c"] = g->v_c;
    p["slip_to_stick"] = g->slip_to_stick == SlipToStickRule::Velocity
                             ? "velocity"
                             : "velocity-and-deflection";
    model["params"] = p;
  } else {
    const auto& l = std::get<LugreParams>(sc.model);
    model["type"] = "lugre";
    ojson p;
    p["sigma0"] = l.sigma0;
    p["sigma1"] = l.sigma1;
    p["sigma2"] = l.sigma2;
    p["stribeck"] = stribeck_json(l.stribeck);
    model["params"] = p;
  }
  doc["model"] = model;

  ojson loop;
  if (const auto* c = std::get_if<ClosedLoop>(&sc.loop)) {
    loop["type"] = "closed";
    loop["mass"] = c->mass;
    loop["signal"] = signal_json(c->applied_force);
  } else {
    loop["type"] = "open";
    loop["signal"] = signal_json(std::get<OpenLoop>(sc.loop).velocity);
  }
  doc["loop"] = loop;

  ojson initial;
  initial["z"] = sc.initial.z;
  if (sc.is_gms()) {
    ojson modes = ojson::array();
    for (Mode m : sc.initial.modes) modes.push_back(std::string(to_string(m)));
    initial["modes"] = modes;
  }
  initial["x0"] = sc.initial.x0;
  initial["v0"] = sc.initial.v0;
  doc["initial"] = initial;

  ojson solver;
  solver["max_step"] = sc.solver.max_step;
  solver["min_step"] = sc.solver.min_step;
  solver["rel_tol"] = sc.solver.rel_tol;
  solver["abs_tol"] = sc.solver.abs_tol;
  solver["event_time_tol"] = sc.solver.event_time_tol;
  solver["dispatch"] = std::string(to_string(sc.solver.dispatch));
  solver["scheme"] = std::string(to_string(sc.solver.scheme));
  solver["fixed_step"] = sc.solver.fixed_step;
  doc["solver"] = solver;

  ojson output;
  output["sampling"] = sc.output.sampling == Sampling::Steps ? "steps" : "uniform";
  output["interval"] = sc.output.interval;
  output["columns"] = sc.output.columns;
  doc["output"] = output;

  return doc.dump(2) + "\n";
}

void save_scenario(const Scenario& sc, const std::filesystem::path& path) {
  write_text_atomic(path, serialize_scenario(sc));
}

}  // namespace gmsim
