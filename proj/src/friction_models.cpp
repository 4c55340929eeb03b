#include "gmsim/friction_models.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gmsim/errors.hpp"

namespace gmsim {

namespace {

[[noreturn]] void violated(const std::string& field, const std::string& rule,
                           double value) {
  std::ostringstream os;
  os << field << ": " << rule << " (got " << value << ")";
  throw InvariantViolation(os.str(), field);
}

bool finite(double v) { return std::isfinite(v); }

}  // namespace

void StribeckParams::validate(const std::string& path) const {
  if (!finite(f_c) || f_c <= 0.0) violated(path + ".f_c", "must be > 0", f_c);
  if (!finite(f_s) || f_s < f_c) violated(path + ".f_s", "must be >= f_c", f_s);
  if (!finite(v_s) || v_s <= 0.0) violated(path + ".v_s", "must be > 0", v_s);
}

double GmsParams::total_stiffness() const noexcept {
  double sum = 0.0;
  for (const auto& e : elements) sum += e.k;
  return sum;
}

double GmsParams::total_micro_viscosity() const noexcept {
  double sum = 0.0;
  for (const auto& e : elements) sum += e.sigma;
  return sum;
}

void GmsParams::validate(const std::string& path) const {
  if (elements.empty()) {
    throw InvariantViolation(path + ".k: at least one element is required",
                             path + ".k");
  }
  for (std::size_t i = 0; i < elements.size(); ++i) {
    const auto& e = elements[i];
    const std::string idx = "[" + std::to_string(i) + "]";
    if (!finite(e.k) || e.k < 0.0) violated(path + ".k" + idx, "must be >= 0", e.k);
    if (!finite(e.sigma) || e.sigma < 0.0)
      violated(path + ".sigma" + idx, "must be >= 0", e.sigma);
    if (!finite(e.c) || e.c <= 0.0) violated(path + ".c" + idx, "must be > 0", e.c);
  }
  if (!finite(sigma2) || sigma2 < 0.0) violated(path + ".sigma2", "must be >= 0", sigma2);
  stribeck.validate(path + ".stribeck");
  if (!finite(v_c) || v_c <= 0.0) violated(path + ".v_c", "must be > 0", v_c);
  if (v_c >= stribeck.v_s) violated(path + ".v_c", "must be < stribeck.v_s", v_c);
}

std::string_view to_string(Mode m) noexcept {
  return m == Mode::Stick ? "stick" : "slip";
}

GmsState GmsState::at_rest(std::size_t n) {
  return GmsState{std::vector<double>(n, 0.0), std::vector<Mode>(n, Mode::Stick)};
}

void LugreParams::validate(const std::string& path) const {
  if (!finite(sigma0) || sigma0 <= 0.0) violated(path + ".sigma0", "must be > 0", sigma0);
  if (!finite(sigma1) || sigma1 < 0.0) violated(path + ".sigma1", "must be >= 0", sigma1);
  if (!finite(sigma2) || sigma2 < 0.0) violated(path + ".sigma2", "must be >= 0", sigma2);
  stribeck.validate(path + ".stribeck");
}

double stribeck(double v, const StribeckParams& p) noexcept {
  const double r = v / p.v_s;
  return p.f_c + (p.f_s - p.f_c) * std::exp(-(r * r));
}

double gms_element_rate(double z, double v, Mode mode,
                        const GmsElementParams& e, double s) noexcept {
  if (mode == Mode::Stick) return v;
  return sgn(v) * e.c * (1.0 - z / s);
}

Mode gms_transition(Mode mode, double z, double v, double s, double v_c,
                    SlipToStickRule rule) noexcept {
  if (mode == Mode::Stick) {
    const bool forward = z >= s && v > v_c;
    const bool backward = z <= -s && v < -v_c;
    return (forward || backward) ? Mode::Slip : Mode::Stick;
  }
  bool stick = std::abs(v) <= v_c;
  if (rule == SlipToStickRule::VelocityAndDeflection) stick = stick && std::abs(z) <= s;
  return stick ? Mode::Stick : Mode::Slip;
}

double gms_guard(Mode mode, double z, double v, double s, double v_c,
                 double slip_direction, SlipToStickRule rule) noexcept {
  if (mode == Mode::Stick) {
    return std::max(std::min(z - s, v - v_c), std::min(-z - s, -v - v_c));
  }
  const double band = slip_direction == 0.0 ? v_c - std::abs(v)
                                            : v_c - slip_direction * v;
  if (rule == SlipToStickRule::VelocityAndDeflection) {
    return std::min(band, s - std::abs(z));
  }
  return band;
}

double gms_element_force(double z, double zdot,
                         const GmsElementParams& e) noexcept {
  return e.k * z + e.sigma * zdot;
}

GmsRhs gms_rhs(const GmsState& state, double v, const GmsParams& p) {
  if (state.z.size() != p.size() || state.mode.size() != p.size()) {
    std::ostringstream os;
    os << "GMS state has " << state.z.size() << " deflections and "
       << state.mode.size() << " modes but the parameters define " << p.size()
       << " elements";
    throw ConfigurationError(os.str());
  }
  GmsRhs out;
  out.zdot.resize(p.size());
  out.force.resize(p.size());
  out.total = gms_rhs(state.z, state.mode, v, p, out.zdot, out.force);
  return out;
}

double gms_rhs(std::span<const double> z, std::span<const Mode> modes,
               double v, const GmsParams& p, std::span<double> zdot,
               std::span<double> force) {
  const double s = stribeck(v, p.stribeck);
  double total = p.sigma2 * v;
  for (std::size_t i = 0; i < p.size(); ++i) {
    zdot[i] = gms_element_rate(z[i], v, modes[i], p.elements[i], s);
    force[i] = gms_element_force(z[i], zdot[i], p.elements[i]);
    total += force[i];
  }
  return total;
}

double lugre_rate(double z, double v, const LugreParams& p) noexcept {
  const double g = stribeck(v, p.stribeck);
  return v - p.sigma0 * std::abs(v) * z / g;
}

double lugre_force(double z, double zdot, double v,
                   const LugreParams& p) noexcept {
  return p.sigma0 * z + p.sigma1 * zdot + p.sigma2 * v;
}

}  // namespace gmsim
