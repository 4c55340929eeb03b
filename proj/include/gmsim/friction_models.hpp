#pragma once

/**
 * \file friction_models.hpp
 *
 * Constitutive laws for the Generalized Maxwell Slip (GMS) and LuGre friction
 * models. Everything here is a pure function of its arguments.
 *
 * GMS: n parallel elements share the relative velocity v. Element i carries a
 * deflection z_i and a mode (Stick or Slip):
 *
 *   Stick:  dz_i/dt = v
 *   Slip:   dz_i/dt = sgn(v) * c_i * (1 - z_i / s(v))
 *
 *   s(v)  = f_c + (f_s - f_c) * exp(-(v / v_s)^2)
 *   F_i   = k_i * z_i + sigma_i * dz_i/dt
 *   F     = sum_i F_i + sigma2 * v
 *
 * The deflection z_i is compared directly against s(v). Dimensionally s(v) is
 * read as the maximum element deflection before the bristle lets go; the
 * equations are implemented literally, so z and s share whatever unit the
 * parameter set implies.
 *
 * LuGre: single averaged bristle state,
 *
 *   dz/dt = v - sigma0 * |v| * z / g(v),   g = s (same Stribeck curve)
 *   F     = sigma0 * z + sigma1 * dz/dt + sigma2 * v
 */

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gmsim {

struct StribeckParams {
  double f_c = 1.0;    ///< Coulomb level
  double f_s = 1.5;    ///< stiction level
  double v_s = 1e-3;   ///< Stribeck velocity

  /// Throws InvariantViolation naming `path.<field>`.
  void validate(const std::string& path = "stribeck") const;
  bool operator==(const StribeckParams&) const = default;
};

struct GmsElementParams {
  double k = 0.0;      ///< stiffness
  double sigma = 0.0;  ///< micro-viscosity
  double c = 1.0;      ///< attraction rate

  bool operator==(const GmsElementParams&) const = default;
};

/// Which condition returns a slipping element to Stick.
enum class SlipToStickRule : std::uint8_t {
  /// |v| <= v_c only.
  Velocity,
  /// |v| <= v_c and |z| <= s(v).
  VelocityAndDeflection,
};

struct GmsParams {
  std::vector<GmsElementParams> elements;
  double sigma2 = 0.0;
  StribeckParams stribeck;
  double v_c = 1e-6;
  SlipToStickRule slip_to_stick = SlipToStickRule::Velocity;

  std::size_t size() const noexcept { return elements.size(); }
  double total_stiffness() const noexcept;
  double total_micro_viscosity() const noexcept;

  void validate(const std::string& path = "params") const;
  bool operator==(const GmsParams&) const = default;
};

enum class Mode : std::uint8_t { Stick = 0, Slip = 1 };

std::string_view to_string(Mode m) noexcept;

struct GmsState {
  std::vector<double> z;
  std::vector<Mode> mode;

  /// All-stuck state at zero deflection.
  static GmsState at_rest(std::size_t n);
  bool operator==(const GmsState&) const = default;
};

struct LugreParams {
  double sigma0 = 1e3;
  double sigma1 = 31.6;
  double sigma2 = 0.0;
  StribeckParams stribeck;

  void validate(const std::string& path = "params") const;
  bool operator==(const LugreParams&) const = default;
};

struct LugreState {
  double z = 0.0;
};

/// sgn with sgn(0) = 0.
constexpr double sgn(double v) noexcept {
  return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
}

double stribeck(double v, const StribeckParams& p) noexcept;

double gms_element_rate(double z, double v, Mode mode,
                        const GmsElementParams& e, double s) noexcept;

Mode gms_transition(Mode mode, double z, double v, double s, double v_c,
                    SlipToStickRule rule = SlipToStickRule::Velocity) noexcept;

/// Continuous switching function for one element; the transition predicate
/// holds wherever this is non-negative (up to the strict `|v| > v_c` edge).
///
/// In Slip the velocity band test is oriented by `slip_direction`, the sign
/// of v when the element entered slip, so that a step which jumps clean over
/// the band |v| <= v_c still shows a sign change.
double gms_guard(Mode mode, double z, double v, double s, double v_c,
                 double slip_direction,
                 SlipToStickRule rule = SlipToStickRule::Velocity) noexcept;

double gms_element_force(double z, double zdot,
                         const GmsElementParams& e) noexcept;

struct GmsRhs {
  std::vector<double> zdot;
  std::vector<double> force;
  double total = 0.0;
};

/// Per-element rates and forces plus total friction. Modes are read only.
/// Throws ConfigurationError on a length mismatch.
GmsRhs gms_rhs(const GmsState& state, double v, const GmsParams& p);

/// Allocation-free variant used by the integrator. `zdot` and `force` must
/// have length p.size(); returns the total friction force.
double gms_rhs(std::span<const double> z, std::span<const Mode> modes,
               double v, const GmsParams& p, std::span<double> zdot,
               std::span<double> force);

double lugre_rate(double z, double v, const LugreParams& p) noexcept;

double lugre_force(double z, double zdot, double v,
                   const LugreParams& p) noexcept;

}  // namespace gmsim
