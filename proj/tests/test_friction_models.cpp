#include <doctest.h>

#include <cmath>
#include <random>

#include "gmsim/errors.hpp"
#include "gmsim/friction_models.hpp"
#include "gmsim/scenarios.hpp"

using namespace gmsim;

namespace {

const StribeckParams kNonDrifting{1.0, 1.5, 1e-3};

GmsParams non_drifting_params() { return std::get<GmsParams>(preset("non-drifting").model); }

// Transition rules written out independently of the library.
Mode oracle_transition(Mode m, double z, double v, double s, double v_c, bool deflection_rule) {
  if (m == Mode::Stick) {
    if (z >= s && v > v_c) return Mode::Slip;
    if (z <= -s && v < -v_c) return Mode::Slip;
    return Mode::Stick;
  }
  if (std::abs(v) <= v_c && (!deflection_rule || std::abs(z) <= s)) return Mode::Stick;
  return Mode::Slip;
}

}  // namespace

TEST_SUITE("friction-models") {

TEST_CASE("stribeck curve anchors") {
  CHECK(stribeck(0.0, kNonDrifting) == 1.5);
  CHECK(stribeck(0.001, kNonDrifting) == doctest::Approx(1.0 + 0.5 * std::exp(-1.0)).epsilon(1e-15));
  CHECK(stribeck(0.001, kNonDrifting) == doctest::Approx(1.1839397205857212).epsilon(1e-15));
  CHECK(std::abs(stribeck(1.0, kNonDrifting) - 1.0) <= 1e-12);
  CHECK(std::abs(stribeck(-1.0, kNonDrifting) - 1.0) <= 1e-12);
}

TEST_CASE("stribeck bounds and evenness over random velocities") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> logv(-9.0, 2.0);
  std::uniform_real_distribution<double> level(0.01, 5.0);
  for (int i = 0; i < 5000; ++i) {
    const double fc = level(rng);
    const StribeckParams p{fc, fc + level(rng), std::pow(10.0, logv(rng))};
    const double v = std::pow(10.0, logv(rng));
    const double s = stribeck(v, p);
    CHECK(s >= p.f_c);
    CHECK(s <= p.f_s);
    CHECK(stribeck(-v, p) == s);
  }
}

TEST_CASE("element rate branches") {
  const GmsElementParams e{0.7, 0.3, 0.1};
  CHECK(gms_element_rate(0.3, 0.02, Mode::Stick, e, 1.5) == 0.02);
  CHECK(gms_element_rate(1.5, 0.01, Mode::Slip, e, 1.5) == 0.0);
  CHECK(gms_element_rate(1.5, 0.01, Mode::Slip, GmsElementParams{1, 1, 37.0}, 1.5) == 0.0);
  CHECK(gms_element_rate(0.75, 0.01, Mode::Slip, e, 1.5) == doctest::Approx(0.05).epsilon(1e-15));
  CHECK(gms_element_rate(-0.75, -0.01, Mode::Slip, e, 1.5) ==
        doctest::Approx(-0.15).epsilon(1e-15));
  CHECK(gms_element_rate(0.75, 0.0, Mode::Slip, e, 1.5) == 0.0);
}

TEST_CASE("slip fixed point holds for every v and c") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng);
    const double c = std::abs(u(rng)) + 1e-3;
    const double s = stribeck(v, kNonDrifting);
    CHECK(gms_element_rate(s, v, Mode::Slip, GmsElementParams{1.0, 1.0, c}, s) == 0.0);
  }
}

TEST_CASE("transition examples") {
  CHECK(gms_transition(Mode::Stick, 1.5, 0.01, 1.5, 1e-6) == Mode::Slip);
  CHECK(gms_transition(Mode::Stick, 1.4, 0.01, 1.5, 1e-6) == Mode::Stick);
  CHECK(gms_transition(Mode::Slip, 1.5, 5e-7, 1.5, 1e-6) == Mode::Stick);
  CHECK(gms_transition(Mode::Stick, 1.6, 5e-7, 1.5, 1e-6) == Mode::Stick);
  CHECK(gms_transition(Mode::Stick, -1.6, -0.01, 1.5, 1e-6) == Mode::Slip);
  // Deflection variant keeps a slipping element with |z| > s in Slip.
  CHECK(gms_transition(Mode::Slip, 1.6, 5e-7, 1.5, 1e-6,
                       SlipToStickRule::VelocityAndDeflection) == Mode::Slip);
}

TEST_CASE("transition truth table, totality and mutual exclusion") {
  const double s = 1.5, v_c = 1e-6;
  std::size_t cells = 0;
  for (bool deflection : {false, true}) {
    const auto rule =
        deflection ? SlipToStickRule::VelocityAndDeflection : SlipToStickRule::Velocity;
    for (int i = -200; i <= 200; ++i) {
      const double z = s * i / 100.0;
      for (int j = -1000; j <= 1000; j += 5) {
        const double v = v_c * j / 100.0;
        for (Mode m : {Mode::Stick, Mode::Slip}) {
          Mode got = Mode::Stick;
          REQUIRE_NOTHROW(got = gms_transition(m, z, v, s, v_c, rule));
          CHECK(got == oracle_transition(m, z, v, s, v_c, deflection));
          ++cells;
        }
        const bool stick_to_slip = gms_transition(Mode::Stick, z, v, s, v_c, rule) == Mode::Slip;
        const bool slip_to_stick = std::abs(v) <= v_c;
        CHECK_FALSE((stick_to_slip && slip_to_stick));
      }
    }
  }
  CHECK(cells == 2u * 401u * 401u * 2u);
}

TEST_CASE("guard sign agrees with the transition predicate off the velocity edge") {
  const double s = 1.5, v_c = 1e-6;
  for (auto rule : {SlipToStickRule::Velocity, SlipToStickRule::VelocityAndDeflection}) {
    for (int i = -40; i <= 40; ++i) {
      const double z = s * i / 20.0;
      for (int j = -45; j <= 45; j += 2) {
        const double v = v_c * j / 15.0;
        if (std::abs(std::abs(v) - v_c) < 1e-15) continue;
        for (Mode m : {Mode::Stick, Mode::Slip}) {
          const bool fires = gms_guard(m, z, v, s, v_c, 0.0, rule) >= 0.0;
          CHECK(fires == (gms_transition(m, z, v, s, v_c, rule) != m));
        }
      }
    }
  }
}

TEST_CASE("oriented slip guard detects a jump across the velocity band") {
  // Slipping forward: v goes from +1e-3 to -1e-3 within one step.
  CHECK(gms_guard(Mode::Slip, 0.0, 1e-3, 1.5, 1e-6, 1.0) < 0.0);
  CHECK(gms_guard(Mode::Slip, 0.0, -1e-3, 1.5, 1e-6, 1.0) >= 0.0);
  // Unoriented guard misses it.
  CHECK(gms_guard(Mode::Slip, 0.0, -1e-3, 1.5, 1e-6, 0.0) < 0.0);
}

TEST_CASE("element force") {
  const GmsElementParams e{100, 10, 1};
  CHECK(gms_element_force(0.0, 0.0, e) == 0.0);
  CHECK(gms_element_force(0.01, 0.02, e) == doctest::Approx(1.2).epsilon(1e-15));
  CHECK(gms_element_force(-0.01, 0.0, e) == doctest::Approx(-1.0).epsilon(1e-15));
}

TEST_CASE("total friction") {
  const auto p = non_drifting_params();
  const auto rest = gms_rhs(GmsState::at_rest(4), 0.0, p);
  for (double zd : rest.zdot) CHECK(zd == 0.0);
  CHECK(rest.total == 0.0);

  const auto moving = gms_rhs(GmsState::at_rest(4), 0.01, p);
  CHECK(moving.total == doctest::Approx((12.1 + 4.0) * 0.01).epsilon(1e-14));
  CHECK(moving.total == doctest::Approx(0.161).epsilon(1e-14));

  GmsParams one;
  one.elements = {{0.7, 0.3, 0.1}};
  one.sigma2 = 0.1;
  one.stribeck = {0.4, 1.5, 1e-3};
  const double v = 0.02;
  const double s = stribeck(v, one.stribeck);
  const auto slip = gms_rhs(GmsState{{s}, {Mode::Slip}}, v, one);
  CHECK(slip.force[0] == doctest::Approx(0.7 * s).epsilon(1e-15));
  CHECK(slip.total == doctest::Approx(0.7 * s + 0.1 * v).epsilon(1e-15));
}

TEST_CASE("total friction rejects a state of the wrong length") {
  CHECK_THROWS_AS(gms_rhs(GmsState::at_rest(3), 0.0, non_drifting_params()), ConfigurationError);
  CHECK_THROWS_AS(gms_rhs(GmsState{{0, 0, 0, 0}, {Mode::Stick}}, 0.0, non_drifting_params()),
                  ConfigurationError);
}

TEST_CASE("oddness holds exactly for stuck elements") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto p = non_drifting_params();
  for (int i = 0; i < 500; ++i) {
    GmsState a{{u(rng), u(rng), u(rng), u(rng)}, std::vector<Mode>(4, Mode::Stick)};
    GmsState b = a;
    for (double& z : b.z) z = -z;
    const double v = u(rng);
    const auto ra = gms_rhs(a, v, p);
    const auto rb = gms_rhs(b, -v, p);
    for (std::size_t k = 0; k < 4; ++k) {
      CHECK(rb.zdot[k] == -ra.zdot[k]);
      CHECK(rb.force[k] == -ra.force[k]);
    }
    CHECK(rb.total == -ra.total);
  }
}

TEST_CASE("the literal slip law is not odd") {
  // Mirrored arguments give 0.05 and -0.15, not 0.05 and -0.05.
  const GmsElementParams e{0.7, 0.3, 0.1};
  const double fwd = gms_element_rate(0.75, 0.01, Mode::Slip, e, 1.5);
  const double back = gms_element_rate(-0.75, -0.01, Mode::Slip, e, 1.5);
  CHECK(back != doctest::Approx(-fwd));
  CHECK(back == doctest::Approx(-3.0 * fwd));
}

TEST_CASE("lugre rate and force") {
  const LugreParams p{1e3, 31.6, 4.0, kNonDrifting};
  CHECK(lugre_rate(0.123, 0.0, p) == 0.0);
  const double v = 0.004;
  CHECK(lugre_rate(stribeck(v, p.stribeck) / p.sigma0, v, p) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(std::abs(lugre_rate(stribeck(v, p.stribeck) / p.sigma0, v, p)) <= 1e-18);
  CHECK(lugre_rate(0.0, 0.01, p) == 0.01);

  CHECK(lugre_force(0.0, 0.0, 0.0, p) == 0.0);
  CHECK(lugre_force(0.001, 0.0, 0.01, p) == doctest::Approx(1.04).epsilon(1e-15));
  for (double vv : {-0.3, -0.002, 0.0005, 0.2}) {
    const double g = stribeck(vv, p.stribeck);
    const double zss = (vv > 0 ? 1.0 : -1.0) * g / p.sigma0;
    CHECK(lugre_force(zss, 0.0, vv, p) == doctest::Approx(g * (vv > 0 ? 1 : -1) + p.sigma2 * vv));
  }
}

TEST_CASE("parameter validation names the field") {
  auto p = non_drifting_params();
  p.stribeck.f_c = -1.0;
  try {
    p.validate("model.params");
    FAIL("expected InvariantViolation");
  } catch (const InvariantViolation& e) {
    CHECK(e.field() == "model.params.stribeck.f_c");
  }
  p = non_drifting_params();
  p.stribeck.f_s = 0.5;
  CHECK_THROWS_AS(p.validate(), InvariantViolation);
  p = non_drifting_params();
  p.v_c = 2e-3;
  CHECK_THROWS_AS(p.validate(), InvariantViolation);
  p = non_drifting_params();
  p.elements[2].c = 0.0;
  CHECK_THROWS_AS(p.validate(), InvariantViolation);
  p = non_drifting_params();
  p.elements.clear();
  CHECK_THROWS_AS(p.validate(), InvariantViolation);
  CHECK_THROWS_AS((LugreParams{0.0, 1.0, 1.0, kNonDrifting}.validate()), InvariantViolation);
  CHECK_NOTHROW(non_drifting_params().validate());
}

}  // TEST_SUITE
