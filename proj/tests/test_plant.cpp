#include <doctest.h>

#include <cmath>
#include <vector>

#include "fesilc/plant.hpp"

using namespace fesilc;

TEST_CASE("effective forearm inertia from the reference subject") {
  // 0.84 * 0.203^2 + 0.12 + 0.15 * (sin g / (1 - cos^4 g))^2 at g = 1.0472.
  CHECK(compute_b_a3(ArmParams{}) == doctest::Approx(0.28261563238824416).epsilon(1e-12));
  ArmParams bad;
  bad.gamma = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.gamma = 1e-7;
  CHECK_THROWS_AS(compute_b_a3(bad), std::domain_error);
}

TEST_CASE("plant and muscle transfer functions") {
  const auto p = build_plant({});
  CHECK(p.den() == Polynomial{0.5571, 5.78, 0.0});
  const auto m = build_muscle_linear({});
  CHECK(m.den()[1] == doctest::Approx(5.34).epsilon(1e-4));
  CHECK(m.den()[2] == doctest::Approx(7.129).epsilon(1e-12));
  CHECK(m.dc_gain() == doctest::Approx(1.0));
  CHECK_THROWS_AS(build_plant({0.0, 5.78}), std::invalid_argument);
}

TEST_CASE("recruitment curve and its inverse") {
  const MuscleParams mp;
  CHECK(h_irc(0.0, mp) == 0.0);
  CHECK(h_irc(1e4, mp) == doctest::Approx(mp.a1));
  for (double u : {0.0, 0.01, 0.3, 1.0, 4.0}) CHECK(h_irc_inverse(h_irc(u, mp), mp) == doctest::Approx(u).epsilon(1e-9));
  CHECK_THROWS_AS(h_irc_inverse(1.0, mp), std::out_of_range);
  CHECK_THROWS_AS(h_irc_inverse(-0.1, mp), std::out_of_range);
}

TEST_CASE("force-velocity and force-length factors") {
  CHECK(f_ma(0.0) == doctest::Approx(0.54 * std::atan(0.51) + 0.745));
  CHECK(f_mp(1.0, 0.5) == 1.0);
  CHECK(f_mp(1.5, 0.5) == doctest::Approx(std::exp(-1.0)));
  CHECK_THROWS_AS(f_mp(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("inverse-dynamics compensation cancels the nonlinear chain") {
  const MuscleParams mp;
  std::vector<double> step(201, 0.6), ramp(201);
  for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = 0.9 * static_cast<double>(i) / 200.0;
  CHECK(verify_linearization(mp, step, 0.05) <= 1e-6);
  CHECK(verify_linearization(mp, ramp, 0.05) <= 1e-6);

  SUBCASE("removing the compensators exposes the nonlinearity") {
    LinearizationOptions off;
    off.compensate = false;
    CHECK(verify_linearization(mp, step, 0.05, off) > 1e-2);
  }
  SUBCASE("out-of-range commands are rejected") {
    std::vector<double> bad{0.1, 1.0};
    CHECK_THROWS_AS(verify_linearization(mp, bad, 0.05), std::out_of_range);
  }
}
