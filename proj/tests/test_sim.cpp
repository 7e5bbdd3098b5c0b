#include <doctest.h>

#include <cmath>
#include <random>

#include "fesilc/sim.hpp"

using namespace fesilc;

TEST_CASE("rmse and nrmse") {
  const std::vector<double> a{1.0, 2.0, 3.0};
  CHECK(rmse(a, a) == 0.0);
  CHECK(nrmse(a, a) == 0.0);
  std::vector<double> d(37, 0.3), off(37, 0.3 - 0.0168);
  d.back() = 0.0;
  off.back() = -0.0168;
  CHECK(rmse(d, off) == doctest::Approx(0.0168).epsilon(1e-12));
  CHECK_THROWS_AS(rmse(a, std::vector<double>{1.0}), std::invalid_argument);
  CHECK_THROWS_AS(nrmse(std::vector<double>{2.0, 2.0}, std::vector<double>{1.0, 1.0}), std::domain_error);

  SUBCASE("normalization by the reference range") {
    const std::vector<double> ramp{0.0, 0.2828};
    const std::vector<double> shifted{0.0168, 0.2828 - 0.0168};
    CHECK(nrmse(ramp, shifted) == doctest::Approx(0.0594).epsilon(1e-3));
  }
  SUBCASE("brute-force oracle on random pairs") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int t = 0; t < 50; ++t) {
      std::vector<double> x(100), y(100);
      for (auto& v : x) v = u(rng);
      for (auto& v : y) v = u(rng);
      long double acc = 0.0L;
      for (std::size_t i = 0; i < x.size(); ++i) acc += static_cast<long double>(x[i] - y[i]) * (x[i] - y[i]);
      const double expect = static_cast<double>(std::sqrt(acc / 100.0L));
      CHECK(std::abs(rmse(x, y) - expect) <= 1e-12);
      const double range = *std::max_element(x.begin(), x.end()) - *std::min_element(x.begin(), x.end());
      CHECK(std::abs(nrmse(x, y) - expect / range) <= 1e-12);
    }
  }
}

TEST_CASE("zero reference keeps the loop at rest") {
  auto cfg = ScenarioConfig::defaults(Scenario::FeedbackOnly);
  cfg.end = cfg.start;
  const auto rec = run_trial(cfg);
  for (std::size_t k = 0; k < rec.size(); ++k) {
    CHECK(rec.r[k] == 0.0);
    CHECK(rec.u_applied[k] == 0.0);
    CHECK(rec.r_dot[k] == 0.0);
  }
  CHECK(rec.rmse == 0.0);
  CHECK(std::isnan(rec.nrmse));
  const auto vb = identify_velocity_bound(cfg);
  CHECK(vb.r_dot_max == 0.0);
  CHECK(vb.pd_energy == 0.0);
}

TEST_CASE("feedback-only trial") {
  const auto cfg = ScenarioConfig::defaults(Scenario::FeedbackOnly);
  const auto rec = run_trial(cfg);
  REQUIRE(rec.size() == 201);
  CHECK(rec.rmse == doctest::Approx(0.0168).epsilon(0.01));
  // Type-1 loop: steady ramp error = slope * damping / Kp.
  const double slope = 0.28284271247461906 / 10.0;
  CHECK(rec.e.back() == doctest::Approx(slope * 5.78 / 10.0).epsilon(0.005));
  for (std::size_t k = 0; k < rec.size(); ++k) CHECK(rec.u_ff[k] == 0.0);
  CHECK(std::isnan(rec.constraint_bound));

  SUBCASE("doubling Kp halves the steady ramp error") {
    auto stiff = cfg;
    stiff.lead.Kp = 20.0;
    stiff.lead.Kd = 4.0;
    const auto r2 = run_trial(stiff);
    CHECK(r2.e.back() == doctest::Approx(rec.e.back() / 2).epsilon(0.01));
  }
}

TEST_CASE("feedback-only scenario is identical across iterations") {
  const auto rep = run_scenario(ScenarioConfig::defaults(Scenario::FeedbackOnly));
  REQUIRE(rep.trials.size() == 10);
  for (const auto& t : rep.trials) {
    CHECK(t.rmse == rep.trials.front().rmse);
    CHECK(t.r == rep.trials.front().r);
  }
  REQUIRE(rep.plateau_iteration.has_value());
  CHECK(*rep.plateau_iteration == 1);
}

TEST_CASE("learning scenario reduces error") {
  auto cfg = ScenarioConfig::defaults(Scenario::FeedbackPlusPilc);
  cfg.L = 0.2;
  const auto rep = run_scenario(cfg);
  REQUIRE(rep.trials.size() == 16);
  const auto seq = rep.rmse_series();
  for (std::size_t k = 1; k < seq.size(); ++k) CHECK(seq[k] <= seq[k - 1]);
  CHECK(seq.back() < seq.front() / 3);
  // First-trial error is the feedback-only error.
  CHECK(seq.front() == run_trial(ScenarioConfig::defaults(Scenario::FeedbackOnly)).rmse);

  SUBCASE("output injection is available and also learns") {
    cfg.injection = IlcInjection::OutputAdd;
    cfg.iterations = 4;
    const auto out = run_scenario(cfg).rmse_series();
    CHECK(out.back() < out.front());
  }
}

TEST_CASE("constrained scenario") {
  const auto cfg = ScenarioConfig::defaults(Scenario::FullConstrained);
  const auto rep = run_scenario(cfg);
  REQUIRE(rep.trials.size() == 13);
  const auto vb = identify_velocity_bound(cfg);
  CHECK(rep.r_dot_max == vb.r_dot_max);
  CHECK(rep.v0 == doctest::Approx(1.2 * vb.pd_energy));
  CHECK(rep.velocity_bound_held);
  for (const auto& t : rep.trials) {
    CHECK(t.max_velocity <= rep.r_dot_max);
    for (double u : t.u_applied) CHECK(std::abs(u) <= t.constraint_bound);
  }
  for (std::size_t k = 1; k < rep.trials.size(); ++k)
    CHECK(rep.trials[k].constraint_bound > rep.trials[k - 1].constraint_bound);

  SUBCASE("overrides bypass identification") {
    auto o = cfg;
    o.iterations = 2;
    o.r_dot_max_override = 1.0;
    o.v0_override = 0.05;
    const auto r = run_scenario(o);
    CHECK(r.r_dot_max == 1.0);
    CHECK(r.trials.front().constraint_bound == 0.05);
  }
}

TEST_CASE("identified bound scales with trajectory length") {
  auto cfg = ScenarioConfig::defaults(Scenario::FeedbackOnly);
  const auto a = identify_velocity_bound(cfg);
  cfg.end = {0.4, 0.4};
  const auto b = identify_velocity_bound(cfg);
  CHECK(b.r_dot_max > a.r_dot_max);
  CHECK(b.pd_energy > a.pd_energy);
}

TEST_CASE("runs are deterministic") {
  auto cfg = ScenarioConfig::defaults(Scenario::FullConstrained);
  cfg.iterations = 4;
  const auto a = run_scenario(cfg), b = run_scenario(cfg);
  for (std::size_t k = 0; k < a.trials.size(); ++k) {
    CHECK(a.trials[k].r == b.trials[k].r);
    CHECK(a.trials[k].u_applied == b.trials[k].u_applied);
    CHECK(a.trials[k].r_dot == b.trials[k].r_dot);
  }
}

TEST_CASE("divergence is reported with the sample index") {
  auto cfg = ScenarioConfig::defaults(Scenario::FeedbackOnly);
  cfg.lead.Kp = 1e12;
  cfg.lead.Kd = 1e12;
  cfg.duration = 100.0;
  try {
    run_trial(cfg);
    FAIL("expected divergence");
  } catch (const SimulationDivergence& e) {
    CHECK(e.sample() > 0);
    CHECK(e.sample() < cfg.samples());
  }
}

TEST_CASE("config validation") {
  auto cfg = ScenarioConfig::defaults(Scenario::FeedbackPlusPilc);
  cfg.iterations = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.iterations = 2;
  cfg.duration = 1.01;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.duration = 10.0;
  cfg.L = 1.5;
  CHECK_NOTHROW(cfg.validate());
  cfg.reference_mode = true;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("plateau helpers") {
  const std::vector<double> seq{0.0168, 0.0152, 0.0100, 0.0080, 0.0070, 0.00665, 0.0066};
  CHECK(plateau_iteration(seq) == 6);
  CHECK(iterations_to_final(seq) == 6);
  const std::vector<double> falling{3.0, 2.0, 1.0};
  CHECK_FALSE(plateau_iteration(falling).has_value());
}
