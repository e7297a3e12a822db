#include "doctest.h"

#include <cmath>

#include "levyem/error.hpp"
#include "levyem/schedule.hpp"

using namespace levyem;

TEST_CASE("step sizes for each family") {
  CHECK(gamma_at(StepSchedule::c_over_rho_n(2, 0.5, 1), 4) == doctest::Approx(1.0));
  CHECK(gamma_at(StepSchedule::polynomial(0.5, 0.5, 1), 4) == doctest::Approx(0.25));
  const auto e = StepSchedule::explicit_steps({0.3, 0.2, 0.1}, 1);
  CHECK(gamma_at(e, 2) == 0.2);
  CHECK_THROWS_AS(gamma_at(e, 4), PreconditionError);
  CHECK_THROWS_AS(gamma_at(e, 0), PreconditionError);
  CHECK_THROWS_AS(StepSchedule::explicit_steps({0.1, 0.2}, 1), PreconditionError);
  CHECK_THROWS_AS(StepSchedule::explicit_steps({0.1, -0.2}, 1), PreconditionError);
  CHECK_THROWS_AS(StepSchedule::polynomial(1, 1.5, 1), PreconditionError);
  CHECK_THROWS_AS(StepSchedule::c_over_rho_n(1, 1, 0.0), PreconditionError);
}

TEST_CASE("times are partial sums") {
  const auto e = StepSchedule::explicit_steps({0.3, 0.2, 0.1}, 1);
  CHECK(t_at(e, 0) == 0.0);
  CHECK(t_at(e, 3) == doctest::Approx(0.6));
  CHECK(t_at(StepSchedule::c_over_rho_n(2, 0.5, 1), 2) == doctest::Approx(6.0));
  const auto s = StepSchedule::c_over_rho_n(0.5, 1.0, 1);
  const auto ts = s.times(1000);
  double naive = 0.0;
  for (std::size_t k = 1; k <= 1000; ++k) {
    naive += s.gamma(k);
    CHECK(ts[k] == doctest::Approx(naive).epsilon(1e-13));
  }
  CHECK(ts[1000] == t_at(s, 1000));
}

TEST_CASE("step sizes are nonincreasing") {
  for (const auto& s : {StepSchedule::c_over_rho_n(2, 0.5, 1), StepSchedule::polynomial(1, 0.3, 1),
                        StepSchedule::polynomial(2, 1, 1)}) {
    for (std::size_t k = 1; k < 5000; ++k) REQUIRE(s.gamma(k + 1) <= s.gamma(k));
  }
}

TEST_CASE("omega closed forms and their numerical limits") {
  const auto s = StepSchedule::c_over_rho_n(2, 0.5, 1 / 1.5);
  CHECK(omega_of(s).value == doctest::Approx(1.0 / 6.0));
  CHECK_FALSE(omega_of(s).estimated);
  CHECK(omega_of(StepSchedule::polynomial(1, 0.5, 0.7)).value == 0.0);
  CHECK(omega_of(StepSchedule::polynomial(2, 1, 0.5)).value == doctest::Approx(0.25));

  auto ratio = [](const StepSchedule& sc, std::size_t k) {
    const double th = sc.theta();
    return (std::pow(sc.gamma(k), th) - std::pow(sc.gamma(k + 1), th)) / std::pow(sc.gamma(k + 1), 1 + th);
  };
  CHECK(ratio(StepSchedule::polynomial(1, 0.5, 0.7), 1000000) < 1e-3);
  CHECK(ratio(StepSchedule::polynomial(2, 1, 0.5), 1000000) == doctest::Approx(0.25).epsilon(1e-5));
  CHECK(ratio(s, 1000000) == doctest::Approx(1.0 / 6.0).epsilon(1e-5));

  std::vector<double> steps(4000);
  for (std::size_t k = 1; k <= steps.size(); ++k) steps[k - 1] = s.gamma(k);
  const auto est = omega_of(StepSchedule::explicit_steps(steps, s.theta()));
  CHECK(est.estimated);
  CHECK(est.value == doctest::Approx(1.0 / 6.0).epsilon(0.01));
  CHECK_THROWS_AS(omega_of(StepSchedule::explicit_steps({0.3, 0.2, 0.1}, 1)), PreconditionError);
}

TEST_CASE("theoretical rho") {
  CHECK(rho_theory(1.5, 1).value == doctest::Approx(0.5 * std::exp(-2.0)));
  CHECK(rho_theory(1.2, 1).value == doctest::Approx(0.5 * std::exp(-2.0)));
  CHECK(rho_theory(1.5, 2).value == doctest::Approx(0.125 * std::exp(-8.0)));
  const auto big = rho_theory(1.5, 2000);
  CHECK(big.underflow);
  CHECK(big.value == 0.0);
}

TEST_CASE("v_n recurrence agrees with the defining sum") {
  const auto s = StepSchedule::c_over_rho_n(2, 0.5, 2.0 / 3.0);
  const double rho = 0.5;
  const auto d = schedule_diagnostics(s, rho, 1000, 1.5);
  const auto t = s.times(1000);
  CHECK(d.v[1] == doctest::Approx(std::pow(s.gamma(1), 1 + s.theta())));
  for (std::size_t n : {1u, 2u, 10u, 137u, 1000u}) {
    double direct = 0.0;
    for (std::size_t k = 1; k <= n; ++k)
      direct += std::pow(s.gamma(k), 1 + s.theta()) * std::exp(-rho * (t[n] - t[k]));
    CHECK(std::abs(d.v[n] - direct) <= 1e-12 * direct);
  }
}

TEST_CASE("n* is the last index more than one time unit back") {
  const auto s = StepSchedule::polynomial(0.5, 0.5, 1);
  const auto t = s.times(3000);
  for (std::size_t n = 1; n <= 3000; n += 37) {
    if (!(t[n] > 1.0)) {
      CHECK_THROWS_AS(n_star(t, n), PreconditionError);
      continue;
    }
    std::size_t brute = 0;
    for (std::size_t i = 0; i <= n; ++i)
      if (t[n] - t[i] > 1.0) brute = i;
    CHECK(n_star(t, n) == brute);
  }
}

TEST_CASE("schedule diagnostics: bound and decay on the toy schedule") {
  const auto s = StepSchedule::c_over_rho_n(2, 0.5, 2.0 / 3.0);
  const auto d = schedule_diagnostics(s, 0.5, 100000, 1.5);
  CHECK(d.v_over_gamma_theta[100000] <= d.limsup_bound);
  CHECK(d.exp_decay_ratio[10000] < 1e-3);
  CHECK_FALSE(d.window.empty());
  CHECK_THROWS_AS(schedule_diagnostics(s, 0.1, 10, 1.5), PreconditionError);
}

TEST_CASE("schedule text round trip") {
  const auto a = parse_schedule("c-over-n:0.5", 0.5);
  CHECK(a.gamma(10) == doctest::Approx(0.05));
  const auto b = parse_schedule(a.describe(), 0.5);
  CHECK(b.gamma(777) == a.gamma(777));
  CHECK(parse_schedule("poly:0.5,0.5", 1).gamma(4) == doctest::Approx(0.25));
  CHECK(parse_schedule("explicit:0.3,0.2,0.1", 1).gamma(3) == doctest::Approx(0.1));
  CHECK_THROWS_AS(parse_schedule("c-over-n", 1), PreconditionError);
  CHECK_THROWS_AS(parse_schedule("nope:1", 1), PreconditionError);
  CHECK_THROWS_AS(parse_schedule("poly:1", 1), PreconditionError);
}
