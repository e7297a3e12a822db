#include "doctest.h"

#include <cmath>

#include "levyem/drift.hpp"
#include "levyem/error.hpp"

using namespace levyem;

TEST_CASE("built-in drifts evaluate as documented") {
  const auto ou = builtin_ou(2);
  const auto v = ou(std::vector<double>{1.5, -2.0});
  CHECK(v[0] == -1.5);
  CHECK(v[1] == 2.0);
  CHECK(ou.is_ou);
  const auto p = builtin_perturbed_ou(1, 0.25);
  CHECK(p(std::vector<double>{1.0})[0] == doctest::Approx(-1.0 + 0.25 * std::sin(1.0)));
  CHECK(p.lipschitz_l == doctest::Approx(1.25));
  CHECK(p.dissip_theta1 == doctest::Approx(0.75));
  CHECK(zero_drift(3)(std::vector<double>{1, 2, 3})[2] == 0.0);
}

TEST_CASE("drift names") {
  CHECK(drift_from_name("ou", 1).is_ou);
  CHECK(drift_from_name("perturbed-ou:0.1", 2).dim == 2);
  CHECK_THROWS_AS(drift_from_name("perturbed-ou:0.6", 1), PreconditionError);
  CHECK_THROWS_AS(drift_from_name("perturbed-ou:x", 1), PreconditionError);
  CHECK_THROWS_AS(drift_from_name("cubic", 1), PreconditionError);
}

TEST_CASE("claimed constants are validated") {
  CHECK_NOTHROW(builtin_ou(1).validate_claims());
  CHECK_THROWS_AS(zero_drift(1).validate_claims(), PreconditionError);
  auto m = builtin_ou(1);
  m.dissip_k = -1;
  CHECK_THROWS_AS(m.validate_claims(), PreconditionError);
}

TEST_CASE("certification accepts honest drifts") {
  for (const auto& m : {builtin_ou(1), builtin_ou(3), builtin_perturbed_ou(2, 0.4)}) {
    Stream rng(7);
    const auto r = certify_assumptions(m, 2000, 10.0, rng);
    CHECK(r.passed);
    CHECK(r.failure.empty());
    CHECK(r.pairs_checked == 2000);
    CHECK(r.max_lipschitz_ratio <= m.lipschitz_l * (1 + 1e-9));
    CHECK(r.min_dissipation_ratio >= m.dissip_theta1 * (1 - 1e-9));
  }
}

TEST_CASE("certification catches an overstated constant and reports a witness") {
  auto m = builtin_perturbed_ou(1, 0.4);
  m.lipschitz_l = 1.0;  // true value is 1.4
  Stream rng(7);
  const auto r = certify_assumptions(m, 5000, 10.0, rng);
  CHECK_FALSE(r.passed);
  CHECK(r.failure.find("violated") != std::string::npos);
  CHECK(r.witness_x.size() == 1);

  auto d = builtin_ou(1);
  d.dissip_theta1 = 1.5;
  Stream rng2(8);
  const auto r2 = certify_assumptions(d, 2000, 10.0, rng2);
  CHECK_FALSE(r2.passed);
  CHECK(r2.failure.find("dissipativity") != std::string::npos);

  auto h = builtin_perturbed_ou(1, 0.4);
  h.hessian_theta2 = 0.1;
  Stream rng3(9);
  CHECK_FALSE(certify_assumptions(h, 2000, 10.0, rng3).passed);
}

TEST_CASE("certification preconditions") {
  Stream rng(1);
  CHECK_THROWS_AS(certify_assumptions(builtin_ou(1), 10, 1.0, rng), PreconditionError);
  CHECK_THROWS_AS(certify_assumptions(builtin_ou(1), 1000, 0.0, rng), PreconditionError);
}
