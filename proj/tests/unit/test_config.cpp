#include "doctest.h"

#include <cmath>
#include <string>

#include "levyem/config.hpp"
#include "levyem/error.hpp"

using namespace levyem;

namespace {

std::string error_of(const std::string& text, std::optional<Experiment> e = std::nullopt) {
  try {
    auto c = parse_config(text, "cfg");
    validate_config(c, e);
  } catch (const PreconditionError& ex) {
    return ex.what();
  }
  return "";
}

}  // namespace

TEST_CASE("minimal rate config") {
  auto c = parse_config(
      "# comment line\n"
      "experiment = rate\n"
      "scheme = pareto\n"
      "alpha = 1.5   # trailing comment\n"
      "drift = ou\n"
      "schedule = c-over-n:0.5\n"
      "m = 200000\n"
      "checkpoints = 128..8192 geometric\n"
      "seed = 42\n");
  validate_config(c);
  CHECK(c.experiment == Experiment::Rate);
  CHECK(*c.alpha == 1.5);
  CHECK(*c.m == 200000);
  CHECK(c.checkpoints == std::vector<std::size_t>{128, 256, 512, 1024, 2048, 4096, 8192});
  CHECK(c.seed == 42);
  CHECK(c.entries.size() == 8);
  CHECK(resolve_kappa(c) == 1.2);
}

TEST_CASE("errors name the key and the line") {
  CHECK(error_of("experiment = rate\nscheme = pareto\n").find("'alpha'") != std::string::npos);
  const auto unknown = error_of("alpha = 1.5\n\nbogus = 3\n");
  CHECK(unknown.find("cfg:3") != std::string::npos);
  CHECK(unknown.find("bogus") != std::string::npos);
  CHECK(error_of("alpha = 1.5\nalpha = 1.6\n").find("duplicate") != std::string::npos);
  CHECK(error_of("alpha = abc\n").find("cfg:1") != std::string::npos);
  CHECK(error_of("alpha 1.5\n").find("key = value") != std::string::npos);
  CHECK(error_of("experiment = rate\nalpha = 2.5\n").find("alpha") != std::string::npos);
  CHECK(error_of("experiment = rate\nalpha = 1.5\nkappa = 1.6\n").find("kappa") != std::string::npos);
  CHECK(error_of("experiment = rate\nalpha = 1.5\ndim = 2\n").find("dimension 1") != std::string::npos);
  CHECK(error_of("experiment = rate\nalpha = 1.5\n", Experiment::Sample).find("command") != std::string::npos);
  CHECK(error_of("alpha = 1.5\n").find("experiment") != std::string::npos);
  CHECK(error_of("scheme = euler\n").find("scheme") != std::string::npos);
  CHECK(error_of("experiment = rate\nalpha = 1.5\nschedule = nope:1\n").find("schedule") != std::string::npos);
  CHECK(error_of("experiment = ergodicity\nalpha = 1.5\ndrift = zero\n").find("drift") != std::string::npos);
  CHECK(error_of("experiment = certify-drift\ndrift = ou\n").empty());
}

TEST_CASE("checkpoint grammar") {
  CHECK(parse_checkpoints("4..32") == std::vector<std::size_t>{4, 8, 16, 32});
  CHECK(parse_checkpoints("1, 10,100") == std::vector<std::size_t>{1, 10, 100});
  CHECK(parse_checkpoints("2e2..8e2 geometric") == std::vector<std::size_t>{200, 400, 800});
  CHECK_THROWS_AS(parse_checkpoints("4..33"), PreconditionError);
  CHECK_THROWS_AS(parse_checkpoints("4..32 linear"), PreconditionError);
  CHECK_THROWS_AS(parse_checkpoints("10,5"), PreconditionError);
  CHECK_THROWS_AS(parse_checkpoints("1.5,3"), PreconditionError);
}

TEST_CASE("defaults and overrides") {
  ExperimentConfig c;
  set_config_value(c, "alpha", "1.1");
  set_config_value(c, "experiment", "weak-error");
  CHECK(resolve_kappa(c) == doctest::Approx(1.05));
  CHECK(resolve_m(c) == 10000000);
  CHECK(resolve_gammas(c).size() == 7);
  CHECK(resolve_gammas(c).back() == std::ldexp(1.0, -9));
  set_config_value(c, "experiment", "sample");
  CHECK(resolve_lambdas(c).size() == 8);
  set_config_value(c, "lambdas", "0.5, 1");
  CHECK(resolve_lambdas(c) == std::vector<double>{0.5, 1.0});
  CHECK_THROWS_AS(set_config_value(c, "estimator", "guess"), PreconditionError);
  CHECK_THROWS_AS(set_config_value(c, "test_function", "sin"), PreconditionError);
  for (auto e : {Experiment::Rate, Experiment::WeakError, Experiment::Ergodicity, Experiment::CfCheck,
                 Experiment::ScheduleDiag, Experiment::Sample, Experiment::CertifyDrift})
    CHECK(parse_experiment(to_string(e)) == e);
}
