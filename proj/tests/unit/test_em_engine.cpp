#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "levyem/em_engine.hpp"
#include "levyem/error.hpp"
#include "levyem/stable_law.hpp"

using namespace levyem;

namespace {

EnsembleRun small_run(Scheme scheme, int d, std::uint64_t seed) {
  EnsembleRun r;
  r.scheme = scheme;
  r.spec = StableSpec(1.5, d);
  r.drift = d == 1 ? builtin_ou(1) : builtin_perturbed_ou(d, 0.2);
  r.schedule = StepSchedule::c_over_rho_n(0.5, 1.0, 2.0 / 3.0);
  r.m_chains = 300;
  r.checkpoints = {0, 4, 64};
  r.master_seed = seed;
  return r;
}

}  // namespace

TEST_CASE("scheme names") {
  for (auto s : {Scheme::StableEM, Scheme::ParetoEM, Scheme::ExactOU}) CHECK(parse_scheme(to_string(s)) == s);
  CHECK_THROWS_AS(parse_scheme("milstein"), PreconditionError);
}

TEST_CASE("single steps with forced innovations") {
  const auto sched = StepSchedule::explicit_steps({0.25, 0.125}, 1.0);
  const StableSpec spec(1.5, 1);
  const ChainState s0{{2.0}, 0, 0.0};
  const auto s1 = step_stable(s0, builtin_ou(1), spec, sched, std::vector<double>{0.5});
  CHECK(s1.x[0] == doctest::Approx(2.0 - 0.25 * 2.0 + std::pow(0.25, 1 / 1.5) * 0.5));
  CHECK(s1.n == 1);
  CHECK(s1.t == 0.25);
  const auto c = noise_constants(spec);
  const auto p1 = step_pareto(s0, builtin_ou(1), spec, sched, c, std::vector<double>{-3.0});
  CHECK(p1.x[0] == doctest::Approx(1.5 - std::pow(0.25, 1 / 1.5) / c.beta * 3.0));
  const auto e1 = step_exact_ou(s0, 1.5, sched, 0.5);
  CHECK(e1.x[0] == doctest::Approx(std::exp(-0.25) * 2.0 + exact_ou_scale(1.5, 0.25) * 0.5));
  CHECK(exact_ou_scale(1.5, 1e-9) == doctest::Approx(std::pow(1e-9, 1 / 1.5)).epsilon(1e-6));
  CHECK(exact_ou_scale(1.5, INFINITY) == doctest::Approx(std::pow(1 / 1.5, 1 / 1.5)));
  CHECK_THROWS_AS(step_exact_ou(ChainState{{0.0, 0.0}, 0, 0.0}, 1.5, sched, 0.1), PreconditionError);
  CHECK_THROWS_AS(step_stable(s0, builtin_ou(1), spec, sched, std::vector<double>{1.0, 2.0}),
                  PreconditionError);
}

TEST_CASE("engine reproduces hand-stepped chains bit for bit") {
  for (auto scheme : {Scheme::StableEM, Scheme::ParetoEM, Scheme::ExactOU}) {
    for (int d : {1, 3}) {
      if (scheme == Scheme::ExactOU && d != 1) continue;
      auto run = small_run(scheme, d, 77);
      run.x0.assign(d, 0.5);
      const auto res = run_ensemble(run, RunOptions{1});
      const auto c = noise_constants(run.spec);
      for (std::size_t i : {0u, 17u, 299u}) {
        Stream rng = Stream::for_chain(77, i);
        ChainState s{run.x0, 0, 0.0};
        for (std::size_t k = 1; k <= 64; ++k) {
          switch (scheme) {
            case Scheme::StableEM: s = step_stable(s, run.drift, run.spec, run.schedule, rng); break;
            case Scheme::ParetoEM: s = step_pareto(s, run.drift, run.spec, run.schedule, c, rng); break;
            case Scheme::ExactOU: s = step_exact_ou(s, 1.5, run.schedule, rng); break;
          }
          if (k == 4)
            for (int j = 0; j < d; ++j) CHECK(res.snapshots[1].samples(i, j) == s.x[j]);
        }
        for (int j = 0; j < d; ++j) {
          CHECK(res.snapshots[0].samples(i, j) == 0.5);
          CHECK(res.snapshots[2].samples(i, j) == s.x[j]);
        }
        CHECK(res.snapshots[2].t == doctest::Approx(s.t));
      }
    }
  }
}

TEST_CASE("output does not depend on the worker count") {
  for (auto scheme : {Scheme::StableEM, Scheme::ParetoEM}) {
    const auto run = small_run(scheme, 2, 5);
    const auto a = run_ensemble(run, RunOptions{1});
    const auto b = run_ensemble(run, RunOptions{4});
    for (std::size_t k = 0; k < a.snapshots.size(); ++k) CHECK(a.snapshots[k].samples == b.snapshots[k].samples);
  }
}

TEST_CASE("matched run: chain identical to the plain engine, reference has the invariant law") {
  const auto sched = StepSchedule::c_over_rho_n(0.5, 1.0, 2.0 / 3.0);
  const std::vector<std::size_t> cps{8, 128};
  for (auto scheme : {Scheme::StableEM, Scheme::ParetoEM, Scheme::ExactOU}) {
    const auto mr = run_matched_ou(scheme, 1.5, sched, 4000, 0.25, cps, 3, RunOptions{2});
    EnsembleRun run = small_run(scheme, 1, 3);
    run.m_chains = 4000;
    run.x0 = {0.25};
    run.checkpoints = cps;
    const auto er = run_ensemble(run, RunOptions{1});
    for (std::size_t k = 0; k < cps.size(); ++k)
      for (std::size_t i = 0; i < 4000; i += 97) CHECK(mr.snapshots[k].chain[i] == er.snapshots[k].samples(i, 0));
    // reference ~ alpha^{-1/alpha} Z: KS against the stable law
    std::vector<double> ref = mr.snapshots[1].reference;
    std::sort(ref.begin(), ref.end());
    const SymmetricStableLaw law(1.5);
    const double scale = std::pow(1.5, -1 / 1.5);
    double ks = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
      const double f = 1.0 - law.upper_tail(ref[i] / scale);
      ks = std::max({ks, std::abs(f - double(i) / ref.size()), std::abs(double(i + 1) / ref.size() - f)});
    }
    CHECK(ks * std::sqrt(4000.0) < 1.95);
  }
  CHECK_THROWS_AS(run_matched_ou(Scheme::StableEM, 1.5, sched, 10, 0.0, {0, 4}, 1), PreconditionError);
}

TEST_CASE("chains that blow up are recorded and the budget enforced") {
  auto run = small_run(Scheme::StableEM, 1, 1);
  run.drift.is_ou = false;
  run.drift.eval = [](std::span<const double> x, std::span<double> out) {
    out[0] = x[0] > 5.0 ? INFINITY : -x[0];
  };
  run.m_chains = 2000;
  CHECK_THROWS_AS(run_ensemble(run), ExperimentError);
}

TEST_CASE("empirical moments") {
  const std::vector<double> x{1.0, -2.0, NAN};
  CHECK(empirical_moment(x, 1.0, 1.5) == doctest::Approx(1.5));
  CHECK_THROWS_AS(empirical_moment(x, 1.5, 1.5), PreconditionError);
  CHECK_THROWS_AS(empirical_moment(x, 0.5, 1.5), PreconditionError);
}

TEST_CASE("snapshot CSV and sidecar") {
  const auto run = small_run(Scheme::ParetoEM, 2, 9);
  const auto res = run_ensemble(run);
  const std::string path = "test_snapshot.csv";
  write_snapshot_csv(res.snapshots[2], path);
  std::ifstream f(path, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  const std::string text = ss.str();
  CHECK(text.rfind("chain_index,x0,x1\r\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 301);
  const auto j = snapshot_sidecar(run, res.snapshots[2], res.aborts.size());
  CHECK(j["scheme"] == "pareto");
  CHECK(j["n"] == 64);
  CHECK(j["seed"] == 9);
}
