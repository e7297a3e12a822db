#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "levyem/drift.hpp"
#include "levyem/metrics.hpp"
#include "levyem/rng.hpp"
#include "levyem/sampling.hpp"
#include "levyem/schedule.hpp"

namespace levyem {

enum class Scheme { StableEM, ParetoEM, ExactOU };

std::string to_string(Scheme s);
// "stable", "pareto", "exact-ou"
Scheme parse_scheme(const std::string& text);

struct ChainState {
  std::vector<double> x;
  std::size_t n = 0;
  double t = 0.0;
};

// x' = x + gamma_{n+1} b(x) + gamma_{n+1}^{1/alpha} A zeta
ChainState step_stable(const ChainState& s, const DriftModel& b, const StableSpec& spec,
                       const StepSchedule& sched, std::span<const double> zeta);
ChainState step_stable(const ChainState& s, const DriftModel& b, const StableSpec& spec,
                       const StepSchedule& sched, Stream& rng);

// x' = x + gamma_{n+1} b(x) + (gamma_{n+1}^{1/alpha} / beta) A z
ChainState step_pareto(const ChainState& s, const DriftModel& b, const StableSpec& spec,
                       const StepSchedule& sched, const NoiseConstants& c,
                       std::span<const double> z_tilde);
ChainState step_pareto(const ChainState& s, const DriftModel& b, const StableSpec& spec,
                       const StepSchedule& sched, const NoiseConstants& c, Stream& rng);

// sigma(gamma) = ((1 - exp(-alpha gamma)) / alpha)^{1/alpha}
double exact_ou_scale(double alpha, double gamma);

// Exact transition of dX = -X dt + dZ over gamma_{n+1}, d = 1.
ChainState step_exact_ou(const ChainState& s, double alpha, const StepSchedule& sched, double zeta);
ChainState step_exact_ou(const ChainState& s, double alpha, const StepSchedule& sched, Stream& rng);

struct EnsembleRun {
  Scheme scheme = Scheme::StableEM;
  StableSpec spec{1.5, 1};
  DriftModel drift;
  StepSchedule schedule{CoverRhoN{0.5, 1.0}, 2.0 / 3.0};
  std::size_t m_chains = 1;
  std::vector<double> x0;  // empty means the origin
  std::vector<std::size_t> checkpoints;
  std::uint64_t master_seed = 0;
};

struct Snapshot {
  std::size_t n = 0;
  double t = 0.0;
  double gamma_n = 0.0;  // 0 at n = 0
  SampleMatrix samples;  // m x d; rows of aborted chains are NaN
};

struct AbortRecord {
  std::size_t chain;
  std::size_t step;
};

struct EnsembleResult {
  std::vector<Snapshot> snapshots;
  std::vector<AbortRecord> aborts;
};

struct RunOptions {
  int workers = 0;  // 0: LEVYEM_WORKERS, else hardware concurrency
};

// Worker count from LEVYEM_WORKERS or the hardware.
int default_workers();

// Runs m independent chains; chain i draws from Stream::for_chain(master_seed, i).
// Output does not depend on the worker count. A chain that reaches a non-finite
// position is stopped and recorded; more than 0.1% stopped chains is an error.
EnsembleResult run_ensemble(const EnsembleRun& cfg, const RunOptions& opt = {});

// 1-D run on b(x) = -x paired with an exactly nu-distributed reference. The
// reference follows S_k = S_{k-1} + gamma_k (-S_{k-1}) + gamma_k^{1/alpha} zeta_k
// from S_0 = 0, which is stable with scale D_k^{1/alpha},
//   D_k = |1 - gamma_k|^alpha D_{k-1} + gamma_k,
// and is reported as S_n (alpha D_n)^{-1/alpha}, a draw from nu = alpha^{-1/alpha} Z.
// zeta_k is the chain's own stable innovation (StableEM, ExactOU) or the comonotone
// stable image of its Pareto innovation (ParetoEM). The chain samples are identical
// to run_ensemble with the same seed.
struct MatchedSnapshot {
  std::size_t n = 0;
  double t = 0.0;
  double gamma_n = 0.0;
  std::vector<double> chain;
  std::vector<double> reference;
};

struct MatchedResult {
  std::vector<MatchedSnapshot> snapshots;
  std::vector<AbortRecord> aborts;
};

MatchedResult run_matched_ou(Scheme scheme, double alpha, const StepSchedule& sched,
                             std::size_t m_chains, double x0,
                             const std::vector<std::size_t>& checkpoints,
                             std::uint64_t master_seed, const RunOptions& opt = {});

// (1/m) sum_i |x_i|^kappa over finite rows, 1 <= kappa < alpha.
double empirical_moment(const Snapshot& snap, double kappa, double alpha);
double empirical_moment(std::span<const double> xs, double kappa, double alpha);

// CSV: chain_index, x0 .. x{d-1}. Sidecar: scheme, alpha, d, schedule, n, t, gamma_n,
// seed, abort_count.
void write_snapshot_csv(const Snapshot& snap, const std::string& path);
nlohmann::json snapshot_sidecar(const EnsembleRun& cfg, const Snapshot& snap,
                                std::size_t abort_count);

// Shared by the engine and the experiment harness.
void parallel_chains(std::size_t m, int workers,
                     const std::function<void(std::size_t begin, std::size_t end)>& body);

}  // namespace levyem
