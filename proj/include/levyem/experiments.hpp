#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "levyem/config.hpp"
#include "levyem/em_engine.hpp"
#include "levyem/metrics.hpp"

namespace levyem {

// One CSV cell. Doubles print with %.17g, strings are quoted per RFC 4180 when needed.
using Cell = std::variant<double, std::int64_t, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

// Header plus rows, CRLF line ends.
std::string to_csv(const Table& t);

// What every subcommand hands to emit_outputs.
struct Report {
  std::string experiment;
  Table table;
  nlohmann::json summary;  // experiment-specific fields
  bool passed = true;
};

// Writes <prefix>.csv and <prefix>.json. The JSON carries the config echo, seed,
// version, generator name, the schedule's omega and the toy rho next to `summary`.
void emit_outputs(const Report& r, const ExperimentConfig& cfg, const std::string& prefix);
nlohmann::json report_json(const Report& r, const ExperimentConfig& cfg);

// ---- rate -------------------------------------------------------------------

struct RateRow {
  std::size_t n = 0;
  double t = 0.0;
  double gamma = 0.0;
  double w1 = 0.0;
  double std_error = 0.0;
  double floor = 0.0;  // W1 between two independent invariant-law ensembles of size m
  bool usable = false;
  double moment = 0.0;  // (1/m) sum |Y_n|^kappa
};

struct RateReport {
  Scheme scheme = Scheme::ParetoEM;
  double alpha = 0.0;
  std::string estimator;   // "matched", "independent" or "self-reference"
  std::vector<RateRow> rows;
  std::optional<RateFit> fit;
  double target = 0.0;
  double tolerance = 0.0;
  bool one_sided = true;
  double min_r_squared = 0.0;
  double kappa = 0.0;
  std::size_t abort_count = 0;
  bool passed = false;
  std::string verdict;
};

// Rate of W1(nu, law of Y_n) in gamma_n over the checkpoints.
// OU drift: the reference is exact (matched or independent estimator). Other
// drifts: a stable EM run with constant step ref_step up to ref_time stands in
// for nu, which is only approximate.
// Fewer than 4 checkpoints above the noise gate throws ExperimentError.
RateReport run_rate_experiment(const ExperimentConfig& cfg);
Report to_report(const RateReport& r);

// ---- weak error -------------------------------------------------------------

enum class TestFunction { Cos, Rational };  // cos x, 1/(1+x^2)
TestFunction parse_test_function(const std::string& s);
double apply_test_function(TestFunction f, double x);

struct WeakErrorPoint {
  double gamma = 0.0;
  double error = 0.0;      // E f(X) - E f(Y)
  double std_error = 0.0;
};

// One step from x0: X by the exact OU transition, Y by one EM step of `scheme`.
// StableEM shares the stable innovation with X; ParetoEM drives X with the
// comonotone stable image of its Pareto innovation. ExactOU draws Y as a second,
// independent exact transition (a same-law control).
WeakErrorPoint one_step_weak_error(Scheme scheme, double alpha, double gamma, double x0,
                                   TestFunction f, std::size_t m, std::uint64_t seed,
                                   int workers);

struct WeakErrorRow {
  double gamma;
  WeakErrorPoint stable;
  WeakErrorPoint pareto;
};

struct WeakErrorReport {
  double alpha = 0.0;
  std::string test_function;
  std::vector<WeakErrorRow> rows;
  std::optional<RateFit> stable_fit;
  std::optional<RateFit> pareto_fit;
  double pareto_target = 0.0;  // 2/alpha
  bool pareto_in_band = false;  // within 0.3 of the target; reported only
  bool passed = false;          // stable slope >= pareto slope - 0.2
};

WeakErrorReport run_weak_error_experiment(const ExperimentConfig& cfg);
Report to_report(const WeakErrorReport& r);

// ---- increment moments ------------------------------------------------------

// (1/m) sum |Y_1 - x0|^kappa for one EM step of size gamma, per gamma, with the
// same innovations at every gamma.
struct IncrementScaling {
  std::vector<std::pair<double, double>> points;  // (gamma, moment)
  RateFit fit;
  double target = 0.0;  // kappa / alpha
};

IncrementScaling increment_moment_scaling(Scheme scheme, double alpha, double kappa, double x0,
                                          const std::vector<double>& gammas, std::size_t m,
                                          std::uint64_t seed, int workers);

// ---- ergodicity -------------------------------------------------------------

struct ErgodicityRow {
  std::size_t n = 0;
  double t = 0.0;
  double mean_distance = 0.0;  // (1/m) sum |X_i - Y_i|
  double exact = 0.0;          // |x - y| e^{-t}
  double max_deviation = 0.0;  // max_i | |X_i - Y_i| - exact |
  double w1 = 0.0;             // between the two marginal ensembles
};

struct ErgodicityReport {
  std::vector<ErgodicityRow> rows;
  std::optional<double> decay_rate;  // from log mean distance against t
  double max_mean_error = 0.0;
  bool passed = false;
};

ErgodicityReport run_ergodicity_experiment(const ExperimentConfig& cfg);
Report to_report(const ErgodicityReport& r);

// ---- characteristic-function check -------------------------------------------

struct CfCheckRow {
  double lambda;
  std::complex<double> oracle;
  std::complex<double> empirical;
  double abs_diff;
};

struct CfCheckReport {
  Scheme scheme = Scheme::ParetoEM;
  std::size_t n = 0;
  std::size_t m = 0;
  double threshold = 0.0;  // 4 / sqrt(m)
  std::vector<CfCheckRow> rows;
  bool passed = false;
};

// Empirical CF of the 1-D OU ensemble at step n against the closed-form chain
// law (Pareto or stable EM) or the exact transition (exact-ou).
CfCheckReport run_cf_check(const ExperimentConfig& cfg);
Report to_report(const CfCheckReport& r);

// ---- sampler check -----------------------------------------------------------

struct SampleCheckRow {
  std::string quantity;  // "cf", "survival", "beta-limit"
  double arg;
  double empirical;
  double oracle;
  double abs_diff;
  double threshold;
  bool ok;
};

struct SampleCheckReport {
  std::string scheme;
  int dim = 1;
  std::size_t m = 0;
  std::vector<SampleCheckRow> rows;
  bool passed = false;
};

// Draws m innovations. Stable: CF along the diagonal direction against
// exp(-|l|^alpha). Pareto: P(|z| > r) = r^{-alpha} at r = 2, 4, 8, plus in 1-D the
// CF against the oracle and the small-l limit (1 - phi(l)) / l^alpha -> beta^alpha.
SampleCheckReport run_sample_check(const ExperimentConfig& cfg);
Report to_report(const SampleCheckReport& r);

// ---- schedule ----------------------------------------------------------------

struct ScheduleReport {
  Table table;
  double omega = 0.0;
  bool omega_estimated = false;
  std::optional<double> omega_tail_estimate;  // from the first n_max steps as a list
  double limsup_bound = 0.0;
  double v_ratio_at_n_max = 0.0;
  bool bound_holds = false;
  bool passed = false;
};

ScheduleReport run_schedule_diagnostics(const ExperimentConfig& cfg);
Report to_report(const ScheduleReport& r);

// ---- drift certification -----------------------------------------------------

Report run_certify_drift(const ExperimentConfig& cfg);

// Dispatches on cfg.experiment (validated).
Report run_experiment(const ExperimentConfig& cfg);

}  // namespace levyem
