#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace levyem {

enum class Experiment { Rate, WeakError, Ergodicity, CfCheck, ScheduleDiag, Sample, CertifyDrift };

std::string to_string(Experiment e);
// "rate", "weak-error", "ergodicity", "cf-check", "schedule", "sample", "certify-drift"
Experiment parse_experiment(const std::string& text);

enum class Estimator { Matched, Independent };

// Flat experiment configuration. Optional fields left empty take per-experiment
// defaults (see the resolve helpers below).
struct ExperimentConfig {
  std::optional<Experiment> experiment;
  std::string scheme = "pareto";
  std::optional<double> alpha;
  int dim = 1;
  std::string drift = "ou";
  std::string schedule = "c-over-n:0.5";
  std::optional<double> theta;  // default 1/alpha
  std::optional<std::size_t> m;
  std::vector<std::size_t> checkpoints{128, 256, 512, 1024, 2048, 4096, 8192};
  double x0 = 0.0;
  double y0 = 0.0;
  std::optional<double> kappa;
  std::uint64_t seed = 42;
  std::string out;
  int workers = 0;
  Estimator estimator = Estimator::Matched;
  std::optional<double> tolerance;
  int bootstrap = 200;
  double ref_step = 0.01;
  double ref_time = 15.0;
  std::optional<std::vector<double>> lambdas;
  std::size_t n = 512;
  std::vector<double> gammas;  // default 2^-3 .. 2^-9
  std::string test_function = "cos";
  double rho = 0.5;
  std::size_t n_max = 100000;
  std::size_t pairs = 10000;
  double box = 10.0;

  // key = value pairs as read, in file order, for the report echo.
  std::vector<std::pair<std::string, std::string>> entries;
};

// Parses `key = value` lines; `#` starts a comment. Unknown keys, malformed
// values and duplicates are rejected with the line number. `source` names the
// input in messages.
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::string& path);

// Applies one key as if it had appeared in the file (used for CLI overrides).
void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value);

// Checks the fields the chosen experiment needs, naming the first missing or
// invalid key. `experiment` overrides the config's own key when given; a
// conflicting config key is an error.
void validate_config(ExperimentConfig& cfg, std::optional<Experiment> experiment = std::nullopt);

// "128..8192 geometric" or "128..8192" (doubling), or "100,200,400".
std::vector<std::size_t> parse_checkpoints(const std::string& text);

// LEVYEM_WORKERS wins over the config key; 0 means hardware concurrency.
int effective_workers(const ExperimentConfig& cfg);

std::size_t resolve_m(const ExperimentConfig& cfg);
// 1.2 when below alpha, else halfway between 1 and alpha.
double resolve_kappa(const ExperimentConfig& cfg);
std::vector<double> resolve_gammas(const ExperimentConfig& cfg);
// cf-check: 0.25, 0.5, 1, 2; sample: eight points from 0.1 to 5.
std::vector<double> resolve_lambdas(const ExperimentConfig& cfg);

}  // namespace levyem
