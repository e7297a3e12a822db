#include "levyem/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "levyem/drift.hpp"
#include "levyem/em_engine.hpp"
#include "levyem/error.hpp"
#include "levyem/sampling.hpp"
#include "levyem/schedule.hpp"

namespace levyem {

std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::Rate: return "rate";
    case Experiment::WeakError: return "weak-error";
    case Experiment::Ergodicity: return "ergodicity";
    case Experiment::CfCheck: return "cf-check";
    case Experiment::ScheduleDiag: return "schedule";
    case Experiment::Sample: return "sample";
    case Experiment::CertifyDrift: return "certify-drift";
  }
  return "unknown";
}

Experiment parse_experiment(const std::string& text) {
  static const std::pair<const char*, Experiment> names[] = {
      {"rate", Experiment::Rate},         {"weak-error", Experiment::WeakError},
      {"ergodicity", Experiment::Ergodicity}, {"cf-check", Experiment::CfCheck},
      {"schedule", Experiment::ScheduleDiag}, {"sample", Experiment::Sample},
      {"certify-drift", Experiment::CertifyDrift}};
  for (const auto& [name, e] : names)
    if (text == name) return e;
  throw PreconditionError("unknown experiment '" + text + "'");
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const char* first = v.data();
  const char* last = v.data() + v.size();
  if (!v.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last || !std::isfinite(out))
    throw PreconditionError("key '" + key + "': '" + v + "' is not a finite number");
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty())
    throw PreconditionError("key '" + key + "': '" + v + "' is not a nonnegative integer");
  return out;
}

std::size_t to_count(const std::string& key, const std::string& v) {
  // accept 2e5 style as long as it is integral
  if (v.find_first_of("eE.") != std::string::npos) {
    const double d = to_double(key, v);
    if (d < 0 || d != std::floor(d) || d > 1e15)
      throw PreconditionError("key '" + key + "': '" + v + "' is not a nonnegative integer");
    return static_cast<std::size_t>(d);
  }
  return static_cast<std::size_t>(to_u64(key, v));
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(key, trim(item)));
  if (out.empty()) throw PreconditionError("key '" + key + "' needs at least one value");
  return out;
}

}  // namespace

std::vector<std::size_t> parse_checkpoints(const std::string& text) {
  const std::string t = trim(text);
  std::vector<std::size_t> out;
  const auto dots = t.find("..");
  if (dots != std::string::npos) {
    std::string rest = trim(t.substr(dots + 2));
    const auto sp = rest.find_first_of(" \t");
    std::string mode;
    if (sp != std::string::npos) {
      mode = trim(rest.substr(sp));
      rest = rest.substr(0, sp);
    }
    if (!mode.empty() && mode != "geometric")
      throw PreconditionError("checkpoints: unknown spacing '" + mode + "' (only geometric)");
    const std::size_t a = to_count("checkpoints", trim(t.substr(0, dots)));
    const std::size_t b = to_count("checkpoints", rest);
    if (a < 1 || b < a) throw PreconditionError("checkpoints: need 1 <= A <= B in 'A..B'");
    for (std::size_t n = a; n <= b; n *= 2) out.push_back(n);
    if (out.back() != b) throw PreconditionError("checkpoints: B must be A times a power of two");
    return out;
  }
  std::stringstream ss(t);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_count("checkpoints", trim(item)));
  if (out.empty()) throw PreconditionError("checkpoints: empty list");
  for (std::size_t i = 1; i < out.size(); ++i)
    if (out[i] <= out[i - 1]) throw PreconditionError("checkpoints must be strictly increasing");
  return out;
}

void set_config_value(ExperimentConfig& c, const std::string& key, const std::string& v) {
  if (key == "experiment") c.experiment = parse_experiment(v);
  else if (key == "scheme") { parse_scheme(v); c.scheme = v; }
  else if (key == "alpha") c.alpha = to_double(key, v);
  else if (key == "dim") c.dim = static_cast<int>(to_count(key, v));
  else if (key == "drift") c.drift = v;
  else if (key == "schedule") c.schedule = v;
  else if (key == "theta") c.theta = to_double(key, v);
  else if (key == "m") c.m = to_count(key, v);
  else if (key == "checkpoints") c.checkpoints = parse_checkpoints(v);
  else if (key == "x0") c.x0 = to_double(key, v);
  else if (key == "y0") c.y0 = to_double(key, v);
  else if (key == "kappa") c.kappa = to_double(key, v);
  else if (key == "seed") c.seed = to_u64(key, v);
  else if (key == "out") c.out = v;
  else if (key == "workers") c.workers = static_cast<int>(to_count(key, v));
  else if (key == "estimator") {
    if (v == "matched") c.estimator = Estimator::Matched;
    else if (v == "independent") c.estimator = Estimator::Independent;
    else throw PreconditionError("estimator must be matched or independent, got '" + v + "'");
  }
  else if (key == "tolerance") c.tolerance = to_double(key, v);
  else if (key == "bootstrap") c.bootstrap = static_cast<int>(to_count(key, v));
  else if (key == "ref_step") c.ref_step = to_double(key, v);
  else if (key == "ref_time") c.ref_time = to_double(key, v);
  else if (key == "lambdas") c.lambdas = to_list(key, v);
  else if (key == "n") c.n = to_count(key, v);
  else if (key == "gammas") c.gammas = to_list(key, v);
  else if (key == "test_function") {
    if (v != "cos" && v != "rational")
      throw PreconditionError("test_function must be cos or rational, got '" + v + "'");
    c.test_function = v;
  }
  else if (key == "rho") c.rho = to_double(key, v);
  else if (key == "n_max") c.n_max = to_count(key, v);
  else if (key == "pairs") c.pairs = to_count(key, v);
  else if (key == "box") c.box = to_double(key, v);
  else throw PreconditionError("unknown key '" + key + "'");
}

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  ExperimentConfig c;
  std::istringstream in(text);
  std::string line;
  std::set<std::string> seen;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto where = source + ":" + std::to_string(lineno) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw PreconditionError(where + "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw PreconditionError(where + "missing key before '='");
    if (value.empty()) throw PreconditionError(where + "key '" + key + "' has no value");
    if (!seen.insert(key).second) throw PreconditionError(where + "duplicate key '" + key + "'");
    try {
      set_config_value(c, key, value);
    } catch (const PreconditionError& e) {
      throw PreconditionError(where + e.what());
    }
    c.entries.emplace_back(key, value);
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot read config '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), path);
}

void validate_config(ExperimentConfig& c, std::optional<Experiment> experiment) {
  if (experiment) {
    if (c.experiment && *c.experiment != *experiment)
      throw PreconditionError("config says experiment = " + to_string(*c.experiment) +
                              " but the command is " + to_string(*experiment));
    c.experiment = experiment;
  }
  if (!c.experiment) throw PreconditionError("missing required key 'experiment'");
  const Experiment e = *c.experiment;
  if (e != Experiment::CertifyDrift) {
    if (!c.alpha) throw PreconditionError("missing required key 'alpha'");
    validate_alpha(*c.alpha);
  }
  detail::require(c.dim >= 1, "dim must be at least 1");
  if (c.m) detail::require(*c.m >= 1, "m must be at least 1");
  if (c.kappa) {
    detail::require(*c.kappa >= 1.0, "kappa must be at least 1");
    if (c.alpha) detail::require(*c.kappa < *c.alpha, "kappa must be below alpha");
  }
  if (c.theta) detail::require(*c.theta > 0.0 && *c.theta <= 1.0, "theta must lie in (0, 1]");
  detail::require(c.bootstrap >= 2, "bootstrap must be at least 2");
  detail::require(c.ref_step > 0.0 && c.ref_time > 0.0, "ref_step and ref_time must be positive");
  detail::require(c.rho > 0.0, "rho must be positive");
  if (c.tolerance) detail::require(*c.tolerance >= 0.0, "tolerance must be nonnegative");
  for (double g : c.gammas) detail::require(g > 0.0 && g < 1.0, "gammas must lie in (0, 1)");
  // build once to surface drift/schedule errors at load time
  drift_from_name(c.drift, c.dim);
  if (c.alpha) parse_schedule(c.schedule, c.theta.value_or(1.0 / *c.alpha));
  const bool one_d = e == Experiment::Rate || e == Experiment::WeakError ||
                     e == Experiment::Ergodicity || e == Experiment::CfCheck;
  if (one_d) detail::require(c.dim == 1, to_string(e) + " runs in dimension 1 only");
  if (e == Experiment::Rate || e == Experiment::WeakError || e == Experiment::Ergodicity ||
      e == Experiment::CfCheck) {
    if (e != Experiment::Rate)
      detail::require(drift_from_name(c.drift, 1).is_ou, to_string(e) + " needs drift = ou");
  }
  if (e == Experiment::Rate && parse_scheme(c.scheme) == Scheme::ExactOU)
    detail::require(drift_from_name(c.drift, 1).is_ou, "the exact-ou scheme needs drift = ou");
}

int effective_workers(const ExperimentConfig& cfg) {
  if (std::getenv("LEVYEM_WORKERS")) return default_workers();
  return cfg.workers;
}

std::size_t resolve_m(const ExperimentConfig& c) {
  if (c.m) return *c.m;
  switch (c.experiment.value_or(Experiment::Rate)) {
    case Experiment::Rate: return 200000;
    case Experiment::WeakError: return 10000000;
    case Experiment::Ergodicity: return 1000;
    case Experiment::CfCheck:
    case Experiment::Sample: return 1000000;
    default: return 1000;
  }
}

double resolve_kappa(const ExperimentConfig& c) {
  if (c.kappa) return *c.kappa;
  const double alpha = c.alpha.value_or(1.5);
  return 1.2 < alpha ? 1.2 : 0.5 * (1.0 + alpha);
}

std::vector<double> resolve_lambdas(const ExperimentConfig& c) {
  if (c.lambdas) return *c.lambdas;
  if (c.experiment == Experiment::Sample) return {0.1, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 5.0};
  return {0.25, 0.5, 1.0, 2.0};
}

std::vector<double> resolve_gammas(const ExperimentConfig& c) {
  if (!c.gammas.empty()) return c.gammas;
  std::vector<double> g;
  for (int k = 3; k <= 9; ++k) g.push_back(std::ldexp(1.0, -k));
  return g;
}

}  // namespace levyem
