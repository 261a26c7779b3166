#include "smg_cli/config.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <set>

#include "smg/dataio.hpp"
#include "smg/errors.hpp"
#include "smg/logistic.hpp"
#include "smg/quadratic.hpp"

namespace smg::cli {
namespace {

using nlohmann::json;

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw UsageError("config: '" + where + "' must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items()) {
    if (!ok.count(key)) throw UsageError("config: unknown key '" + (where.empty() ? "" : where + ".") + key + "'");
  }
}

[[noreturn]] void bad_type(const std::string& key, const char* expected) {
  throw UsageError("config: '" + key + "' must be " + expected);
}

void read(const json& obj, const char* key, double& dst) {
  if (auto it = obj.find(key); it != obj.end()) {
    if (!it->is_number()) bad_type(key, "a number");
    dst = it->get<double>();
  }
}

void read(const json& obj, const char* key, bool& dst) {
  if (auto it = obj.find(key); it != obj.end()) {
    if (!it->is_boolean()) bad_type(key, "true or false");
    dst = it->get<bool>();
  }
}

void read(const json& obj, const char* key, std::string& dst) {
  if (auto it = obj.find(key); it != obj.end()) {
    if (!it->is_string()) bad_type(key, "a string");
    dst = it->get<std::string>();
  }
}

template <class U>
void read_unsigned(const json& obj, const char* key, U& dst) {
  if (auto it = obj.find(key); it != obj.end()) {
    if (!it->is_number_unsigned()) bad_type(key, "a nonnegative integer");
    dst = it->get<U>();
  }
}

bool one_of(const std::string& v, std::initializer_list<const char*> options) {
  for (const char* o : options)
    if (v == o) return true;
  return false;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (!one_of(problem.kind, {"logistic", "quadratic"})) {
    throw UsageError("problem kind must be 'logistic' or 'quadratic', got '" + problem.kind + "'");
  }
  if (!(problem.reg >= 0.0)) throw UsageError("--reg must be >= 0");
  if (problem.synthetic.n == 0 || problem.synthetic.d == 0) throw UsageError("synthetic n and d must be >= 1");
  if (!(problem.synthetic.separability >= 0.0 && problem.synthetic.separability <= 1.0)) {
    throw UsageError("--separability must lie in [0, 1]");
  }
  if (problem.quadratic.n == 0 || problem.quadratic.d == 0) throw UsageError("quadratic n and d must be >= 1");
  if (!(problem.quadratic.condition >= 1.0)) throw UsageError("quadratic condition must be >= 1");
  try {
    parse_algorithm(algorithm);
    parse_schedule_kind(schedule.kind);
    parse_shuffling_kind(strategy);
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  if (!(beta >= 0.0 && beta < 1.0)) throw UsageError("--beta must lie in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw UsageError("--beta2 must lie in [0, 1)");
  if (!(epsilon > 0.0)) throw UsageError("epsilon must be positive");
  if (!(schedule.gamma > 0.0)) throw UsageError("--gamma must be positive");
  if (!(schedule.lambda >= 0.0)) throw UsageError("--lambda must be >= 0");
  if (!(schedule.rho > 0.0 && schedule.rho <= 1.0)) throw UsageError("--rho must lie in (0, 1]");
  if (T == 0) throw UsageError("--T must be >= 1");
  if (schedule.kind == "cosine" || schedule.kind == "cos") {
    if (T < 2) throw UsageError("the cosine schedule needs --T >= 2");
  }
  if (repeats == 0) throw UsageError("--repeats must be >= 1");
  if (!(cap_factor > 0.0 && cap_factor <= 1.0)) throw UsageError("--cap-factor must lie in (0, 1]");
  if (!(w0_scale >= 0.0)) throw UsageError("--w0-scale must be >= 0");
  if (!one_of(step_scale, {"epoch", "sample"})) throw UsageError("--step-scale must be 'epoch' or 'sample'");
  if (jobs == 0) throw UsageError("--jobs must be >= 1");
  if (parse_algorithm(algorithm) == Algorithm::kSsmg &&
      !ShufflingStrategy{parse_shuffling_kind(strategy), 0}.is_single_permutation()) {
    throw UsageError("ssmg needs a single permutation: use --strategy once or inc");
  }
}

json to_json(const ExperimentConfig& c) {
  json j = canonical_json(c);
  j["out"] = c.out;
  j["jobs"] = c.jobs;
  return j;
}

json canonical_json(const ExperimentConfig& c) {
  const auto& p = c.problem;
  return {
      {"problem",
       {{"kind", p.kind},
        {"data", p.data},
        {"reg", p.reg},
        {"scale_features", p.scale_features},
        {"synthetic",
         {{"n", p.synthetic.n}, {"d", p.synthetic.d}, {"seed", p.synthetic.seed},
          {"separability", p.synthetic.separability}}},
        {"quadratic",
         {{"n", p.quadratic.n}, {"d", p.quadratic.d}, {"seed", p.quadratic.seed},
          {"condition", p.quadratic.condition}}}}},
      {"algorithm", c.algorithm},
      {"beta", c.beta},
      {"beta2", c.beta2},
      {"epsilon", c.epsilon},
      {"schedule",
       {{"kind", c.schedule.kind},
        {"gamma", c.schedule.gamma},
        {"lambda", c.schedule.lambda},
        {"rho", c.schedule.rho},
        {"rr_scaling", c.schedule.rr_scaling}}},
      {"strategy", c.strategy},
      {"T", c.T},
      {"seed", c.seed},
      {"repeats", c.repeats},
      {"w0_seed", c.w0_seed},
      {"w0_scale", c.w0_scale},
      {"enforce_cap", c.enforce_cap},
      {"cap_factor", c.cap_factor},
      {"step_scale", c.step_scale},
  };
}

std::string config_hash(const ExperimentConfig& config) { return fnv1a_hex(canonical_json(config).dump()); }

ExperimentConfig config_from_json(const json& input) {
  const json& doc = input.contains("config") && input.contains("config_hash") ? input.at("config") : input;
  check_keys(doc,
             {"problem", "algorithm", "beta", "beta2", "epsilon", "schedule", "strategy", "T", "seed", "repeats",
              "w0_seed", "w0_scale", "enforce_cap", "cap_factor", "step_scale", "out", "jobs"},
             "");
  ExperimentConfig c;
  if (auto it = doc.find("problem"); it != doc.end()) {
    const json& p = *it;
    check_keys(p, {"kind", "data", "reg", "scale_features", "synthetic", "quadratic"}, "problem");
    read(p, "kind", c.problem.kind);
    read(p, "data", c.problem.data);
    read(p, "reg", c.problem.reg);
    read(p, "scale_features", c.problem.scale_features);
    if (auto s = p.find("synthetic"); s != p.end()) {
      check_keys(*s, {"n", "d", "seed", "separability"}, "problem.synthetic");
      read_unsigned(*s, "n", c.problem.synthetic.n);
      read_unsigned(*s, "d", c.problem.synthetic.d);
      read_unsigned(*s, "seed", c.problem.synthetic.seed);
      read(*s, "separability", c.problem.synthetic.separability);
    }
    if (auto q = p.find("quadratic"); q != p.end()) {
      check_keys(*q, {"n", "d", "seed", "condition"}, "problem.quadratic");
      read_unsigned(*q, "n", c.problem.quadratic.n);
      read_unsigned(*q, "d", c.problem.quadratic.d);
      read_unsigned(*q, "seed", c.problem.quadratic.seed);
      read(*q, "condition", c.problem.quadratic.condition);
    }
  }
  if (auto it = doc.find("schedule"); it != doc.end()) {
    check_keys(*it, {"kind", "gamma", "lambda", "rho", "rr_scaling"}, "schedule");
    read(*it, "kind", c.schedule.kind);
    read(*it, "gamma", c.schedule.gamma);
    read(*it, "lambda", c.schedule.lambda);
    read(*it, "rho", c.schedule.rho);
    read(*it, "rr_scaling", c.schedule.rr_scaling);
  }
  read(doc, "algorithm", c.algorithm);
  read(doc, "beta", c.beta);
  read(doc, "beta2", c.beta2);
  read(doc, "epsilon", c.epsilon);
  read(doc, "strategy", c.strategy);
  read_unsigned(doc, "T", c.T);
  read_unsigned(doc, "seed", c.seed);
  read_unsigned(doc, "repeats", c.repeats);
  read_unsigned(doc, "w0_seed", c.w0_seed);
  read(doc, "w0_scale", c.w0_scale);
  read(doc, "enforce_cap", c.enforce_cap);
  read(doc, "cap_factor", c.cap_factor);
  read(doc, "step_scale", c.step_scale);
  read(doc, "out", c.out);
  read_unsigned(doc, "jobs", c.jobs);
  return c;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError("config file " + path + ": " + e.what());
  }
  return config_from_json(doc);
}

std::string resolve_dataset(const std::string& reference) {
  namespace fs = std::filesystem;
  if (fs::exists(reference)) return reference;
  std::vector<fs::path> tried;
  if (const char* root = std::getenv("SMG_DATA_DIR"); root && *root) {
    const fs::path dir(root);
    std::vector<fs::path> candidates{dir / reference};
    if (reference == "ijcnn1") candidates.push_back(dir / "ijcnn1.t");
    for (const auto& c : candidates) {
      if (fs::exists(c)) return c.string();
      tried.push_back(c);
    }
  }
  std::string message = "dataset '" + reference + "' not found";
  if (tried.empty()) message += " (SMG_DATA_DIR is not set)";
  throw IoError(message, reference);
}

std::unique_ptr<Problem> build_problem(const ExperimentConfig& config) {
  const auto& p = config.problem;
  if (p.kind == "quadratic") {
    return std::make_unique<QuadraticMeanProblem>(
        random_quadratic_problem(p.quadratic.n, p.quadratic.d, p.quadratic.seed, p.quadratic.condition));
  }
  std::vector<SparseSample> samples;
  std::size_t d = 0;
  if (p.data.empty()) {
    samples = synth_binary_dataset(p.synthetic.n, p.synthetic.d, p.synthetic.seed, p.synthetic.separability);
    d = p.synthetic.d;
  } else {
    auto parsed = load_libsvm_file(resolve_dataset(p.data));
    samples = std::move(parsed.samples);
    d = parsed.d;
  }
  if (p.scale_features) scale_features(samples, d);
  return std::make_unique<LogisticProblem>(std::move(samples), p.reg, d);
}

OptimizerConfig optimizer_config(const ExperimentConfig& config) {
  OptimizerConfig o;
  o.algorithm = parse_algorithm(config.algorithm);
  o.beta = o.algorithm == Algorithm::kSgd ? 0.0 : config.beta;
  o.beta2 = config.beta2;
  o.epsilon = config.epsilon;
  return o;
}

ShufflingStrategy strategy_for(const ExperimentConfig& config, std::uint64_t seed) {
  return {parse_shuffling_kind(config.strategy), seed};
}

StepScale step_scale_of(const ExperimentConfig& config) {
  return config.step_scale == "sample" ? StepScale::kSample : StepScale::kEpoch;
}

StepCap cap_for(const ExperimentConfig& config, const Problem& problem) {
  const auto& k = problem.constants();
  const auto opt = optimizer_config(config);
  if (opt.algorithm == Algorithm::kSsmg) return cap_bounded_gradient(k.L);
  if (parse_shuffling_kind(config.strategy) == ShufflingKind::kRandomizedReshuffling) {
    return cap_rr(opt.beta, k.theta, problem.num_components(), k.L);
  }
  return cap_general(opt.beta, k.theta, k.L);
}

Schedule build_schedule(const ExperimentConfig& config, const Problem& problem) {
  const auto& s = config.schedule;
  Schedule schedule = [&] {
    switch (parse_schedule_kind(s.kind)) {
      case ScheduleKind::kConstant: return Schedule::constant(s.gamma, config.T);
      case ScheduleKind::kDiminishing: return Schedule::diminishing(s.gamma, s.lambda, config.T);
      case ScheduleKind::kExponential: return Schedule::exponential(s.gamma, s.rho, config.T);
      case ScheduleKind::kCosine: return Schedule::cosine(s.gamma, config.T);
      case ScheduleKind::kCustom: break;
    }
    throw UsageError("unsupported schedule kind");
  }();
  if (s.rr_scaling) schedule = schedule.with_rr_scaling(problem.num_components());
  if (config.enforce_cap) schedule = enforce_cap(schedule, cap_for(config, problem), config.cap_factor);
  return schedule;
}

Vector initial_point_for(const ExperimentConfig& config, std::size_t d) {
  return initial_point(d, config.w0_seed, config.w0_scale);
}

}  // namespace smg::cli
