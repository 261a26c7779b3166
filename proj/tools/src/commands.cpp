#include "smg_cli/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "smg/dataio.hpp"
#include "smg/errors.hpp"

namespace smg::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<std::uint64_t> seeds_of(const ExperimentConfig& config) {
  std::vector<std::uint64_t> seeds(config.repeats);
  for (std::size_t k = 0; k < config.repeats; ++k) seeds[k] = config.seed + k;
  return seeds;
}

namespace {

RunRecord run_one(const ExperimentConfig& config, const Problem& problem, const Schedule& schedule,
                  std::uint64_t seed) {
  RunOptions options;
  options.step_scale = step_scale_of(config);
  RunRecord record = run_epochs(problem, schedule, strategy_for(config, seed), optimizer_config(config),
                                initial_point_for(config, problem.dimension()), options);
  ExperimentConfig single = config;
  single.seed = seed;
  single.repeats = 1;
  record.config_hash = config_hash(single);
  record.seed = seed;
  return record;
}

double mean(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double sample_std(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

BoundReport refused_report(Theorem theorem, const std::string& message) {
  BoundReport report;
  report.theorem = theorem;
  report.premises_met = false;
  report.message = message;
  return report;
}

/// Audit of a single run against the bound that matches its method.
BoundReport audit_single(const ExperimentConfig& config, const RunRecord& record, const Schedule& schedule,
                         const Problem& problem, Theorem theorem) {
  const auto& constants = problem.constants();
  switch (theorem) {
    case Theorem::kGeneral: {
      const auto algo = parse_algorithm(config.algorithm);
      if (algo != Algorithm::kSmg && algo != Algorithm::kSgd) {
        return refused_report(theorem, "no convergence bound is available for " + config.algorithm);
      }
      return audit_theorem1(record, schedule, constants);
    }
    case Theorem::kSingleShuffle:
      return audit_theorem3(record, schedule, constants, problem.num_components());
    case Theorem::kRandomReshuffling: {
      const RunRecord one[] = {record};
      return audit_theorem2(one, schedule, constants, problem.num_components());
    }
  }
  return refused_report(theorem, "unknown theorem");
}

Theorem default_theorem(const ExperimentConfig& config) {
  const auto algo = parse_algorithm(config.algorithm);
  if (algo == Algorithm::kSsmg) return Theorem::kSingleShuffle;
  const bool rr = parse_shuffling_kind(config.strategy) == ShufflingKind::kRandomizedReshuffling;
  if (rr && config.repeats > 1 && (algo == Algorithm::kSmg || algo == Algorithm::kSgd)) {
    return Theorem::kRandomReshuffling;
  }
  return Theorem::kGeneral;
}

int exit_code_for(const std::vector<BoundReport>& reports) {
  for (const auto& r : reports) {
    if (!r.premises_met) return kExitRefused;
  }
  for (const auto& r : reports) {
    if (!r.satisfied) return kExitViolated;
  }
  return kExitOk;
}

std::string join_doubles(const std::vector<double>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + format_double(xs[i]);
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// Grid search

PublishedGrid published_grid(Algorithm algorithm, ScheduleKind schedule, double default_beta) {
  PublishedGrid g;
  g.fine = {0.5, 0.4, 0.2, 0.1, 0.08, 0.06, 0.05};
  switch (algorithm) {
    case Algorithm::kSgd:
      g.coarse = {0.1, 0.01, 0.001};
      g.betas = {0.0};
      break;
    case Algorithm::kSgdMomentum:
      g.coarse = {0.1, 0.01, 0.001};
      g.betas = {0.9};
      break;
    case Algorithm::kAdam:
      g.coarse = {0.01, 0.001, 0.0001};
      g.fine = {0.002, 0.001, 0.0005};
      g.anchor = 0.001;
      g.betas = {0.9};
      break;
    case Algorithm::kSsmg:
      g.coarse = {0.1, 0.01, 0.001};
      g.betas = {0.1, 0.5, 0.9};
      break;
    case Algorithm::kSmg:
      g.coarse = {1.0, 0.1, 0.01};
      g.betas = {default_beta};
      break;
  }
  if (algorithm != Algorithm::kAdam) {
    switch (schedule) {
      case ScheduleKind::kCosine: g.coarse = {1.0, 0.1, 0.01, 0.001}; break;
      case ScheduleKind::kDiminishing:
        g.coarse = {1.0, 0.1, 0.01};
        g.lambdas = {1.0, 2.0, 4.0, 8.0};
        break;
      case ScheduleKind::kExponential:
        g.coarse = {1.0, 0.1, 0.01};
        g.decays = {0.99, 0.995, 0.999};
        break;
      default: break;
    }
  }
  return g;
}

std::vector<double> fine_grid_around(const PublishedGrid& grid, double best) {
  std::vector<double> out;
  out.reserve(grid.fine.size());
  for (double v : grid.fine) out.push_back(v / grid.anchor * best);
  return out;
}

Schedule schedule_for_point(const ExperimentConfig& config, const Problem& problem, const GridPoint& point) {
  const auto kind = parse_schedule_kind(config.schedule.kind);
  const std::size_t T = config.T;
  const double rho = kind == ScheduleKind::kExponential ? std::pow(point.decay, static_cast<double>(T)) : 1.0;
  const double gamma = gamma_for_initial_rate(kind, point.lr, T, point.lambda, rho);
  Schedule s = [&] {
    switch (kind) {
      case ScheduleKind::kDiminishing: return Schedule::diminishing(gamma, point.lambda, T);
      case ScheduleKind::kExponential: return Schedule::exponential(gamma, rho, T);
      case ScheduleKind::kCosine: return Schedule::cosine(gamma, T);
      default: return Schedule::constant(gamma, T);
    }
  }();
  if (config.enforce_cap) {
    ExperimentConfig at = config;
    at.beta = point.beta;
    s = enforce_cap(s, cap_for(at, problem), config.cap_factor);
  }
  return s;
}

std::vector<GridOutcome> evaluate_grid(const ExperimentConfig& config, const Problem& problem,
                                       const std::vector<GridPoint>& points, const std::string& stage,
                                       std::size_t jobs) {
  std::vector<GridOutcome> outcomes(points.size());
  const auto seeds = seeds_of(config);
  auto evaluate = [&](std::size_t k) {
    GridOutcome& o = outcomes[k];
    o.point = points[k];
    o.stage = stage;
    try {
      ExperimentConfig at = config;
      at.beta = points[k].beta;
      const Schedule schedule = schedule_for_point(at, problem, points[k]);
      std::vector<double> losses, grads;
      for (auto seed : seeds) {
        const auto record = run_one(at, problem, schedule, seed);
        losses.push_back(record.final_loss);
        grads.push_back(record.weighted_grad_norm_sq());
      }
      o.final_loss = mean(losses);
      o.weighted_grad_norm_sq = mean(grads);
      if (!std::isfinite(o.final_loss) || !std::isfinite(o.weighted_grad_norm_sq)) {
        o.failed = true;
        o.message = "non-finite result";
      }
    } catch (const std::exception& e) {
      o.failed = true;
      o.message = e.what();
    }
    if (o.failed) {
      o.final_loss = std::numeric_limits<double>::quiet_NaN();
      o.weighted_grad_norm_sq = std::numeric_limits<double>::quiet_NaN();
    }
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min(jobs, points.size()));
  if (workers == 1) {
    for (std::size_t k = 0; k < points.size(); ++k) evaluate(k);
    return outcomes;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < points.size(); k = next++) evaluate(k);
    });
  }
  for (auto& t : pool) t.join();
  return outcomes;
}

std::vector<GridOutcome> rank_outcomes(std::vector<GridOutcome> outcomes) {
  std::stable_sort(outcomes.begin(), outcomes.end(), [](const GridOutcome& a, const GridOutcome& b) {
    if (a.failed != b.failed) return !a.failed;
    if (a.failed) return false;
    return a.final_loss < b.final_loss;
  });
  return outcomes;
}

std::string grid_csv(const std::vector<GridOutcome>& ranked) {
  std::ostringstream os;
  os << "rank,stage,lr,lambda,decay,beta,final_loss,weighted_grad_norm_sq,failed,message\n";
  for (std::size_t k = 0; k < ranked.size(); ++k) {
    const auto& o = ranked[k];
    std::string message = o.message;
    std::replace(message.begin(), message.end(), ',', ';');
    std::replace(message.begin(), message.end(), '\n', ' ');
    os << k + 1 << ',' << o.stage << ',' << format_double(o.point.lr) << ',' << format_double(o.point.lambda) << ','
       << format_double(o.point.decay) << ',' << format_double(o.point.beta) << ','
       << (o.failed ? "nan" : format_double(o.final_loss)) << ','
       << (o.failed ? "nan" : format_double(o.weighted_grad_norm_sq)) << ',' << (o.failed ? 1 : 0) << ','
       << message << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Method comparison

CompareTable compare_methods(const ExperimentConfig& config, const Problem& problem,
                             const std::vector<MethodSpec>& methods) {
  CompareTable table;
  const auto seeds = seeds_of(config);
  for (const auto& m : methods) {
    ExperimentConfig at = config;
    at.algorithm = std::string(to_string(m.optimizer.algorithm));
    at.beta = m.optimizer.beta;
    at.beta2 = m.optimizer.beta2;
    at.epsilon = m.optimizer.epsilon;
    at.schedule.gamma = m.gamma;
    at.validate();
    const Schedule schedule = build_schedule(at, problem);

    std::vector<std::vector<double>> loss(config.T + 1), grad(config.T + 1);
    for (auto seed : seeds) {
      const auto record = run_one(at, problem, schedule, seed);
      for (std::size_t k = 0; k < config.T; ++k) {
        loss[k].push_back(record.rows[k].loss);
        grad[k].push_back(record.rows[k].grad_norm_sq);
      }
      loss[config.T].push_back(record.final_loss);
      grad[config.T].push_back(record.final_grad_norm_sq);
    }
    table.methods.push_back(m.name);
    auto& lm = table.loss_mean.emplace_back();
    auto& ls = table.loss_std.emplace_back();
    auto& gm = table.grad_mean.emplace_back();
    auto& gs = table.grad_std.emplace_back();
    for (std::size_t k = 0; k <= config.T; ++k) {
      lm.push_back(mean(loss[k]));
      ls.push_back(sample_std(loss[k]));
      gm.push_back(mean(grad[k]));
      gs.push_back(sample_std(grad[k]));
    }
  }
  return table;
}

std::string compare_csv(const CompareTable& table) {
  std::ostringstream os;
  os << "epoch";
  for (const auto& name : table.methods) {
    os << ',' << name << "_loss_mean," << name << "_loss_std," << name << "_grad_norm_sq_mean," << name
       << "_grad_norm_sq_std";
  }
  os << '\n';
  const std::size_t epochs = table.methods.empty() ? 0 : table.loss_mean[0].size();
  for (std::size_t k = 0; k < epochs; ++k) {
    os << k;
    for (std::size_t m = 0; m < table.methods.size(); ++m) {
      os << ',' << format_double(table.loss_mean[m][k]) << ',' << format_double(table.loss_std[m][k]) << ','
         << format_double(table.grad_mean[m][k]) << ',' << format_double(table.grad_std[m][k]);
    }
    os << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Command line

namespace {

/// Options that map onto ExperimentConfig fields. Values are applied only when
/// given on the command line, on top of --config.
class ConfigOptions {
 public:
  void attach(CLI::App* app) {
    app->add_option("--config", config_path_, "JSON experiment config (a run sidecar also works)");
    add<std::string>(app, "--problem", "logistic or quadratic", [](auto& c, auto& v) { c.problem.kind = v; });
    add<std::string>(app, "--data", "LIBSVM file or dataset name under $SMG_DATA_DIR",
                     [](auto& c, auto& v) { c.problem.data = v; });
    add<double>(app, "--reg", "nonconvex regularizer weight", [](auto& c, auto& v) { c.problem.reg = v; });
    flag(app, "--scale-features", "scale every feature column into [-1, 1]",
         [](auto& c) { c.problem.scale_features = true; });
    add<std::size_t>(app, "--synth-n", "synthetic sample count", [](auto& c, auto& v) { c.problem.synthetic.n = v; });
    add<std::size_t>(app, "--synth-d", "synthetic dimension", [](auto& c, auto& v) { c.problem.synthetic.d = v; });
    add<std::uint64_t>(app, "--synth-seed", "synthetic data seed",
                       [](auto& c, auto& v) { c.problem.synthetic.seed = v; });
    add<double>(app, "--separability", "synthetic label agreement in [0, 1]",
                [](auto& c, auto& v) { c.problem.synthetic.separability = v; });
    add<std::size_t>(app, "--quad-n", "quadratic component count", [](auto& c, auto& v) { c.problem.quadratic.n = v; });
    add<std::size_t>(app, "--quad-d", "quadratic dimension", [](auto& c, auto& v) { c.problem.quadratic.d = v; });
    add<std::uint64_t>(app, "--quad-seed", "quadratic fixture seed",
                       [](auto& c, auto& v) { c.problem.quadratic.seed = v; });
    add<double>(app, "--condition", "quadratic curvature ratio",
                [](auto& c, auto& v) { c.problem.quadratic.condition = v; });
    add<std::string>(app, "--algo", "smg, ssmg, sgd, sgdm or adam", [](auto& c, auto& v) { c.algorithm = v; });
    add<double>(app, "--beta", "momentum weight (beta1 for adam)", [](auto& c, auto& v) { c.beta = v; });
    add<double>(app, "--beta2", "adam second-moment decay", [](auto& c, auto& v) { c.beta2 = v; });
    add<double>(app, "--epsilon", "adam epsilon", [](auto& c, auto& v) { c.epsilon = v; });
    app->add_option("--nu", nu_, "ssmg: set beta = (nu / T^{2/3})^{1/n}");
    add<std::string>(app, "--schedule", "constant, diminishing, exponential or cosine",
                     [](auto& c, auto& v) { c.schedule.kind = v; });
    add<double>(app, "--gamma", "schedule scale gamma", [](auto& c, auto& v) { c.schedule.gamma = v; });
    add<double>(app, "--lambda", "diminishing schedule offset", [](auto& c, auto& v) { c.schedule.lambda = v; });
    add<double>(app, "--rho", "exponential decay over the horizon", [](auto& c, auto& v) { c.schedule.rho = v; });
    flag(app, "--rr-scaling", "multiply gamma by n^{1/3}", [](auto& c) { c.schedule.rr_scaling = true; });
    add<std::size_t>(app, "--T", "number of epochs", [](auto& c, auto& v) { c.T = v; });
    add<std::string>(app, "--strategy", "rr, once or inc", [](auto& c, auto& v) { c.strategy = v; });
    add<std::uint64_t>(app, "--seed", "first seed", [](auto& c, auto& v) { c.seed = v; });
    add<std::size_t>(app, "--repeats", "number of seeds", [](auto& c, auto& v) { c.repeats = v; });
    add<std::uint64_t>(app, "--w0-seed", "seed of the starting point", [](auto& c, auto& v) { c.w0_seed = v; });
    add<double>(app, "--w0-scale", "standard deviation of the starting point",
                [](auto& c, auto& v) { c.w0_scale = v; });
    flag(app, "--enforce-cap", "rescale the schedule under the theorem step cap",
         [](auto& c) { c.enforce_cap = true; });
    add<double>(app, "--cap-factor", "fraction of the cap used by --enforce-cap",
                [](auto& c, auto& v) { c.cap_factor = v; });
    add<std::string>(app, "--step-scale", "epoch (eta_t / n per step) or sample (eta_t per step)",
                     [](auto& c, auto& v) { c.step_scale = v; });
    add<std::string>(app, "--out", "output directory", [](auto& c, auto& v) { c.out = v; });
    add<std::size_t>(app, "--jobs", "worker threads for grid search", [](auto& c, auto& v) { c.jobs = v; });
  }

  ExperimentConfig resolve() const {
    ExperimentConfig config = config_path_.empty() ? ExperimentConfig{} : load_config_file(config_path_);
    for (const auto& apply : appliers_) apply(config);
    config.validate();
    return config;
  }

  /// Applies --nu once the component count is known.
  void finish(ExperimentConfig& config, const Problem& problem) const {
    if (!nu_) return;
    if (parse_algorithm(config.algorithm) != Algorithm::kSsmg) throw UsageError("--nu applies to --algo ssmg only");
    if (!(*nu_ > 0.0)) throw UsageError("--nu must be positive");
    config.beta = single_shuffle_beta(*nu_, config.T, problem.num_components());
    config.validate();
  }

 private:
  template <class T>
  void add(CLI::App* app, const std::string& name, const std::string& help,
           std::function<void(ExperimentConfig&, const T&)> set) {
    auto value = std::make_shared<T>();
    CLI::Option* opt = app->add_option(name, *value, help);
    appliers_.push_back([opt, value, set](ExperimentConfig& c) {
      if (opt->count() > 0) set(c, *value);
    });
  }

  void flag(CLI::App* app, const std::string& name, const std::string& help,
            std::function<void(ExperimentConfig&)> set) {
    CLI::Option* opt = app->add_flag(name, help);
    appliers_.push_back([opt, set](ExperimentConfig& c) {
      if (opt->count() > 0) set(c);
    });
  }

  std::string config_path_;
  std::optional<double> nu_;
  std::vector<std::function<void(ExperimentConfig&)>> appliers_;
};

struct Prepared {
  ExperimentConfig config;
  std::unique_ptr<Problem> problem;
};

Prepared prepare(const ConfigOptions& options) {
  Prepared p;
  p.config = options.resolve();
  p.problem = build_problem(p.config);
  options.finish(p.config, *p.problem);
  return p;
}

json sidecar_base(const ExperimentConfig& config) {
  return json{{"config", to_json(config)}, {"config_hash", config_hash(config)}, {"seeds", seeds_of(config)}};
}

int cmd_run(const ConfigOptions& options, bool audit, std::ostream& out) {
  auto [config, problem] = prepare(options);
  const Schedule schedule = build_schedule(config, *problem);
  const fs::path dir(config.out);
  std::vector<RunRecord> records;
  std::vector<BoundReport> reports;
  std::vector<double> finals, weighted;
  for (auto seed : seeds_of(config)) {
    RunRecord record = run_one(config, *problem, schedule, seed);
    ExperimentConfig single = config;
    single.seed = seed;
    single.repeats = 1;
    const fs::path stem = dir / ("run_" + config.algorithm + "_s" + std::to_string(seed));
    std::optional<BoundReport> report;
    if (audit && default_theorem(config) != Theorem::kRandomReshuffling) {
      report = audit_single(config, record, schedule, *problem, default_theorem(config));
      reports.push_back(*report);
    }
    write_trace(record, stem, to_json(single), report ? &*report : nullptr);
    out << "seed " << seed << ": final_loss " << format_double(record.final_loss) << "  weighted_grad_norm_sq "
        << format_double(record.weighted_grad_norm_sq()) << "  output_index " << record.selected_index << '\n';
    if (report) out << "  " << report->summary() << '\n';
    finals.push_back(record.final_loss);
    weighted.push_back(record.weighted_grad_norm_sq());
    if (audit) records.push_back(std::move(record));
  }
  if (config.repeats > 1) {
    out << "mean over " << config.repeats << " seeds: final_loss " << format_double(mean(finals))
        << "  weighted_grad_norm_sq " << format_double(mean(weighted)) << '\n';
  }
  if (audit && default_theorem(config) == Theorem::kRandomReshuffling) {
    const auto report = audit_theorem2(records, schedule, problem->constants(), problem->num_components());
    json doc = sidecar_base(config);
    doc["report"] = to_json(report);
    write_text_file(dir / "audit_rr.json", doc.dump(2) + "\n");
    out << report.summary() << '\n';
    reports.push_back(report);
  }
  return audit ? exit_code_for(reports) : kExitOk;
}

struct GridOptions {
  bool published = false;
  std::vector<double> lr, beta, lambda, decay;
};

int cmd_grid(const ConfigOptions& options, const GridOptions& g, std::ostream& out, std::ostream& err) {
  auto [config, problem] = prepare(options);
  const auto algo = parse_algorithm(config.algorithm);
  const auto kind = parse_schedule_kind(config.schedule.kind);
  std::vector<GridOutcome> all;

  auto points_of = [](const std::vector<double>& lrs, const std::vector<double>& lambdas,
                      const std::vector<double>& decays, const std::vector<double>& betas) {
    std::vector<GridPoint> pts;
    for (double b : betas)
      for (double l : lambdas)
        for (double d : decays)
          for (double lr : lrs) pts.push_back({lr, l, d, b});
    return pts;
  };

  if (g.published) {
    const PublishedGrid grid = published_grid(algo, kind, config.beta);
    const auto coarse = evaluate_grid(config, *problem, points_of(grid.coarse, grid.lambdas, grid.decays, grid.betas),
                                      "coarse", config.jobs);
    all = coarse;
    const auto ranked = rank_outcomes(coarse);
    if (!ranked.front().failed) {
      const GridPoint best = ranked.front().point;
      std::vector<double> fine;
      for (double lr : fine_grid_around(grid, best.lr)) {
        if (std::abs(lr - best.lr) > 1e-12 * best.lr) fine.push_back(lr);
      }
      const auto second =
          evaluate_grid(config, *problem, points_of(fine, {best.lambda}, {best.decay}, {best.beta}), "fine", config.jobs);
      all.insert(all.end(), second.begin(), second.end());
    }
  } else {
    std::vector<double> lrs = g.lr;
    if (lrs.empty()) {
      const Schedule s = build_schedule(config, *problem);
      lrs = {kind == ScheduleKind::kCosine ? s.effective_gamma() / std::cbrt(static_cast<double>(config.T)) : s.eta(1)};
    }
    const auto betas = g.beta.empty() ? std::vector<double>{config.beta} : g.beta;
    const auto lambdas = g.lambda.empty() ? std::vector<double>{config.schedule.lambda} : g.lambda;
    const auto decays = g.decay.empty()
                            ? std::vector<double>{std::pow(config.schedule.rho, 1.0 / static_cast<double>(config.T))}
                            : g.decay;
    for (double b : betas) {
      if (!(b >= 0.0 && b < 1.0)) throw UsageError("--grid-beta values must lie in [0, 1)");
    }
    for (double lr : lrs) {
      if (!(lr > 0.0)) throw UsageError("--grid-lr values must be positive");
    }
    for (double d : decays) {
      if (!(d > 0.0 && d <= 1.0)) throw UsageError("--grid-decay values must lie in (0, 1]");
    }
    all = evaluate_grid(config, *problem, points_of(lrs, lambdas, decays, betas), "custom", config.jobs);
  }

  const auto ranked = rank_outcomes(all);
  const fs::path dir(config.out);
  write_text_file(dir / "grid.csv", grid_csv(ranked));
  json doc = sidecar_base(config);
  doc["points"] = ranked.size();
  if (!ranked.front().failed) {
    const auto& b = ranked.front();
    doc["best"] = {{"lr", b.point.lr},   {"lambda", b.point.lambda},         {"decay", b.point.decay},
                   {"beta", b.point.beta}, {"final_loss", b.final_loss}, {"weighted_grad_norm_sq", b.weighted_grad_norm_sq}};
  }
  write_text_file(dir / "grid.json", doc.dump(2) + "\n");

  std::size_t failed = 0;
  for (const auto& o : ranked) failed += o.failed ? 1 : 0;
  out << ranked.size() << " grid points, " << failed << " diverged\n";
  if (ranked.front().failed) {
    err << "error: every grid point diverged\n";
    return kExitRuntime;
  }
  const auto& b = ranked.front();
  out << "best: lr " << format_double(b.point.lr) << "  beta " << format_double(b.point.beta);
  if (kind == ScheduleKind::kDiminishing) out << "  lambda " << format_double(b.point.lambda);
  if (kind == ScheduleKind::kExponential) out << "  decay " << format_double(b.point.decay);
  out << "  final_loss " << format_double(b.final_loss) << '\n';
  return kExitOk;
}

std::string rate_gnuplot(const RateFit& fit) {
  std::ostringstream os;
  os << "set datafile separator ','\n"
     << "set logscale xy\n"
     << "set xlabel 'T'\n"
     << "set ylabel 'weighted mean of ||grad F||^2'\n"
     << "set key top right\n"
     << "fit_line(x) = exp(" << format_double(fit.intercept) << ") * x**(" << format_double(fit.slope) << ")\n"
     << "ref(x) = " << format_double(fit.metrics.front()) << " * (x / " << format_double(fit.horizons.front())
     << ")**(-2.0/3.0)\n"
     << "plot 'rate.csv' using 1:2 skip 1 with linespoints title 'measured', \\\n"
     << "     fit_line(x) title 'fit, slope " << format_double(fit.slope) << "', \\\n"
     << "     ref(x) dashtype 2 title 'T^{-2/3}'\n";
  return os.str();
}

int cmd_rate(const ConfigOptions& options, std::vector<std::size_t> horizons, std::ostream& out,
             std::ostream& err) {
  auto [config, problem] = prepare(options);
  if (horizons.empty()) horizons = {8, 16, 32, 64, 128, 256};
  for (auto T : horizons) {
    if (T == 0) throw UsageError("--horizons values must be >= 1");
  }
  RateExperiment experiment;
  experiment.optimizer = optimizer_config(config);
  experiment.shuffling = parse_shuffling_kind(config.strategy);
  experiment.gamma = config.schedule.gamma;
  if (config.schedule.rr_scaling) experiment.gamma *= std::cbrt(static_cast<double>(problem->num_components()));
  experiment.seeds = seeds_of(config);
  experiment.w0 = initial_point_for(config, problem->dimension());
  experiment.options.step_scale = step_scale_of(config);
  const RateFit fit = fit_rate(*problem, experiment, horizons);

  std::ostringstream csv;
  csv << "T,weighted_grad_norm_sq\n";
  for (std::size_t k = 0; k < fit.horizons.size(); ++k) {
    csv << format_double(fit.horizons[k]) << ',' << format_double(fit.metrics[k]) << '\n';
  }
  const fs::path dir(config.out);
  write_text_file(dir / "rate.csv", csv.str());
  write_text_file(dir / "rate.gp", rate_gnuplot(fit));
  json doc = sidecar_base(config);
  doc["fit"] = to_json(fit);
  write_text_file(dir / "rate.json", doc.dump(2) + "\n");

  out << "slope " << format_double(fit.slope) << " (reference -2/3), intercept " << format_double(fit.intercept)
      << " over T = " << join_doubles(fit.horizons) << '\n';
  if (fit.low_confidence) err << "warning: low confidence, fewer than four horizons\n";
  return kExitOk;
}

std::map<std::string, double> parse_assignments(const std::vector<std::string>& items, const std::string& flag) {
  std::map<std::string, double> out;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError(flag + " expects name=value, got '" + item + "'");
    try {
      out[item.substr(0, eq)] = parse_double(item.substr(eq + 1));
    } catch (const std::exception&) {
      throw UsageError(flag + ": bad number in '" + item + "'");
    }
  }
  return out;
}

std::string compare_gnuplot(const CompareTable& table) {
  std::ostringstream os;
  os << "set datafile separator ','\n"
     << "set logscale y\n"
     << "set xlabel 'epoch'\n"
     << "set ylabel 'F(w)'\n"
     << "plot ";
  for (std::size_t m = 0; m < table.methods.size(); ++m) {
    os << (m ? ", \\\n     " : "") << "'compare.csv' using 1:" << 2 + 4 * m << " skip 1 with lines title '"
       << table.methods[m] << "'";
  }
  os << '\n';
  return os.str();
}

struct CompareOptions {
  std::vector<std::string> methods{"smg", "sgd", "sgdm", "adam"};
  std::vector<std::string> gammas, betas;
};

int cmd_compare(const ConfigOptions& options, const CompareOptions& c, std::ostream& out) {
  auto [config, problem] = prepare(options);
  const auto gammas = parse_assignments(c.gammas, "--method-gamma");
  const auto betas = parse_assignments(c.betas, "--method-beta");
  for (const auto& [name, v] : gammas) {
    if (std::find(c.methods.begin(), c.methods.end(), name) == c.methods.end()) {
      throw UsageError("--method-gamma names unknown method '" + name + "'");
    }
  }
  for (const auto& [name, v] : betas) {
    if (std::find(c.methods.begin(), c.methods.end(), name) == c.methods.end()) {
      throw UsageError("--method-beta names unknown method '" + name + "'");
    }
  }
  std::vector<MethodSpec> specs;
  for (const auto& name : c.methods) {
    MethodSpec spec;
    spec.name = name;
    try {
      spec.optimizer.algorithm = parse_algorithm(name);
    } catch (const InvalidArgument& e) {
      throw UsageError(e.what());
    }
    switch (spec.optimizer.algorithm) {
      case Algorithm::kSgd: spec.optimizer.beta = 0.0; break;
      case Algorithm::kSgdMomentum:
      case Algorithm::kAdam: spec.optimizer.beta = 0.9; break;
      default: spec.optimizer.beta = config.beta; break;
    }
    spec.optimizer.beta2 = config.beta2;
    spec.optimizer.epsilon = config.epsilon;
    spec.gamma = config.schedule.gamma;
    if (auto it = gammas.find(name); it != gammas.end()) spec.gamma = it->second;
    if (auto it = betas.find(name); it != betas.end()) spec.optimizer.beta = it->second;
    specs.push_back(spec);
  }
  const CompareTable table = compare_methods(config, *problem, specs);
  const fs::path dir(config.out);
  write_text_file(dir / "compare.csv", compare_csv(table));
  write_text_file(dir / "compare.gp", compare_gnuplot(table));
  json doc = sidecar_base(config);
  for (const auto& s : specs) {
    doc["methods"].push_back({{"name", s.name}, {"beta", s.optimizer.beta}, {"gamma", s.gamma}});
  }
  write_text_file(dir / "compare.json", doc.dump(2) + "\n");
  for (std::size_t m = 0; m < table.methods.size(); ++m) {
    out << table.methods[m] << ": final_loss " << format_double(table.loss_mean[m].back()) << " +- "
        << format_double(table.loss_std[m].back()) << '\n';
  }
  return kExitOk;
}

int cmd_audit(const ConfigOptions& options, int theorem_number, bool identities, std::ostream& out) {
  auto [config, problem] = prepare(options);
  if (theorem_number < 0 || theorem_number > 3) throw UsageError("--theorem must be 1, 2 or 3");
  const Theorem theorem = theorem_number == 0 ? default_theorem(config) : static_cast<Theorem>(theorem_number);
  const Schedule schedule = build_schedule(config, *problem);
  std::vector<RunRecord> records;
  for (auto seed : seeds_of(config)) records.push_back(run_one(config, *problem, schedule, seed));

  std::vector<BoundReport> reports;
  if (theorem == Theorem::kRandomReshuffling) {
    reports.push_back(audit_theorem2(records, schedule, problem->constants(), problem->num_components()));
  } else {
    for (const auto& r : records) reports.push_back(audit_single(config, r, schedule, *problem, theorem));
  }
  json doc = sidecar_base(config);
  doc["reports"] = json::array();
  for (const auto& r : reports) {
    doc["reports"].push_back(to_json(r));
    out << r.summary() << '\n';
  }
  int code = exit_code_for(reports);
  if (identities) {
    const auto ids = identity_suite(*problem, config.beta, config.T, strategy_for(config, config.seed),
                                    initial_point_for(config, problem->dimension()), config.schedule.gamma);
    doc["identities"] = to_json(ids);
    for (const auto& c : ids.checks) {
      out << (c.applicable ? (c.passed ? "PASS " : "FAIL ") : "N/A  ") << c.name << "  max deviation "
          << format_double(c.max_deviation) << (c.note.empty() ? "" : "  (" + c.note + ")") << '\n';
    }
    if (!ids.all_passed() && code == kExitOk) code = kExitViolated;
  }
  write_text_file(fs::path(config.out) / "audit.json", doc.dump(2) + "\n");
  return code;
}

int cmd_parse(const std::string& reference, std::ostream& out) {
  if (reference.empty()) throw UsageError("parse needs a dataset path or name");
  const std::string path = resolve_dataset(reference);
  const auto data = load_libsvm_file(path);
  out << to_json(describe_dataset(path, data)).dump(2) << '\n';
  return kExitOk;
}

}  // namespace

int run_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Shuffling momentum gradient experiments"};
  app.name("smg");
  app.require_subcommand(1);

  ConfigOptions run_opts, grid_opts, rate_opts, compare_opts, audit_opts;
  bool run_audit = false;
  GridOptions grid;
  std::vector<std::size_t> horizons;
  CompareOptions compare;
  int theorem = 0;
  bool identities = false;
  std::string dataset;

  auto* run = app.add_subcommand("run", "train one method and write per-seed traces");
  run_opts.attach(run);
  run->add_flag("--audit", run_audit, "check each run against its convergence bound");

  auto* grid_cmd = app.add_subcommand("grid", "learning-rate grid search");
  grid_opts.attach(grid_cmd);
  grid_cmd->add_flag("--paper-grids", grid.published, "two-stage coarse then fine grid for the method and schedule");
  grid_cmd->add_option("--grid-lr", grid.lr, "initial rates")->delimiter(',');
  grid_cmd->add_option("--grid-beta", grid.beta, "momentum weights")->delimiter(',');
  grid_cmd->add_option("--grid-lambda", grid.lambda, "diminishing offsets")->delimiter(',');
  grid_cmd->add_option("--grid-decay", grid.decay, "exponential per-epoch factors")->delimiter(',');

  auto* rate = app.add_subcommand("rate", "fit the log-log slope of the gradient norm against T");
  rate_opts.attach(rate);
  rate->add_option("--horizons", horizons, "epoch counts, e.g. 8,16,32,64")->delimiter(',');

  auto* cmp = app.add_subcommand("compare", "run several methods on shared permutations");
  compare_opts.attach(cmp);
  cmp->add_option("--methods", compare.methods, "comma separated methods")->delimiter(',');
  cmp->add_option("--method-gamma", compare.gammas, "per-method gamma, name=value")->delimiter(',');
  cmp->add_option("--method-beta", compare.betas, "per-method beta, name=value")->delimiter(',');

  auto* audit = app.add_subcommand("audit", "evaluate the convergence bounds on completed runs");
  audit_opts.attach(audit);
  audit->add_option("--theorem", theorem, "1 general, 2 reshuffling, 3 single shuffle; default picks by method");
  audit->add_flag("--identities", identities, "also check the algebraic identities");

  auto* parse = app.add_subcommand("parse", "describe a LIBSVM dataset");
  parse->add_option("dataset", dataset, "path or name under $SMG_DATA_DIR")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (run->parsed()) return cmd_run(run_opts, run_audit, out);
    if (grid_cmd->parsed()) return cmd_grid(grid_opts, grid, out, err);
    if (rate->parsed()) return cmd_rate(rate_opts, horizons, out, err);
    if (cmp->parsed()) return cmd_compare(compare_opts, compare, out);
    if (audit->parsed()) return cmd_audit(audit_opts, theorem, identities, out);
    if (parse->parsed()) return cmd_parse(dataset, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const AuditRefused& e) {
    err << "audit refused: " << e.what() << '\n';
    return kExitRefused;
  } catch (const RunAborted& e) {
    err << "run aborted at epoch " << e.epoch() << ": " << e.what() << '\n';
    return kExitRuntime;
  } catch (const ParseError& e) {
    err << "parse error at line " << e.line() << ": " << e.what() << '\n';
    return kExitRuntime;
  } catch (const IoError& e) {
    err << "i/o error (" << e.path() << "): " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace smg::cli
