// dro-cli: train robust classifiers, sweep radii, replicate studies, and
// inspect risk evaluators.  Outputs are CSV/JSON; every file written is
// accompanied by a manifest naming the exact configuration that produced it.

#include <chrono>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "dro/solver.hpp"

using json = nlohmann::ordered_json;
using namespace dro;

namespace {

struct ProblemFlags {
  std::string data_path;
  std::string scenario = "div_ball";
  std::string divergence = "kl";
  std::optional<double> div_param;
  double eps = 0.01;
  double lambda0 = 1.0;
  std::string loss = "logistic";
  double ridge_weight = 0.0;
  double train_fraction = 0.6;
  std::uint64_t seed = 0;
  Eigen::Index block_size = 0;  // 0 = module default
  int jobs = 1;
  // solver knobs; 0 means the library default
  double gamma = 0.0;
  double momentum_a = 3.0;
  double outer_tol = 1e-5;
  int max_outer = 5000;
  double proj_tol = 1e-8;
  int proj_max_iter = 100000;
};

void add_problem_flags(CLI::App* cmd, ProblemFlags& f) {
  cmd->add_option("--data", f.data_path, "dataset file (LIBSVM text)")
      ->required();
  cmd->add_option("--scenario", f.scenario,
                  "div_penalty | div_ball | wasserstein")
      ->check(CLI::IsMember({"div_penalty", "div_ball", "wasserstein"}));
  cmd->add_option("--div", f.divergence, "divergence family name");
  cmd->add_option("--div-param", f.div_param,
                  "family shape parameter (theta or beta)");
  cmd->add_option("--eps", f.eps, "ambiguity radius");
  cmd->add_option("--lambda0", f.lambda0, "penalty weight (div_penalty)");
  cmd->add_option("--loss", f.loss, "logistic | ridge")
      ->check(CLI::IsMember({"logistic", "ridge"}));
  cmd->add_option("--ridge-weight", f.ridge_weight, "ridge regularizer");
  cmd->add_option("--train-fraction", f.train_fraction,
                  "train split fraction in (0,1)");
  cmd->add_option("--seed", f.seed, "split seed");
  cmd->add_option("--block-size", f.block_size,
                  "projection block size (0 = default)");
  cmd->add_option("--jobs", f.jobs, "worker threads for sweeps/replicates")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--gamma", f.gamma, "gradient step (0 = 1/||c||)");
  cmd->add_option("--momentum-a", f.momentum_a, "momentum parameter, > 2");
  cmd->add_option("--outer-tol", f.outer_tol, "outer stop tolerance");
  cmd->add_option("--max-outer", f.max_outer, "outer iteration cap");
  cmd->add_option("--proj-tol", f.proj_tol, "projection feasibility tolerance");
  cmd->add_option("--proj-max-iter", f.proj_max_iter,
                  "projection iteration cap");
}

std::string resolve_data_path(const std::string& path) {
  if (std::ifstream(path).good()) return path;
  if (const char* dir = std::getenv("DRO_DATA_DIR")) {
    std::string joined = std::string(dir) + "/" + path;
    if (std::ifstream(joined).good()) return joined;
  }
  throw CLI::ValidationError("--data", "cannot open dataset '" + path + "'");
}

Scenario parse_scenario(const std::string& name) {
  if (name == "div_penalty") return Scenario::div_penalty;
  if (name == "div_ball") return Scenario::div_ball;
  return Scenario::wasserstein_ball;
}

LossModel parse_loss(const ProblemFlags& f) {
  if (f.loss == "ridge") return {LossKind::ridge_ls, f.ridge_weight};
  return {LossKind::logistic, 0.0};
}

RobustProblem build_problem(const ProblemFlags& f, const Dataset& data,
                            double eps) {
  Scenario scen = parse_scenario(f.scenario);
  std::optional<DivergenceFamily> family;
  if (scen != Scenario::wasserstein_ball)
    family = family_from_name(f.divergence, f.div_param);
  std::optional<double> lambda0;
  if (scen == Scenario::div_penalty) lambda0 = f.lambda0;
  return RobustProblem::build(scen, data, parse_loss(f), std::move(family),
                              eps, lambda0);
}

SolverConfig solver_config(const ProblemFlags& f, Eigen::Index K) {
  SolverConfig config;
  config.gamma = f.gamma;
  config.a = f.momentum_a;
  config.outer_tol = f.outer_tol;
  config.max_outer = f.max_outer;
  config.projection.tol = f.proj_tol;
  config.projection.max_iter = f.proj_max_iter;
  Eigen::Index block = f.block_size;
  if (block == 0 && f.scenario == "wasserstein")
    block = std::min<Eigen::Index>(K, 1500);
  if (block > 0 && block < K)
    config.strategy = BlockStrategy::random_subset_of(block, f.seed);
  return config;
}

json manifest_base(const std::string& command, const ProblemFlags& f) {
  json m;
  m["command"] = command;
  m["data"] = f.data_path;
  m["scenario"] = f.scenario;
  if (f.scenario != "wasserstein") {
    m["divergence"] = f.divergence;
    if (f.div_param) m["div_param"] = *f.div_param;
  }
  if (f.scenario == "div_penalty")
    m["lambda0"] = f.lambda0;
  else
    m["eps"] = f.eps;
  m["loss"] = f.loss;
  if (f.loss == "ridge") m["ridge_weight"] = f.ridge_weight;
  m["train_fraction"] = f.train_fraction;
  m["seed"] = f.seed;
  m["solver"] = {{"gamma", f.gamma},
                 {"momentum_a", f.momentum_a},
                 {"outer_tol", f.outer_tol},
                 {"max_outer", f.max_outer},
                 {"proj_tol", f.proj_tol},
                 {"proj_max_iter", f.proj_max_iter},
                 {"block_size", f.block_size}};
  m["jobs"] = f.jobs;
  return m;
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << contents;
}

void write_manifest(const std::string& out_prefix, json manifest,
                    const std::vector<std::string>& outputs,
                    double wall_seconds) {
  manifest["outputs"] = outputs;
  manifest["wall_seconds"] = wall_seconds;
  write_file(out_prefix + ".manifest.json", manifest.dump(2) + "\n");
}

struct FitOutcome {
  Eigen::VectorXd theta;
  double objective = 0.0;
  bool converged = false;
  bool failed = false;  // projection non-convergence; theta is best effort
  SolveTrace trace;
};

// `value` is the swept parameter: the radius for the ball scenarios, the
// penalty weight lambda0 for div_penalty.  value = 0 means "no ambiguity"
// and falls back to plain ERM, except for wasserstein where the zero-radius
// ball is solved for real (it reduces to ERM by construction).
FitOutcome fit(ProblemFlags f, const Dataset& train, double value) {
  FitOutcome out;
  if (value == 0.0 && f.scenario != "wasserstein") {
    out.theta = fit_erm(train, parse_loss(f));
    out.converged = true;
    return out;
  }
  double eps = f.eps;
  if (f.scenario == "div_penalty")
    f.lambda0 = value;
  else
    eps = value;
  RobustProblem problem = build_problem(f, train, eps);
  SolverConfig config = solver_config(f, problem.num_constraints());
  try {
    auto result = solve(problem, config);
    out.theta = extract_estimator(result.point);
    out.objective = problem.cost().dot(result.point.v);
    out.converged = result.trace.converged;
    out.trace = std::move(result.trace);
  } catch (const SolveFailure& fail) {
    out.theta = extract_estimator(fail.best);
    out.objective = problem.cost().dot(fail.best.v);
    out.failed = true;
    out.trace = fail.partial_trace;
  }
  return out;
}

double auc_of(const Dataset& data, const Eigen::VectorXd& theta) {
  return roc_auc(margins(data, theta), data.labels);
}

// order-stable worker pool: task i writes slot i
void run_parallel(int jobs, int n_tasks, const std::function<void(int)>& task) {
  if (jobs <= 1 || n_tasks <= 1) {
    for (int i = 0; i < n_tasks; ++i) task(i);
    return;
  }
  std::mutex mu;
  int next = 0;
  auto worker = [&] {
    for (;;) {
      int i;
      {
        std::lock_guard<std::mutex> lock(mu);
        if (next == n_tasks) return;
        i = next++;
      }
      task(i);
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < std::min(jobs, n_tasks); ++t)
    pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

int cmd_train(const ProblemFlags& f, const std::string& out_prefix) {
  auto t0 = std::chrono::steady_clock::now();
  Dataset data = load_libsvm_file(resolve_data_path(f.data_path));
  auto [train, test] = split(data, {f.train_fraction, f.seed});

  FitOutcome outcome =
      fit(f, train, f.scenario == "div_penalty" ? f.lambda0 : f.eps);

  json model;
  model["theta"] = std::vector<double>(
      outcome.theta.data(), outcome.theta.data() + outcome.theta.size());
  model["objective"] = outcome.objective;
  model["converged"] = outcome.converged;
  model["auc_train"] = auc_of(train, outcome.theta);
  model["auc_test"] = auc_of(test, outcome.theta);
  write_file(out_prefix + ".model.json", model.dump(2) + "\n");

  std::ostringstream trace_csv;
  outcome.trace.write_csv(trace_csv);
  write_file(out_prefix + ".trace.csv", trace_csv.str());

  double secs = std::chrono::duration<double>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
  write_manifest(out_prefix, manifest_base("train", f),
                 {out_prefix + ".model.json", out_prefix + ".trace.csv"},
                 secs);

  if (outcome.failed) {
    std::cerr << "train: projection did not converge; model is best-effort\n";
    return 2;
  }
  if (!outcome.converged)
    std::cerr << "train: outer iteration cap reached before the stop "
                 "tolerance\n";
  return outcome.converged ? 0 : 1;
}

int cmd_score(const ProblemFlags& f, const std::string& model_path) {
  Dataset data = load_libsvm_file(resolve_data_path(f.data_path));
  auto [train, test] = split(data, {f.train_fraction, f.seed});
  std::ifstream in(model_path);
  if (!in) throw std::runtime_error("cannot read '" + model_path + "'");
  json model = json::parse(in);
  std::vector<double> coef = model.at("theta").get<std::vector<double>>();
  Eigen::VectorXd theta =
      Eigen::Map<Eigen::VectorXd>(coef.data(), Eigen::Index(coef.size()));

  json out;
  out["auc_train"] = auc_of(train, theta);
  out["auc_test"] = auc_of(test, theta);
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_sweep(const ProblemFlags& f, std::vector<double> eps_grid,
              std::vector<std::uint64_t> seeds,
              const std::string& out_prefix) {
  auto t0 = std::chrono::steady_clock::now();
  if (eps_grid.empty())
    throw CLI::ValidationError("--eps-grid", "at least one radius required");
  if (seeds.empty()) seeds = {f.seed};
  Dataset data = load_libsvm_file(resolve_data_path(f.data_path));

  struct Row {
    double eps;
    std::uint64_t seed;
    double auc_train, auc_test;
    bool ok;
  };
  std::vector<Row> rows(eps_grid.size() * seeds.size());

  // one task per seed so the eps sweep can warm-start sequentially
  run_parallel(f.jobs, int(seeds.size()), [&](int si) {
    std::uint64_t seed = seeds[size_t(si)];
    ProblemFlags fs = f;
    fs.seed = seed;
    auto [train, test] = split(data, {f.train_fraction, seed});
    for (std::size_t ei = 0; ei < eps_grid.size(); ++ei) {
      Row& row = rows[ei * seeds.size() + size_t(si)];
      row.eps = eps_grid[ei];
      row.seed = seed;
      try {
        FitOutcome outcome = fit(fs, train, eps_grid[ei]);
        row.auc_train = auc_of(train, outcome.theta);
        row.auc_test = auc_of(test, outcome.theta);
        row.ok = !outcome.failed;
      } catch (const std::exception& e) {
        row.auc_train = row.auc_test = std::nan("");
        row.ok = false;
      }
    }
  });

  std::ostringstream csv;
  csv << "eps,seed,auc_train,auc_test,ok\n";
  csv.precision(10);
  for (const Row& r : rows)
    csv << r.eps << ',' << r.seed << ',' << r.auc_train << ',' << r.auc_test
        << ',' << (r.ok ? 1 : 0) << '\n';
  write_file(out_prefix + ".sweep.csv", csv.str());

  json m = manifest_base("sweep", f);
  m["eps_grid"] = eps_grid;
  m["seeds"] = seeds;
  double secs = std::chrono::duration<double>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
  write_manifest(out_prefix, std::move(m), {out_prefix + ".sweep.csv"}, secs);
  return 0;
}

int cmd_histogram(const ProblemFlags& f, int replicates,
                  const std::string& out_prefix) {
  auto t0 = std::chrono::steady_clock::now();
  if (replicates < 1)
    throw CLI::ValidationError("--replicates", "must be >= 1");
  Dataset data = load_libsvm_file(resolve_data_path(f.data_path));

  std::vector<double> auc_lr(static_cast<std::size_t>(replicates), 0.0);
  std::vector<double> auc_robust(static_cast<std::size_t>(replicates), 0.0);
  run_parallel(f.jobs, replicates, [&](int r) {
    std::uint64_t seed = f.seed + std::uint64_t(r);
    auto [train, test] = split(data, {f.train_fraction, seed});
    Eigen::VectorXd lr = fit_erm(train, parse_loss(f));
    auc_lr[size_t(r)] = auc_of(test, lr);
    ProblemFlags fr = f;
    fr.seed = seed;
    FitOutcome outcome = fit(fr, train, f.eps);
    auc_robust[size_t(r)] = auc_of(test, outcome.theta);
  });

  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / double(v.size());
  };
  auto variance = [&](const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    double m = mean(v), s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / double(v.size() - 1);
  };

  std::ostringstream csv;
  csv << "replicate,auc_lr,auc_robust\n";
  csv.precision(10);
  for (int r = 0; r < replicates; ++r)
    csv << r << ',' << auc_lr[size_t(r)] << ',' << auc_robust[size_t(r)]
        << '\n';
  csv << "mean," << mean(auc_lr) << ',' << mean(auc_robust) << '\n';
  csv << "variance," << variance(auc_lr) << ',' << variance(auc_robust)
      << '\n';
  write_file(out_prefix + ".histogram.csv", csv.str());

  json m = manifest_base("histogram", f);
  m["replicates"] = replicates;
  double secs = std::chrono::duration<double>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
  write_manifest(out_prefix, std::move(m), {out_prefix + ".histogram.csv"},
                 secs);
  return 0;
}

int cmd_risk(const std::vector<double>& losses_in,
             const std::vector<double>& weights_in, const std::string& measure,
             const std::string& div_name, std::optional<double> div_param,
             double eps, double lambda0, bool bruteforce, double grid_step) {
  Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(
      losses_in.data(), Eigen::Index(losses_in.size()));
  SimplexWeights p =
      weights_in.empty()
          ? SimplexWeights::uniform(x.size())
          : SimplexWeights(Eigen::Map<const Eigen::VectorXd>(
                weights_in.data(), Eigen::Index(weights_in.size())));
  if (p.size() != x.size())
    throw CLI::ValidationError("--weights", "size mismatch with --losses");

  DivergenceFamily family = family_from_name(div_name, div_param);
  json out;
  out["losses"] = losses_in;
  out["measure"] = measure;
  out["divergence"] = div_name;

  double closed;
  std::function<double(const Vector&)> alpha;
  if (measure == "ball") {
    out["eps"] = eps;
    closed = risk_divergence_ball(x, p, family, eps);
    alpha = divergence_ball_indicator(family, p, eps);
  } else {
    out["lambda0"] = lambda0;
    closed = risk_divergence_penalty(x, p, family, lambda0);
    alpha = divergence_penalty_alpha(family, p, lambda0);
  }
  out["closed_form"] = closed;

  if (bruteforce) {
    if (x.size() > 5)
      throw CLI::ValidationError("--bruteforce",
                                 "supported for N <= 5 losses only");
    double brute = risk_bruteforce(x, p, alpha, grid_step);
    out["bruteforce"] = brute;
    out["gap"] = std::abs(closed - brute);
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"distributionally robust risk minimization"};
  app.require_subcommand(1);

  ProblemFlags train_flags;
  std::string train_out = "run";
  auto* train = app.add_subcommand("train", "fit one robust model");
  add_problem_flags(train, train_flags);
  train->add_option("--out", train_out, "output path prefix");

  ProblemFlags score_flags;
  std::string score_model;
  auto* score = app.add_subcommand("score", "AUC of a saved model");
  add_problem_flags(score, score_flags);
  score->add_option("--model", score_model, "model JSON from train")
      ->required();

  ProblemFlags sweep_flags;
  std::vector<double> eps_grid;
  std::vector<std::uint64_t> sweep_seeds;
  std::string sweep_out = "run";
  auto* sweep = app.add_subcommand("sweep", "AUC across a radius grid");
  add_problem_flags(sweep, sweep_flags);
  sweep->add_option("--eps-grid", eps_grid, "radii; 0 rows fall back to ERM")
      ->required()
      ->delimiter(',');
  sweep->add_option("--seeds", sweep_seeds, "split seeds (default --seed)")->delimiter(',');
  sweep->add_option("--out", sweep_out, "output path prefix");

  ProblemFlags hist_flags;
  int replicates = 1;
  std::string hist_out = "run";
  auto* hist =
      app.add_subcommand("histogram", "replicated split AUC comparison");
  add_problem_flags(hist, hist_flags);
  hist->add_option("--replicates", replicates, "number of fresh splits");
  hist->add_option("--out", hist_out, "output path prefix");

  std::vector<double> risk_losses, risk_weights;
  std::string risk_measure = "ball", risk_div = "kl";
  std::optional<double> risk_div_param;
  double risk_eps = 0.1, risk_lambda0 = 1.0, grid_step = 1e-3;
  bool bruteforce = false;
  auto* risk = app.add_subcommand("risk", "evaluate a risk measure");
  risk->add_option("--losses", risk_losses, "loss vector")->required()->delimiter(',');
  risk->add_option("--weights", risk_weights, "reference weights (uniform)")->delimiter(',');
  risk->add_option("--measure", risk_measure, "ball | penalty")
      ->check(CLI::IsMember({"ball", "penalty"}));
  risk->add_option("--div", risk_div, "divergence family name");
  risk->add_option("--div-param", risk_div_param, "family shape parameter");
  risk->add_option("--eps", risk_eps, "ball radius");
  risk->add_option("--lambda0", risk_lambda0, "penalty weight");
  risk->add_flag("--bruteforce", bruteforce, "cross-check on a simplex grid");
  risk->add_option("--grid-step", grid_step, "brute-force mesh");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) return cmd_train(train_flags, train_out);
    if (score->parsed()) return cmd_score(score_flags, score_model);
    if (sweep->parsed())
      return cmd_sweep(sweep_flags, eps_grid, sweep_seeds, sweep_out);
    if (hist->parsed()) return cmd_histogram(hist_flags, replicates, hist_out);
    if (risk->parsed())
      return cmd_risk(risk_losses, risk_weights, risk_measure, risk_div,
                      risk_div_param, risk_eps, risk_lambda0, bruteforce,
                      grid_step);
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
