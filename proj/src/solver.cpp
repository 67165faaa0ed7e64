#include "dro/solver.hpp"

#include <chrono>
#include <ostream>

namespace dro {

void SolveTrace::write_csv(std::ostream& out) const {
  out << "n,objective,step_norm,proj_iters,seconds\n";
  for (const auto& r : records)
    out << r.n << ',' << r.objective << ',' << r.step_norm << ','
        << r.projection_iterations << ',' << r.seconds << '\n';
}

namespace {

DecisionPoint default_start(const RobustProblem& problem) {
  DecisionPoint u = problem.make_point();
  u.lambda() = problem.fixed_lambda().value_or(1.0);
  u.mu() = 0.0;
  Eigen::VectorXd losses = problem.all_losses(u);  // theta = 0
  if (problem.scenario() == Scenario::wasserstein_ball)
    u.s().setConstant(losses.maxCoeff() + 1.0);
  else
    u.s() = losses.array() + 1.0;
  return u;
}

}  // namespace

SolveResult solve(const RobustProblem& problem, const SolverConfig& config,
                  const DecisionPoint* warm_start) {
  if (!(config.a > 2.0))
    throw std::invalid_argument("solver: momentum parameter a must be > 2");
  const Eigen::VectorXd& c = problem.cost();
  double gamma = config.gamma > 0.0 ? config.gamma : 1.0 / c.norm();

  DecisionPoint u = warm_start ? *warm_start : default_start(problem);
  u = project_C0(std::move(u));
  Eigen::VectorXd u_prev = u.v;

  SolveResult result;
  auto t0 = std::chrono::steady_clock::now();
  for (int n = 1; n <= config.max_outer; ++n) {
    double coef = momentum_coefficient(n, config.a);
    DecisionPoint v = u;
    v.v = u.v + coef * (u.v - u_prev) - gamma * c;

    int proj_iters = 0;
    DecisionPoint u_next;
    try {
      u_next = project_onto_C(problem, project_C0(std::move(v)),
                              config.strategy, config.projection, nullptr,
                              &proj_iters);
    } catch (const ProjectionFailure& fail) {
      throw SolveFailure(fail.what(), u, std::move(result.trace));
    }

    double step = (u_next.v - u.v).norm();
    double secs = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    result.trace.records.push_back(
        {n, c.dot(u_next.v), step, proj_iters, secs});

    u_prev = u.v;
    u = std::move(u_next);
    if (step <= config.outer_tol) {
      result.trace.converged = true;
      break;
    }
  }
  result.point = std::move(u);
  return result;
}

Eigen::VectorXd fit_erm(const Dataset& data, const LossModel& loss,
                        double grad_tol, int max_iter) {
  const Eigen::Index n = data.feature_dim();
  const Eigen::Index N = data.size();
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(n);

  auto objective = [&](const Eigen::VectorXd& th) {
    double v = 0.0;
    for (Eigen::Index i = 0; i < N; ++i)
      v += loss_value_xy(loss, th, data.features.row(i).transpose(),
                         data.labels[i]);
    return v / static_cast<double>(N);
  };
  auto gradient = [&](const Eigen::VectorXd& th) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < N; ++i)
      g += loss_subgrad_xy(loss, th, data.features.row(i).transpose(),
                           data.labels[i]);
    return (g / static_cast<double>(N)).eval();
  };

  double step = 1.0;
  double f = objective(theta);
  for (int it = 0; it < max_iter; ++it) {
    Eigen::VectorXd g = gradient(theta);
    double gn2 = g.squaredNorm();
    if (std::sqrt(gn2) <= grad_tol) break;
    // backtracking Armijo line search, with step growth on acceptance
    double t = step;
    while (t > 1e-18) {
      Eigen::VectorXd cand = theta - t * g;
      if (objective(cand) <= f - 0.5 * t * gn2) break;
      t *= 0.5;
    }
    theta -= t * g;
    f = objective(theta);
    step = std::min(t * 2.0, 1e6);
  }
  return theta;
}

Eigen::VectorXd margins(const Dataset& data, const Eigen::VectorXd& theta) {
  return data.features * theta;
}

}  // namespace dro
