#include "dro/problem.hpp"

namespace dro {

namespace {

// Arguments of the conjugate beyond this are treated as outside the domain
// (the KL conjugate overflows there anyway).
constexpr double kExpCap = 700.0;
constexpr double kWallMargin = 1e-9;

double wall_threshold(const DivergenceFamily& f) {
  return std::min(f.phi_star_domain_sup, kExpCap) - kWallMargin;
}

}  // namespace

RobustProblem RobustProblem::build(Scenario scenario, Dataset data,
                                   LossModel loss,
                                   std::optional<DivergenceFamily> family,
                                   double eps, std::optional<double> lambda0) {
  RobustProblem p;
  p.scenario_ = scenario;
  p.data_ = std::move(data);
  p.loss_ = loss;
  p.family_ = std::move(family);
  p.eps_ = eps;
  p.lambda0_ = lambda0;

  const Eigen::Index N = p.data_.size();
  switch (scenario) {
    case Scenario::div_penalty:
      if (!p.family_)
        throw std::invalid_argument("div_penalty requires a divergence family");
      if (!lambda0 || !(*lambda0 > 0.0))
        throw std::invalid_argument("div_penalty requires lambda0 > 0");
      p.K_ = N;
      break;
    case Scenario::div_ball:
      if (!p.family_)
        throw std::invalid_argument("div_ball requires a divergence family");
      if (!(eps > 0.0))
        throw std::invalid_argument("div_ball requires eps > 0");
      p.K_ = N;
      break;
    case Scenario::wasserstein_ball:
      if (!(eps >= 0.0))
        throw std::invalid_argument("wasserstein requires eps >= 0");
      p.K_ = N * N;
      p.dist_.resize(N, N);
      for (Eigen::Index i = 0; i < N; ++i) {
        p.dist_(i, i) = 0.0;
        for (Eigen::Index j = 0; j < i; ++j) {
          double dx =
              (p.data_.features.row(i) - p.data_.features.row(j)).norm();
          double dy = p.data_.labels[i] - p.data_.labels[j];
          double d = std::sqrt(dx * dx + dy * dy);
          p.dist_(i, j) = d;
          p.dist_(j, i) = d;
        }
      }
      break;
  }

  // c = (0, eps, 1, p); the eps-slot is zeroed when lambda is pinned
  // (div_penalty) and the mu-slot is zeroed when mu is pinned (wasserstein).
  const Eigen::Index n = p.theta_dim();
  p.cost_ = Eigen::VectorXd::Zero(n + 2 + N);
  p.cost_[n] = scenario == Scenario::div_penalty ? 0.0 : eps;
  p.cost_[n + 1] = scenario == Scenario::wasserstein_ball ? 0.0 : 1.0;
  p.cost_.tail(N).setConstant(1.0 / static_cast<double>(N));
  return p;
}

Eigen::VectorXd RobustProblem::all_losses(const DecisionPoint& u) const {
  const Eigen::Index N = n_obs();
  Eigen::VectorXd losses(N);
  Eigen::VectorXd theta = u.theta();
  for (Eigen::Index i = 0; i < N; ++i)
    losses[i] = loss_value_xy(loss_, theta, data_.features.row(i).transpose(),
                              data_.labels[i]);
  return losses;
}

double RobustProblem::constraint_value_cached(
    Eigen::Index k, const DecisionPoint& u,
    const Eigen::VectorXd& losses) const {
  switch (scenario_) {
    case Scenario::div_penalty:
      return phi_conjugate(*family_, losses[k] / *lambda0_ - u.mu()) - u.s()[k];
    case Scenario::div_ball:
      return perspective_conjugate(*family_, std::max(u.lambda(), 0.0),
                                   losses[k] - u.mu()) -
             u.s()[k];
    case Scenario::wasserstein_ball: {
      auto [i, j] = index_pair(k);
      return losses[i] - u.lambda() * dist_(i, j) - u.s()[j];
    }
  }
  throw std::logic_error("unreachable");
}

double RobustProblem::constraint_value(Eigen::Index k,
                                       const DecisionPoint& u) const {
  Eigen::Index obs = scenario_ == Scenario::wasserstein_ball ? k / n_obs() : k;
  Eigen::VectorXd theta = u.theta();
  double l = loss_value_xy(loss_, theta, data_.features.row(obs).transpose(),
                           data_.labels[obs]);
  switch (scenario_) {
    case Scenario::div_penalty:
      return phi_conjugate(*family_, l / *lambda0_ - u.mu()) - u.s()[k];
    case Scenario::div_ball:
      return perspective_conjugate(*family_, std::max(u.lambda(), 0.0),
                                   l - u.mu()) -
             u.s()[k];
    case Scenario::wasserstein_ball: {
      auto [i, j] = index_pair(k);
      return l - u.lambda() * dist_(i, j) - u.s()[j];
    }
  }
  throw std::logic_error("unreachable");
}

Eigen::VectorXd RobustProblem::constraint_subgrad(Eigen::Index k,
                                                  const DecisionPoint& u) const {
  const Eigen::Index n = theta_dim();
  const Eigen::Index N = n_obs();
  Eigen::VectorXd g = Eigen::VectorXd::Zero(n + 2 + N);
  Eigen::VectorXd theta = u.theta();

  switch (scenario_) {
    case Scenario::div_penalty: {
      double l = loss_value_xy(loss_, theta, data_.features.row(k).transpose(),
                               data_.labels[k]);
      double t = l / *lambda0_ - u.mu();
      if (std::isinf(phi_conjugate(*family_, t)))
        throw std::domain_error("constraint_subgrad: f_k is +inf at u");
      double d = phi_conjugate_subgrad(*family_, t);
      if (d != 0.0)
        g.head(n) = (d / *lambda0_) *
                    loss_subgrad_xy(loss_, theta,
                                    data_.features.row(k).transpose(),
                                    data_.labels[k]);
      g[n + 1] = -d;
      g[n + 2 + k] = -1.0;
      return g;
    }
    case Scenario::div_ball: {
      double l = loss_value_xy(loss_, theta, data_.features.row(k).transpose(),
                               data_.labels[k]);
      // lambda = 0 sits on the boundary of the perspective's domain; evaluate
      // the chain factors just inside.
      double lambda = std::max(u.lambda(), 1e-12);
      double t = (l - u.mu()) / lambda;
      double star = phi_conjugate(*family_, t);
      if (std::isinf(star))
        throw std::domain_error("constraint_subgrad: f_k is +inf at u");
      double d = phi_conjugate_subgrad(*family_, t);
      if (d != 0.0)
        g.head(n) = d * loss_subgrad_xy(loss_, theta,
                                        data_.features.row(k).transpose(),
                                        data_.labels[k]);
      g[n] = star - t * d;
      g[n + 1] = -d;
      g[n + 2 + k] = -1.0;
      return g;
    }
    case Scenario::wasserstein_ball: {
      auto [i, j] = index_pair(k);
      g.head(n) = loss_subgrad_xy(loss_, theta,
                                  data_.features.row(i).transpose(),
                                  data_.labels[i]);
      g[n] = -dist_(i, j);
      g[n + 2 + j] = -1.0;
      return g;
    }
  }
  throw std::logic_error("unreachable");
}

double RobustProblem::max_violation(const DecisionPoint& u) const {
  Eigen::VectorXd losses = all_losses(u);
  double worst = -kInf;
  for (Eigen::Index k = 0; k < K_; ++k)
    worst = std::max(worst, constraint_value_cached(k, u, losses));
  return worst;
}

double RobustProblem::domain_wall_value(Eigen::Index k, const DecisionPoint& u,
                                        const Eigen::VectorXd& losses) const {
  double w = wall_threshold(*family_);
  if (scenario_ == Scenario::div_penalty)
    return losses[k] / *lambda0_ - u.mu() - w;
  // div_ball: (l - mu) <= w * lambda, valid at lambda = 0 as well
  return losses[k] - u.mu() - w * std::max(u.lambda(), 0.0);
}

Eigen::VectorXd RobustProblem::domain_wall_subgrad(Eigen::Index k,
                                                   const DecisionPoint& u) const {
  const Eigen::Index n = theta_dim();
  Eigen::VectorXd g = Eigen::VectorXd::Zero(n + 2 + n_obs());
  Eigen::VectorXd theta = u.theta();
  Eigen::VectorXd lg = loss_subgrad_xy(loss_, theta,
                                       data_.features.row(k).transpose(),
                                       data_.labels[k]);
  if (scenario_ == Scenario::div_penalty) {
    g.head(n) = lg / *lambda0_;
  } else {
    g.head(n) = lg;
    g[n] = -wall_threshold(*family_);
  }
  g[n + 1] = -1.0;
  return g;
}

}  // namespace dro
