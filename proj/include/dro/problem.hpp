#ifndef DRO_PROBLEM_HPP
#define DRO_PROBLEM_HPP

#include <Eigen/Dense>
#include <optional>

#include "dro/dataset.hpp"
#include "dro/divergence.hpp"
#include "dro/loss.hpp"
#include "dro/risk.hpp"

namespace dro {

/// Solver variable u = (theta, lambda, mu, s) stored flat in
/// R^n x R x R x R^N.
struct DecisionPoint {
  Eigen::VectorXd v;
  Eigen::Index n = 0;  // theta dimension

  DecisionPoint() = default;
  DecisionPoint(Eigen::Index theta_dim, Eigen::Index n_obs)
      : v(Eigen::VectorXd::Zero(theta_dim + 2 + n_obs)), n(theta_dim) {}

  Eigen::Index n_obs() const { return v.size() - n - 2; }

  auto theta() { return v.head(n); }
  auto theta() const { return v.head(n); }
  double& lambda() { return v[n]; }
  double lambda() const { return v[n]; }
  double& mu() { return v[n + 1]; }
  double mu() const { return v[n + 1]; }
  auto s() { return v.tail(v.size() - n - 2); }
  auto s() const { return v.tail(v.size() - n - 2); }
};

enum class Scenario { div_penalty, div_ball, wasserstein_ball };

/// The unified constrained formulation: minimize <c, u> over the base cone
/// {lambda >= 0} intersected with the 0-sublevel sets of K convex
/// constraints.
class RobustProblem {
 public:
  static RobustProblem build(Scenario scenario, Dataset data, LossModel loss,
                             std::optional<DivergenceFamily> family,
                             double eps,
                             std::optional<double> lambda0 = std::nullopt);

  Scenario scenario() const { return scenario_; }
  Eigen::Index num_constraints() const { return K_; }
  Eigen::Index n_obs() const { return data_.size(); }
  Eigen::Index theta_dim() const { return data_.feature_dim(); }
  const Dataset& data() const { return data_; }
  const LossModel& loss() const { return loss_; }
  const DivergenceFamily& family() const { return *family_; }
  double eps() const { return eps_; }
  std::optional<double> fixed_lambda() const { return lambda0_; }
  const Eigen::MatrixXd& pairwise_dist() const { return dist_; }

  /// Cost vector c, DecisionPoint-shaped.
  const Eigen::VectorXd& cost() const { return cost_; }

  DecisionPoint make_point() const {
    return DecisionPoint(theta_dim(), n_obs());
  }

  /// f_k(u); +inf where the conjugate is +inf.  k is 0-based.
  double constraint_value(Eigen::Index k, const DecisionPoint& u) const;

  /// One subgradient of f_k at u (f_k must be finite there).
  Eigen::VectorXd constraint_subgrad(Eigen::Index k,
                                     const DecisionPoint& u) const;

  /// All per-observation losses l(theta, z_i); shared across constraints.
  Eigen::VectorXd all_losses(const DecisionPoint& u) const;

  /// max_k f_k(u), computed with a single loss pass.
  double max_violation(const DecisionPoint& u) const;

  /// f_k given precomputed losses.
  double constraint_value_cached(Eigen::Index k, const DecisionPoint& u,
                                 const Eigen::VectorXd& losses) const;

  /// Surrogate constraint used when f_k = +inf (argument beyond the conjugate
  /// domain): signed distance-like function to the domain wall
  /// (l - mu)/lambda <= domain_sup - margin, convex in u.
  double domain_wall_value(Eigen::Index k, const DecisionPoint& u,
                           const Eigen::VectorXd& losses) const;
  Eigen::VectorXd domain_wall_subgrad(Eigen::Index k,
                                      const DecisionPoint& u) const;

  /// Wasserstein constraint index map (0-based): k = N*i + j.
  std::pair<Eigen::Index, Eigen::Index> index_pair(Eigen::Index k) const {
    return {k / n_obs(), k % n_obs()};
  }

 private:
  Scenario scenario_;
  Dataset data_;
  LossModel loss_;
  std::optional<DivergenceFamily> family_;
  double eps_ = 0.0;
  std::optional<double> lambda0_;
  Eigen::Index K_ = 0;
  Eigen::MatrixXd dist_;  // N x N, wasserstein only
  Eigen::VectorXd cost_;
};

}  // namespace dro

#endif  // DRO_PROBLEM_HPP
