#ifndef DRO_LOSS_HPP
#define DRO_LOSS_HPP

#include <Eigen/Dense>
#include <stdexcept>

namespace dro {

enum class LossKind { logistic, ridge_ls };

/// Convex per-observation loss l(theta, z) with z = [x; y].
/// logistic: log(1 + exp(-y x'theta)), y in {-1, +1}.
/// ridge_ls: 0.5 (y - x'theta)^2 + 0.5 ridge_weight ||theta||^2.
struct LossModel {
  LossKind kind = LossKind::logistic;
  double ridge_weight = 0.0;
};

/// log(1 + e^u), stable for large |u|.
inline double log1p_exp(double u) {
  if (u > 0.0) return u + std::log1p(std::exp(-u));
  return std::log1p(std::exp(u));
}

inline void check_dims(const Eigen::VectorXd& theta, const Eigen::VectorXd& z) {
  if (z.size() != theta.size() + 1)
    throw std::invalid_argument("loss: z must have dimension n + 1");
}

double loss_value(const LossModel& model, const Eigen::VectorXd& theta,
                  const Eigen::VectorXd& z);

Eigen::VectorXd loss_subgrad(const LossModel& model,
                             const Eigen::VectorXd& theta,
                             const Eigen::VectorXd& z);

/// Same, with features and label already split out (hot path).
double loss_value_xy(const LossModel& model, const Eigen::VectorXd& theta,
                     const Eigen::VectorXd& x, double y);
Eigen::VectorXd loss_subgrad_xy(const LossModel& model,
                                const Eigen::VectorXd& theta,
                                const Eigen::VectorXd& x, double y);

}  // namespace dro

#endif  // DRO_LOSS_HPP
