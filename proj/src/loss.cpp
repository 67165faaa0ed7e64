#include "dro/loss.hpp"

namespace dro {

double loss_value_xy(const LossModel& model, const Eigen::VectorXd& theta,
                     const Eigen::VectorXd& x, double y) {
  double margin = x.dot(theta);
  switch (model.kind) {
    case LossKind::logistic:
      return log1p_exp(-y * margin);
    case LossKind::ridge_ls: {
      double r = y - margin;
      return 0.5 * r * r + 0.5 * model.ridge_weight * theta.squaredNorm();
    }
  }
  throw std::logic_error("unreachable");
}

Eigen::VectorXd loss_subgrad_xy(const LossModel& model,
                                const Eigen::VectorXd& theta,
                                const Eigen::VectorXd& x, double y) {
  double margin = x.dot(theta);
  switch (model.kind) {
    case LossKind::logistic: {
      // sigma(-y x'theta), computed from the negative exponent only
      double u = -y * margin;
      double sig = u > 0.0 ? 1.0 / (1.0 + std::exp(-u))
                           : std::exp(u) / (1.0 + std::exp(u));
      return (-y * sig) * x;
    }
    case LossKind::ridge_ls:
      return -(y - margin) * x + model.ridge_weight * theta;
  }
  throw std::logic_error("unreachable");
}

double loss_value(const LossModel& model, const Eigen::VectorXd& theta,
                  const Eigen::VectorXd& z) {
  check_dims(theta, z);
  return loss_value_xy(model, theta, z.head(z.size() - 1), z[z.size() - 1]);
}

Eigen::VectorXd loss_subgrad(const LossModel& model,
                             const Eigen::VectorXd& theta,
                             const Eigen::VectorXd& z) {
  check_dims(theta, z);
  return loss_subgrad_xy(model, theta, z.head(z.size() - 1), z[z.size() - 1]);
}

}  // namespace dro
