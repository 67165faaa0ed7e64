#include "doctest.h"

#include "dro/loss.hpp"
#include "test_util.hpp"

using namespace dro;
using dro::testing::fd_gradient;
using dro::testing::random_vector;
using dro::testing::uniform;

namespace {

Eigen::VectorXd make_z(const Eigen::VectorXd& x, double y) {
  Eigen::VectorXd z(x.size() + 1);
  z << x, y;
  return z;
}

}  // namespace

TEST_CASE("logistic loss values") {
  LossModel model{LossKind::logistic, 0.0};
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(3);
  Eigen::VectorXd x = random_vector(3, -1.0, 1.0);

  // theta = 0: log 2 regardless of the observation
  CHECK(loss_value(model, theta, make_z(x, 1.0)) ==
        doctest::Approx(std::log(2.0)));

  theta << 1.0, 0.0, 0.0;
  Eigen::Vector3d e1(1.0, 0.0, 0.0);
  CHECK(loss_value(model, theta, make_z(e1, 1.0)) ==
        doctest::Approx(std::log(1.0 + std::exp(-1.0))));
  CHECK(loss_value(model, theta, make_z(e1, -1.0)) ==
        doctest::Approx(std::log(1.0 + std::exp(1.0))));

  // stability at extreme margins
  Eigen::VectorXd big = Eigen::VectorXd::Constant(3, 500.0);
  CHECK(std::isfinite(loss_value(model, big, make_z(e1, -1.0))));
  CHECK(loss_value(model, big, make_z(e1, 1.0)) ==
        doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("ridge least squares values") {
  LossModel model{LossKind::ridge_ls, 0.5};
  Eigen::VectorXd theta(2);
  theta << 1.0, -1.0;
  Eigen::VectorXd x(2);
  x << 2.0, 1.0;
  // residual y - x'theta = 3 - 1 = 2; 0.5*4 + 0.5*0.5*2 = 2.5
  CHECK(loss_value(model, theta, make_z(x, 3.0)) == doctest::Approx(2.5));
}

TEST_CASE("subgradients match finite differences") {
  for (const auto& model :
       {LossModel{LossKind::logistic, 0.0}, LossModel{LossKind::ridge_ls, 0.2}}) {
    for (int rep = 0; rep < 100; ++rep) {
      Eigen::VectorXd theta = random_vector(4, -2.0, 2.0);
      Eigen::VectorXd x = random_vector(4, -2.0, 2.0);
      double y = model.kind == LossKind::logistic
                     ? (uniform(0.0, 1.0) < 0.5 ? -1.0 : 1.0)
                     : uniform(-2.0, 2.0);
      Eigen::VectorXd z = make_z(x, y);
      Eigen::VectorXd g = loss_subgrad(model, theta, z);
      Eigen::VectorXd fd = fd_gradient(
          [&](const Eigen::VectorXd& th) { return loss_value(model, th, z); },
          theta);
      CHECK((g - fd).lpNorm<Eigen::Infinity>() <= 1e-5);
    }
  }
}

TEST_CASE("convexity and the subgradient inequality (sampled)") {
  for (const auto& model :
       {LossModel{LossKind::logistic, 0.0}, LossModel{LossKind::ridge_ls, 0.1}}) {
    for (int rep = 0; rep < 100; ++rep) {
      Eigen::VectorXd a = random_vector(3, -3.0, 3.0);
      Eigen::VectorXd b = random_vector(3, -3.0, 3.0);
      Eigen::VectorXd x = random_vector(3, -2.0, 2.0);
      double y = model.kind == LossKind::logistic ? 1.0 : uniform(-1.0, 1.0);
      Eigen::VectorXd z = make_z(x, y);
      double eta = uniform(0.0, 1.0);

      double lhs = loss_value(model, eta * a + (1 - eta) * b, z);
      CHECK(lhs <= eta * loss_value(model, a, z) +
                       (1 - eta) * loss_value(model, b, z) + 1e-10);

      Eigen::VectorXd g = loss_subgrad(model, a, z);
      CHECK(loss_value(model, b, z) >=
            loss_value(model, a, z) + g.dot(b - a) - 1e-10);
    }
  }
}

TEST_CASE("split-argument forms agree with the packed form") {
  LossModel model{LossKind::logistic, 0.0};
  for (int rep = 0; rep < 20; ++rep) {
    Eigen::VectorXd theta = random_vector(5, -1.0, 1.0);
    Eigen::VectorXd x = random_vector(5, -1.0, 1.0);
    double y = rep % 2 == 0 ? 1.0 : -1.0;
    CHECK(loss_value_xy(model, theta, x, y) ==
          doctest::Approx(loss_value(model, theta, make_z(x, y))));
    CHECK((loss_subgrad_xy(model, theta, x, y) -
           loss_subgrad(model, theta, make_z(x, y)))
              .norm() == doctest::Approx(0.0));
  }
}

TEST_CASE("dimension mismatch throws") {
  LossModel model{LossKind::logistic, 0.0};
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(3);
  CHECK_THROWS_AS(loss_value(model, theta, Eigen::VectorXd::Zero(3)),
                  std::invalid_argument);
}
