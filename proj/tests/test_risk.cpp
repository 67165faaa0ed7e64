#include "doctest.h"

#include "dro/risk.hpp"
#include "test_util.hpp"

using namespace dro;
using dro::testing::cvar_sorted;
using dro::testing::random_vector;
using dro::testing::uniform;

TEST_CASE("simplex weights validation") {
  CHECK_THROWS(SimplexWeights(Eigen::Vector2d(0.5, 0.4)));
  CHECK_THROWS(SimplexWeights(Eigen::Vector2d(1.0, 0.0)));
  CHECK(SimplexWeights::uniform(4).p.sum() == doctest::Approx(1.0));
}

TEST_CASE("divergence penalty risk: closed forms") {
  auto kl = kl_family();
  auto p = SimplexWeights::uniform(2);

  Eigen::VectorXd zero = Eigen::VectorXd::Zero(2);
  CHECK(risk_divergence_penalty(zero, p, kl, 1.0) ==
        doctest::Approx(0.0).epsilon(1e-8));

  // entropic closed form log sum p_i e^{x_i}
  Eigen::VectorXd x(2);
  x << 0.0, std::log(3.0);
  CHECK(risk_divergence_penalty(x, p, kl, 1.0) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-7));

  // entropic form for general lambda0: lambda0 log sum p_i e^{x_i/lambda0}
  Eigen::VectorXd y = random_vector(5, -1.0, 2.0);
  auto p5 = SimplexWeights::uniform(5);
  for (double lambda0 : {0.5, 1.0, 2.0}) {
    double expect =
        lambda0 * std::log((y.array() / lambda0).exp().matrix().dot(p5.p));
    CHECK(risk_divergence_penalty(y, p5, kl, lambda0) ==
          doctest::Approx(expect).epsilon(1e-7));
  }
}

TEST_CASE("AVaR penalty equals sorted CVaR") {
  auto fam = avar_family(0.5);
  auto p = SimplexWeights::uniform(4);
  Eigen::VectorXd x(4);
  x << 1.0, 2.0, 3.0, 4.0;
  CHECK(risk_divergence_penalty(x, p, fam, 1.0) == doctest::Approx(3.5));

  for (int i = 0; i < 50; ++i) {
    double beta = uniform(0.05, 0.9);
    Eigen::VectorXd z = random_vector(6, -3.0, 3.0);
    auto p6 = SimplexWeights::uniform(6);
    CHECK(risk_divergence_penalty(z, p6, avar_family(beta), 1.0) ==
          doctest::Approx(cvar_sorted(z, p6.p, beta)).epsilon(1e-6));
  }
}

TEST_CASE("divergence ball risk: closed forms") {
  auto kl = kl_family();
  auto p = SimplexWeights::uniform(3);
  Eigen::VectorXd x(3);
  x << 1.0, 2.0, 3.0;

  // constant losses: translation invariance + rho(0) = 0
  Eigen::VectorXd c = Eigen::VectorXd::Constant(3, 2.5);
  for (const auto& fam : {kl_family(), modified_chi2_family(), burg_family()})
    CHECK(risk_divergence_ball(c, p, fam, 0.3) ==
          doctest::Approx(2.5).epsilon(1e-7));

  // huge radius: sup over the simplex = max loss
  CHECK(std::abs(risk_divergence_ball(x, p, kl, 1e3) - 3.0) <= 1e-6);

  // small radius, cross-checked against the brute-force oracle
  double closed = risk_divergence_ball(x, p, kl, 0.1);
  double brute =
      risk_bruteforce(x, p, divergence_ball_indicator(kl, p, 0.1), 1e-3);
  CHECK(std::abs(closed - brute) <= 1e-3);
}

TEST_CASE("brute force on the simplex") {
  auto p = SimplexWeights::uniform(3);
  Eigen::VectorXd x(3);
  x << 1.0, 5.0, 2.0;

  // alpha = 0: support function of the simplex
  CHECK(risk_bruteforce(x, p, [](const Vector&) { return 0.0; }, 1e-2) ==
        doctest::Approx(5.0));

  // alpha = indicator of {p}: plain expectation
  auto singleton = [&](const Vector& q) {
    return (q - p.p).lpNorm<Eigen::Infinity>() < 1e-3 ? 0.0 : kInf;
  };
  CHECK(risk_bruteforce(x, p, singleton, 1e-3) ==
        doctest::Approx(p.p.dot(x)).epsilon(1e-3));

  CHECK_THROWS(risk_bruteforce(Eigen::VectorXd::Zero(6),
                               SimplexWeights::uniform(6),
                               [](const Vector&) { return 0.0; }, 1e-2));
}

TEST_CASE("penalty brute force cross-check") {
  auto kl = kl_family();
  for (int rep = 0; rep < 5; ++rep) {
    Eigen::VectorXd x = random_vector(3, 0.0, 1.0);
    auto p = SimplexWeights::uniform(3);
    double closed = risk_divergence_penalty(x, p, kl, 1.0);
    double brute =
        risk_bruteforce(x, p, divergence_penalty_alpha(kl, p, 1.0), 1e-3);
    CHECK(std::abs(closed - brute) <= 2e-3);
  }
}

TEST_CASE("risk axioms (sampled)") {
  auto kl = kl_family();
  auto mc = modified_chi2_family();
  auto p = SimplexWeights::uniform(4);
  for (int rep = 0; rep < 50; ++rep) {
    Eigen::VectorXd x = random_vector(4, -2.0, 2.0);
    Eigen::VectorXd y = random_vector(4, -2.0, 2.0);
    double m = uniform(-5.0, 5.0);
    double eta = uniform(0.01, 0.99);

    auto pen = [&](const Eigen::VectorXd& v) {
      return risk_divergence_penalty(v, p, kl, 1.0);
    };
    auto ball = [&](const Eigen::VectorXd& v) {
      return risk_divergence_ball(v, p, mc, 0.2);
    };

    for (auto rho : {std::function<double(const Eigen::VectorXd&)>(pen),
                     std::function<double(const Eigen::VectorXd&)>(ball)}) {
      // translation invariance
      CHECK(std::abs(rho((x.array() + m).matrix()) - rho(x) - m) <= 1e-6);
      // monotonicity
      Eigen::VectorXd upper = x.array().max(y.array());
      CHECK(rho(x) <= rho(upper) + 1e-8);
      // convexity
      CHECK(rho(eta * x + (1 - eta) * y) <=
            eta * rho(x) + (1 - eta) * rho(y) + 1e-6);
      // 1-Lipschitz in sup norm
      CHECK(std::abs(rho(x) - rho(y)) <=
            (x - y).lpNorm<Eigen::Infinity>() + 1e-8);
    }

    // positive homogeneity holds for the ball (coherent) measure only
    double eta2 = uniform(0.0, 10.0);
    CHECK(std::abs(ball(eta2 * x) - eta2 * ball(x)) <= 1e-6);
  }
}

TEST_CASE("invalid arguments") {
  auto p = SimplexWeights::uniform(2);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(2);
  CHECK_THROWS(risk_divergence_penalty(x, p, kl_family(), 0.0));
  CHECK_THROWS(risk_divergence_ball(x, p, kl_family(), 0.0));
}
