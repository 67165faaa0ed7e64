#include "doctest.h"

#include "dro/projection.hpp"
#include "test_util.hpp"

using namespace dro;
using dro::testing::dykstra_halfspaces;
using dro::testing::HalfspaceSpec;
using dro::testing::random_vector;
using dro::testing::uniform;

namespace {

Dataset zero_feature_data(Eigen::Index n_obs) {
  // with all-zero features the logistic loss is log 2 for every theta, so
  // every constraint is affine in u
  Dataset d;
  d.features = Eigen::MatrixXd::Zero(n_obs, 1);
  d.labels = Eigen::VectorXd(n_obs);
  for (Eigen::Index i = 0; i < n_obs; ++i)
    d.labels[i] = i % 2 == 0 ? 1.0 : -1.0;
  return d;
}

Dataset small_data(Eigen::Index n_obs, Eigen::Index dim) {
  Dataset d;
  d.features = Eigen::MatrixXd(n_obs, dim);
  for (Eigen::Index i = 0; i < n_obs; ++i)
    d.features.row(i) = random_vector(dim, -1.0, 1.0).transpose();
  d.labels = Eigen::VectorXd(n_obs);
  for (Eigen::Index i = 0; i < n_obs; ++i)
    d.labels[i] = i % 2 == 0 ? 1.0 : -1.0;
  return d;
}

}  // namespace

TEST_CASE("base cone projection") {
  DecisionPoint u(2, 2);
  u.v << 1.0, -2.0, -3.0, 0.5, 4.0, -5.0;
  DecisionPoint p = project_C0(u);
  CHECK(p.lambda() == 0.0);
  // only the lambda coordinate moves
  CHECK(p.v[0] == 1.0);
  CHECK(p.v[1] == -2.0);
  CHECK(p.v[3] == 0.5);
  CHECK((project_C0(p).v - p.v).norm() == 0.0);

  u.lambda() = 7.0;
  CHECK((project_C0(u).v - u.v).norm() == 0.0);
}

TEST_CASE("subgradient projector is exact on affine constraints") {
  Dataset d = zero_feature_data(2);
  auto prob = RobustProblem::build(Scenario::wasserstein_ball, d,
                                   LossModel{LossKind::logistic, 0.0},
                                   std::nullopt, 0.1);
  for (int rep = 0; rep < 30; ++rep) {
    DecisionPoint p = prob.make_point();
    p.v = random_vector(p.v.size(), -1.0, 1.0);
    p.lambda() = uniform(0.0, 1.0);
    for (Eigen::Index k = 0; k < prob.num_constraints(); ++k) {
      double f = prob.constraint_value(k, p);
      DecisionPoint q = subgrad_projector(prob, k, p);
      if (f <= 0.0) {
        CHECK((q.v - p.v).norm() == 0.0);
      } else {
        // lands exactly on the hyperplane, at distance f / ||t||
        CHECK(prob.constraint_value(k, q) ==
              doctest::Approx(0.0).epsilon(1e-10));
        Eigen::VectorXd t = prob.constraint_subgrad(k, p);
        CHECK((q.v - p.v).norm() == doctest::Approx(f / t.norm()));
      }
    }
  }
}

TEST_CASE("relaxed combination") {
  Eigen::VectorXd p(2);
  p << 1.0, 1.0;

  // single moved projection is returned unchanged (L collapses to 1/w = 1)
  Eigen::VectorXd a(2);
  a << 0.0, 1.0;
  CHECK((relaxed_combination(p, {a}, {1.0}) - a).norm() ==
        doctest::Approx(0.0));

  // two orthogonal halfspace projections: extrapolation factor 2 reaches the
  // corner in one step
  Eigen::VectorXd b(2);
  b << 1.0, 0.0;
  Eigen::VectorXd r = relaxed_combination(p, {a, b}, {0.5, 0.5});
  CHECK(r.norm() == doctest::Approx(0.0));

  // nothing moved: L falls back to 1 and the output is p
  CHECK((relaxed_combination(p, {p, p}, {0.5, 0.5}) - p).norm() ==
        doctest::Approx(0.0));

  CHECK_THROWS(relaxed_combination(p, {}, {}));
  CHECK_THROWS(relaxed_combination(p, {a}, {0.5, 0.5}));
}

TEST_CASE("outer step against the alternating-projection oracle") {
  // the outer step projects p0 onto the cone cut down by two halfspaces;
  // compare against Dykstra on the same three halfspaces
  const Eigen::Index dim = 5, lambda_index = 2;
  int done = 0;
  while (done < 50) {
    Eigen::VectorXd p0 = random_vector(dim, -2.0, 2.0);
    Eigen::VectorXd p = random_vector(dim, -2.0, 2.0);
    Eigen::VectorXd r = random_vector(dim, -2.0, 2.0);

    std::vector<HalfspaceSpec> hs;
    Eigen::VectorXd e = Eigen::VectorXd::Zero(dim);
    e[lambda_index] = -1.0;
    hs.push_back({e, 0.0});
    hs.push_back({p - r, r.dot(p - r)});
    hs.push_back({p0 - p, p.dot(p0 - p)});

    Eigen::VectorXd exact;
    try {
      exact = haugazeau_Q(p0, p, r, lambda_index, true);
    } catch (const std::runtime_error&) {
      continue;  // degenerate empty intersection; resample
    }
    Eigen::VectorXd oracle = dykstra_halfspaces(p0, hs);
    CHECK((exact - oracle).lpNorm<Eigen::Infinity>() <= 1e-6);

    // the iterative dual variant agrees with the exact one
    Eigen::VectorXd iterative = haugazeau_Q(p0, p, r, lambda_index, false);
    CHECK((iterative - exact).lpNorm<Eigen::Infinity>() <= 1e-5);
    ++done;
  }
}

TEST_CASE("generic halfspace projection with known feasible interior") {
  for (int rep = 0; rep < 30; ++rep) {
    const Eigen::Index dim = 4;
    Eigen::VectorXd z = random_vector(dim, -1.0, 1.0);  // guaranteed point
    std::vector<Halfspace> cuts;
    std::vector<HalfspaceSpec> hs;
    int m = 2 + int(uniform(0.0, 1.0) * 2.5);
    for (int i = 0; i < m; ++i) {
      Eigen::VectorXd a = random_vector(dim, -1.0, 1.0);
      double slack = i % 2 == 0 ? 0.0 : uniform(0.0, 1.0);
      cuts.push_back({a, a.dot(z) + slack});
      hs.push_back({a, a.dot(z) + slack});
    }
    Eigen::VectorXd p0 = random_vector(dim, -3.0, 3.0);
    Eigen::VectorXd got = project_onto_halfspaces(p0, cuts, true);
    Eigen::VectorXd oracle = dykstra_halfspaces(p0, hs);
    CHECK((got - oracle).lpNorm<Eigen::Infinity>() <= 1e-6);
  }
}

TEST_CASE("feasible start is returned unchanged") {
  Dataset d = small_data(3, 2);
  auto prob = RobustProblem::build(Scenario::div_ball, d,
                                   LossModel{LossKind::logistic, 0.0},
                                   kl_family(), 0.2);
  DecisionPoint u = prob.make_point();
  u.lambda() = 1.0;
  u.s().setConstant(5.0);  // slack far above every constraint
  REQUIRE(prob.max_violation(u) < 0.0);
  DecisionPoint p = project_onto_C(u.n >= 0 ? prob : prob, u,
                                   BlockStrategy::all_constraints(), {});
  CHECK((p.v - u.v).norm() == 0.0);
}

TEST_CASE("single affine constraint is projected exactly") {
  Dataset d = zero_feature_data(1);
  auto prob = RobustProblem::build(Scenario::wasserstein_ball, d,
                                   LossModel{LossKind::logistic, 0.0},
                                   std::nullopt, 0.1);
  // the only constraint is log 2 - s <= 0 (self-distance is zero)
  DecisionPoint u = prob.make_point();
  int iters = -1;
  DecisionPoint p = project_onto_C(prob, u, BlockStrategy::all_constraints(),
                                   {}, nullptr, &iters);
  CHECK(p.s()[0] == doctest::Approx(std::log(2.0)).epsilon(1e-7));
  CHECK(p.theta().norm() == doctest::Approx(0.0));
  CHECK(iters >= 1);
}

TEST_CASE("affine system: projection matches the Dykstra oracle") {
  Dataset d = zero_feature_data(2);
  auto prob = RobustProblem::build(Scenario::wasserstein_ball, d,
                                   LossModel{LossKind::logistic, 0.0},
                                   std::nullopt, 0.1);
  const Eigen::Index dim = prob.make_point().v.size();  // theta, lambda, mu, s
  const Eigen::Index li = 1, si = 3;                    // lambda and s offsets

  std::vector<HalfspaceSpec> hs;
  Eigen::VectorXd cone = Eigen::VectorXd::Zero(dim);
  cone[li] = -1.0;
  hs.push_back({cone, 0.0});
  for (Eigen::Index k = 0; k < prob.num_constraints(); ++k) {
    auto [i, j] = prob.index_pair(k);
    Eigen::VectorXd a = Eigen::VectorXd::Zero(dim);
    a[li] = -prob.pairwise_dist()(i, j);
    a[si + j] = -1.0;
    hs.push_back({a, -std::log(2.0)});
  }

  for (int rep = 0; rep < 10; ++rep) {
    DecisionPoint u = prob.make_point();
    u.v = random_vector(dim, -1.0, 1.0);
    Eigen::VectorXd oracle = dykstra_halfspaces(u.v, hs);

    ProjectionConfig config;
    DecisionPoint p = project_onto_C(prob, u, BlockStrategy::all_constraints(),
                                     config);
    CHECK((p.v - oracle).lpNorm<Eigen::Infinity>() <= 1e-3);

    // block scheduling reaches the same projection
    DecisionPoint pb = project_onto_C(prob, u,
                                      BlockStrategy::random_subset_of(2, rep),
                                      config);
    CHECK((pb.v - oracle).lpNorm<Eigen::Infinity>() <= 1e-3);
  }
}

TEST_CASE("curved feasible set: feasibility and minimal distance") {
  Dataset d = small_data(2, 2);
  auto prob = RobustProblem::build(Scenario::div_ball, d,
                                   LossModel{LossKind::logistic, 0.0},
                                   kl_family(), 0.3);
  const Eigen::Index dim = prob.make_point().v.size();

  auto repair = [&](DecisionPoint w) {
    // push the slack block up to the constraint surface; stays feasible
    w.lambda() = std::max(w.lambda(), 0.0);
    Eigen::VectorXd losses = prob.all_losses(w);
    for (Eigen::Index k = 0; k < prob.num_constraints(); ++k) {
      DecisionPoint tmp = w;
      tmp.s()[k] = 0.0;
      double fk = prob.constraint_value_cached(k, tmp, losses);
      w.s()[k] = std::max(w.s()[k], fk);
    }
    return w;
  };

  for (int rep = 0; rep < 5; ++rep) {
    DecisionPoint u0 = prob.make_point();
    u0.v = random_vector(dim, -1.0, 1.0);
    ProjectionConfig config;
    DecisionPoint star = project_onto_C(prob, u0,
                                        BlockStrategy::all_constraints(),
                                        config);
    CHECK(prob.max_violation(star) <= 10.0 * config.tol);
    double dist = (star.v - project_C0(u0).v).norm();

    // no sampled feasible point is closer, and the variational inequality
    // <p0 - u*, w - u*> <= 0 holds against them
    for (int s = 0; s < 200; ++s) {
      DecisionPoint w = prob.make_point();
      w.v = star.v + random_vector(dim, -0.3, 0.3);
      w.lambda() = std::max(w.lambda(), 0.1);
      w = repair(w);
      REQUIRE(prob.max_violation(w) <= 1e-10);
      CHECK((w.v - project_C0(u0).v).norm() >= dist - 1e-4);
      CHECK((project_C0(u0).v - star.v).dot(w.v - star.v) <=
            1e-3 * (1.0 + dist));
    }
  }
}

TEST_CASE("distance from the start never decreases along the sweep") {
  Dataset d = small_data(3, 2);
  auto prob = RobustProblem::build(Scenario::div_ball, d,
                                   LossModel{LossKind::logistic, 0.0},
                                   modified_chi2_family(), 0.2);
  DecisionPoint u = prob.make_point();
  u.v = random_vector(u.v.size(), -1.0, 1.0);

  std::vector<double> dists;
  project_onto_C(prob, u, BlockStrategy::all_constraints(), {},
                 [&](int, double, double dist) { dists.push_back(dist); });
  REQUIRE(dists.size() >= 2);
  for (std::size_t i = 1; i < dists.size(); ++i)
    CHECK(dists[i] >= dists[i - 1] - 1e-9);
}

TEST_CASE("iteration cap raises a failure carrying the best iterate") {
  Dataset d = small_data(3, 2);
  auto prob = RobustProblem::build(Scenario::div_ball, d,
                                   LossModel{LossKind::logistic, 0.0},
                                   kl_family(), 0.2);
  DecisionPoint u = prob.make_point();
  u.s().setConstant(-50.0);  // deeply infeasible
  ProjectionConfig config;
  config.max_iter = 1;
  config.stability_tol = 0.0;
  try {
    project_onto_C(prob, u, BlockStrategy::all_constraints(), config);
    FAIL("expected ProjectionFailure");
  } catch (const ProjectionFailure& e) {
    CHECK(e.best.v.size() == u.v.size());
  }
}
