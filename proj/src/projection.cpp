#include "dro/projection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace dro {

namespace {

// p - (f/||t||^2) t, computed with inf-norm scaling so that huge conjugate
// derivatives (KL near the exponent cap) do not overflow.
Eigen::VectorXd halfspace_step(const Eigen::VectorXd& p, double f,
                               const Eigen::VectorXd& t, bool norm_squared) {
  double m = t.lpNorm<Eigen::Infinity>();
  if (m == 0.0)
    throw std::runtime_error(
        "subgradient projector: zero subgradient with positive violation");
  Eigen::VectorXd tau = t / m;
  double denom = norm_squared ? tau.squaredNorm() : tau.norm();
  return p - ((f / m) / denom) * tau;
}

}  // namespace

DecisionPoint project_C0(DecisionPoint u) {
  u.lambda() = std::max(u.lambda(), 0.0);
  return u;
}

DecisionPoint subgrad_projector(const RobustProblem& problem, Eigen::Index k,
                                const DecisionPoint& p,
                                bool normalize_by_norm_squared) {
  double f = problem.constraint_value(k, p);
  if (std::isinf(f))
    throw std::domain_error("subgrad_projector: f_k is +inf at p");
  if (f <= 0.0) return p;
  Eigen::VectorXd t = problem.constraint_subgrad(k, p);
  DecisionPoint out = p;
  out.v = halfspace_step(p.v, f, t, normalize_by_norm_squared);
  return out;
}

Eigen::VectorXd relaxed_combination(const Eigen::VectorXd& p,
                                    const std::vector<Eigen::VectorXd>& projections,
                                    const std::vector<double>& weights) {
  if (projections.empty() || projections.size() != weights.size())
    throw std::invalid_argument("relaxed_combination: bad arguments");
  Eigen::VectorXd q = Eigen::VectorXd::Zero(p.size());
  double num = 0.0;
  bool moved = false;
  for (std::size_t k = 0; k < projections.size(); ++k) {
    Eigen::VectorXd diff = projections[k] - p;
    double d2 = diff.squaredNorm();
    if (d2 > 0.0) moved = true;
    q += weights[k] * diff;
    num += weights[k] * d2;
  }
  double qn2 = q.squaredNorm();
  double L = 1.0;
  if (moved && qn2 > 0.0) L = num / qn2;
  return p + L * q;
}

Eigen::VectorXd project_onto_halfspaces(const Eigen::VectorXd& p0,
                                        const std::vector<Halfspace>& cuts,
                                        bool exact) {
  std::vector<const Halfspace*> active;
  for (const auto& h : cuts)
    if (h.normal.squaredNorm() > 0.0) active.push_back(&h);
  const int m = static_cast<int>(active.size());
  if (m == 0) return p0;

  auto feasible = [&](const Eigen::VectorXd& u) {
    for (const auto* h : active) {
      double slack = h->normal.dot(u) - h->offset;
      double scale = 1.0 + std::abs(h->offset) + h->normal.norm() * u.norm();
      if (slack > 1e-9 * scale) return false;
    }
    return true;
  };

  if (!exact) {
    // Dual forward-backward: gradient ascent on the multipliers of the
    // halfspace constraints, u = p0 - A' nu.
    Eigen::MatrixXd A(m, p0.size());
    Eigen::VectorXd b(m);
    for (int i = 0; i < m; ++i) {
      A.row(i) = active[i]->normal;
      b[i] = active[i]->offset;
    }
    double step = 1.0 / std::max(1e-12, (A * A.transpose()).norm());
    Eigen::VectorXd nu = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd u = p0;
    for (int it = 0; it < 20000; ++it) {
      Eigen::VectorXd nu_next =
          (nu + step * (A * u - b)).cwiseMax(0.0);
      Eigen::VectorXd u_next = p0 - A.transpose() * nu_next;
      double delta = (u_next - u).norm();
      u = u_next;
      nu = nu_next;
      if (delta <= 1e-13 * (1.0 + u.norm())) break;
    }
    return u;
  }

  // Active-set enumeration: for every subset S solve
  //   min ||u - p0||^2  s.t.  A_S u = b_S,
  // keep the feasible candidate closest to p0.
  double best_dist = kInf;
  Eigen::VectorXd best;
  for (int mask = 0; mask < (1 << m); ++mask) {
    Eigen::VectorXd u;
    if (mask == 0) {
      u = p0;
    } else {
      int rows = __builtin_popcount(static_cast<unsigned>(mask));
      Eigen::MatrixXd A(rows, p0.size());
      Eigen::VectorXd rhs(rows);
      int rr = 0;
      for (int i = 0; i < m; ++i) {
        if (mask & (1 << i)) {
          A.row(rr) = active[i]->normal;
          rhs[rr] = active[i]->offset - active[i]->normal.dot(p0);
          ++rr;
        }
      }
      Eigen::MatrixXd G = A * A.transpose();
      Eigen::VectorXd nu =
          G.completeOrthogonalDecomposition().solve(rhs);
      u = p0 + A.transpose() * nu;
      // discard subsets whose equality system is inconsistent
      if ((A * (u - p0) - rhs).lpNorm<Eigen::Infinity>() >
          1e-8 * (1.0 + rhs.lpNorm<Eigen::Infinity>()))
        continue;
    }
    if (!feasible(u)) continue;
    double d = (u - p0).squaredNorm();
    if (d < best_dist) {
      best_dist = d;
      best = u;
    }
  }
  if (std::isinf(best_dist))
    throw std::runtime_error("projection: empty halfspace intersection");
  return best;
}

Eigen::VectorXd haugazeau_Q(const Eigen::VectorXd& p0, const Eigen::VectorXd& p,
                            const Eigen::VectorXd& r, Eigen::Index lambda_index,
                            bool exact) {
  std::vector<Halfspace> cuts;
  // C0: lambda >= 0
  Eigen::VectorXd e = Eigen::VectorXd::Zero(p0.size());
  e[lambda_index] = -1.0;
  cuts.push_back({e, 0.0});
  // H: <u - r, p - r> <= 0
  cuts.push_back({p - r, r.dot(p - r)});
  // D: <u - p, p0 - p> <= 0
  cuts.push_back({p0 - p, p.dot(p0 - p)});
  return project_onto_halfspaces(p0, cuts, exact);
}

namespace {

// Hands out constraint index blocks; every index appears within a bounded
// number of consecutive blocks regardless of mode.
class BlockSchedule {
 public:
  BlockSchedule(const BlockStrategy& s, Eigen::Index K)
      : strategy_(s), K_(K), gen_(s.seed) {
    if (s.mode != BlockMode::all) {
      if (s.block_size <= 0)
        throw std::invalid_argument("block strategy: block_size must be > 0");
      perm_.resize(static_cast<std::size_t>(K));
      std::iota(perm_.begin(), perm_.end(), 0);
      if (s.mode == BlockMode::random_subset) shuffle();
    }
  }

  // Fills `block` with the next index set.
  void next(std::vector<Eigen::Index>& block) {
    block.clear();
    if (strategy_.mode == BlockMode::all) {
      block.resize(static_cast<std::size_t>(K_));
      std::iota(block.begin(), block.end(), 0);
      return;
    }
    for (Eigen::Index c = 0; c < strategy_.block_size; ++c) {
      if (pos_ == perm_.size()) {
        pos_ = 0;
        if (strategy_.mode == BlockMode::random_subset) shuffle();
      }
      block.push_back(perm_[pos_++]);
    }
  }

 private:
  void shuffle() {
    for (std::size_t i = perm_.size(); i > 1; --i)
      std::swap(perm_[i - 1], perm_[static_cast<std::size_t>(gen_() % i)]);
  }

  BlockStrategy strategy_;
  Eigen::Index K_;
  std::mt19937_64 gen_;
  std::vector<Eigen::Index> perm_;
  std::size_t pos_ = 0;
};

}  // namespace

namespace {

// Projection of p0 onto the tangent-cut polyhedron of the near-active
// constraints at p.  The polyhedron contains C (tangent cuts of convex
// constraints are outer approximations), so if the result is feasible for
// the original constraints it certifies the exact projection; either way it
// is a valid continuation iterate because the D-cut is included.
Eigen::VectorXd polish_step(const RobustProblem& problem,
                            const Eigen::VectorXd& p0, const DecisionPoint& p,
                            const Eigen::VectorXd& losses,
                            Eigen::Index lambda_index, bool exact) {
  const Eigen::Index K = problem.num_constraints();
  std::vector<std::pair<double, Eigen::Index>> ranked;
  for (Eigen::Index k = 0; k < K; ++k) {
    double f = problem.constraint_value_cached(k, p, losses);
    if (std::isinf(f) || f > -0.1) ranked.push_back({f, k});
  }
  std::sort(ranked.begin(), ranked.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  if (ranked.size() > 64) ranked.resize(64);

  std::vector<Halfspace> cuts;
  Eigen::VectorXd e = Eigen::VectorXd::Zero(p0.size());
  e[lambda_index] = -1.0;
  cuts.push_back({e, 0.0});
  Eigen::VectorXd dn = p0 - p.v;
  if (dn.squaredNorm() > 0.0) cuts.push_back({dn, p.v.dot(dn)});
  for (const auto& [f, k] : ranked) {
    Eigen::Index obs =
        problem.scenario() == Scenario::wasserstein_ball ? k / problem.n_obs()
                                                         : k;
    Eigen::VectorXd t;
    double offset;
    if (std::isinf(f)) {
      double g = problem.domain_wall_value(obs, p, losses);
      t = problem.domain_wall_subgrad(obs, p);
      offset = t.dot(p.v) - g;
    } else {
      t = problem.constraint_subgrad(k, p);
      offset = t.dot(p.v) - f;
    }
    // normalize so that huge conjugate values (KL near the exponent cap) do
    // not overflow the cut system
    double m = t.lpNorm<Eigen::Infinity>();
    if (!(m > 0.0) || !std::isfinite(m) || !std::isfinite(offset / m))
      continue;
    cuts.push_back({t / m, offset / m});
  }
  return project_onto_halfspaces(p0, cuts, exact && cuts.size() <= 12);
}

}  // namespace

DecisionPoint project_onto_C(const RobustProblem& problem,
                             const DecisionPoint& start,
                             const BlockStrategy& strategy,
                             const ProjectionConfig& config,
                             const ProjectionTraceSink& trace,
                             int* iterations_out) {
  DecisionPoint p = project_C0(start);
  const Eigen::VectorXd p0 = p.v;
  const Eigen::Index lambda_index = p.n;
  const Eigen::Index K = problem.num_constraints();

  BlockSchedule schedule(strategy, K);
  std::vector<Eigen::Index> block;
  std::vector<Eigen::VectorXd> projections;
  std::vector<double> weights;

  auto try_polish = [&](const Eigen::VectorXd& losses, double current_worst) {
    try {
      Eigen::VectorXd w =
          polish_step(problem, p0, p, losses, lambda_index, config.exact_q);
      DecisionPoint cand = p;
      cand.v = w;
      cand.lambda() = std::max(cand.lambda(), 0.0);
      double v = problem.max_violation(cand);
      if (v <= config.tol) {
        p = std::move(cand);
        return true;
      }
      // uncertified continuation is always safe: the D-cut keeps the Fejer
      // invariant, and repeated polishing contracts like a cutting-plane
      // method even when the block steps cancel each other out
      (void)current_worst;
      p = std::move(cand);
      return false;
    } catch (const std::runtime_error&) {
      return false;  // degenerate cut system; keep the current iterate
    }
  };

  for (int iter = 0; iter < config.max_iter; ++iter) {
    Eigen::VectorXd losses = problem.all_losses(p);

    double worst = -kInf;
    for (Eigen::Index k = 0; k < K; ++k)
      worst = std::max(worst, problem.constraint_value_cached(k, p, losses));
    if (trace) trace(iter, worst, (p.v - p0).norm());
    if (worst <= config.tol) {
      if (iterations_out) *iterations_out = iter;
      return p;
    }

    schedule.next(block);
    projections.clear();
    for (Eigen::Index k : block) {
      double f = problem.constraint_value_cached(k, p, losses);
      Eigen::Index obs =
          problem.scenario() == Scenario::wasserstein_ball ? k / problem.n_obs()
                                                           : k;
      if (std::isinf(f)) {
        // outside the conjugate domain: step onto the domain wall first
        double g = problem.domain_wall_value(obs, p, losses);
        Eigen::VectorXd t = problem.domain_wall_subgrad(obs, p);
        projections.push_back(
            halfspace_step(p.v, std::max(g, 0.0), t,
                           config.normalize_by_norm_squared));
      } else if (f > 0.0) {
        Eigen::VectorXd t = problem.constraint_subgrad(k, p);
        projections.push_back(
            halfspace_step(p.v, f, t, config.normalize_by_norm_squared));
      }
    }

    if (projections.empty()) continue;  // block happened to be feasible

    weights.assign(projections.size(),
                   std::max(config.weight_floor,
                            1.0 / static_cast<double>(projections.size())));
    double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
    for (double& w : weights) w /= wsum;

    Eigen::VectorXd r = relaxed_combination(p.v, projections, weights);
    Eigen::VectorXd next =
        haugazeau_Q(p0, p.v, r, lambda_index, config.exact_q);

    double step_norm = (next - p.v).norm();
    p.v = next;
    p.lambda() = std::max(p.lambda(), 0.0);

    // the three-halfspace outer step can zigzag between constraints at a
    // sublinear rate; periodically (and whenever it stalls) jump to the
    // projection onto the tangent-cut polyhedron, which certifies the exact
    // projection when its output is feasible
    if (iter % 8 == 7 || step_norm <= config.stability_tol) {
      Eigen::VectorXd l2 = problem.all_losses(p);
      double w2 = -kInf;
      for (Eigen::Index k = 0; k < K; ++k)
        w2 = std::max(w2, problem.constraint_value_cached(k, p, l2));
      if (step_norm <= config.stability_tol && w2 <= 10.0 * config.tol) {
        // stalled close enough to feasible
        if (iterations_out) *iterations_out = iter + 1;
        return p;
      }
      if (try_polish(l2, w2)) {
        if (iterations_out) *iterations_out = iter + 1;
        return p;
      }
    }
  }
  if (try_polish(problem.all_losses(p), problem.max_violation(p))) {
    if (iterations_out) *iterations_out = config.max_iter;
    return p;
  }
  throw ProjectionFailure("project_onto_C: iteration cap exceeded", p);
}

}  // namespace dro
