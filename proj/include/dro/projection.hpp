#ifndef DRO_PROJECTION_HPP
#define DRO_PROJECTION_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "dro/problem.hpp"

namespace dro {

/// {u : <normal, u> <= offset}.
struct Halfspace {
  Eigen::VectorXd normal;
  double offset = 0.0;
};

enum class BlockMode { all, round_robin, random_subset };

struct BlockStrategy {
  BlockMode mode = BlockMode::all;
  Eigen::Index block_size = 0;  // ignored for mode all
  std::uint64_t seed = 0;

  static BlockStrategy all_constraints() { return {}; }
  static BlockStrategy random_subset_of(Eigen::Index size,
                                        std::uint64_t seed = 0) {
    return {BlockMode::random_subset, size, seed};
  }
};

struct ProjectionConfig {
  double tol = 1e-8;          // feasibility tolerance on max_k f_k
  int max_iter = 100000;      // cap on the l-loop
  double weight_floor = 1e-4; // delta in Algorithm 1
  double stability_tol = 1e-5;
  // The printed update divides by ||t|| instead of ||t||^2; it is not a
  // projector for affine constraints and is kept only for comparison.
  bool normalize_by_norm_squared = true;
  // Exact Q by active-set enumeration over the three halfspaces, or the
  // iterative dual forward-backward variant.
  bool exact_q = true;
};

/// Per-iteration trace record: (l, max violation, ||p_l - p_0||).
using ProjectionTraceSink =
    std::function<void(int iter, double max_violation, double dist_from_start)>;

struct ProjectionFailure : std::runtime_error {
  DecisionPoint best;
  ProjectionFailure(const std::string& what, DecisionPoint b)
      : std::runtime_error(what), best(std::move(b)) {}
};

/// Projection onto the base cone C0 = {lambda >= 0}.
DecisionPoint project_C0(DecisionPoint u);

/// Subgradient projector for constraint k at p (f_k(p) finite): returns p if
/// f_k(p) <= 0, else p - (f_k(p)/||t||^2) t for t in the subdifferential.
DecisionPoint subgrad_projector(const RobustProblem& problem, Eigen::Index k,
                                const DecisionPoint& p,
                                bool normalize_by_norm_squared = true);

/// Extrapolated relaxation r = p + L (sum_k w_k p_k - p); L is the
/// Pierra-style extrapolation factor when some projection moved, else 1.
Eigen::VectorXd relaxed_combination(const Eigen::VectorXd& p,
                                    const std::vector<Eigen::VectorXd>& projections,
                                    const std::vector<double>& weights);

/// Exact projection of p0 onto C0 /\ H /\ D with
/// H = {u : <u - r, p - r> <= 0}, D = {u : <u - p, p0 - p> <= 0},
/// by active-set enumeration over the <= 3 halfspaces.
Eigen::VectorXd haugazeau_Q(const Eigen::VectorXd& p0, const Eigen::VectorXd& p,
                            const Eigen::VectorXd& r, Eigen::Index lambda_index,
                            bool exact = true);

/// Generic projection of p0 onto an intersection of halfspaces (used by Q and
/// directly testable).
Eigen::VectorXd project_onto_halfspaces(const Eigen::VectorXd& p0,
                                        const std::vector<Halfspace>& cuts,
                                        bool exact = true);

/// Algorithm: block subgradient projections with extrapolated relaxation and
/// the outer Q operator, driving p to P_C(p0).
DecisionPoint project_onto_C(const RobustProblem& problem,
                             const DecisionPoint& p0,
                             const BlockStrategy& strategy,
                             const ProjectionConfig& config,
                             const ProjectionTraceSink& trace = nullptr,
                             int* iterations_out = nullptr);

}  // namespace dro

#endif  // DRO_PROJECTION_HPP
