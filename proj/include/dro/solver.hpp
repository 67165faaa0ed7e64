#ifndef DRO_SOLVER_HPP
#define DRO_SOLVER_HPP

#include <iosfwd>
#include <vector>

#include "dro/projection.hpp"

namespace dro {

struct SolverConfig {
  double gamma = 0.0;        // gradient step; 0 means auto (1 / ||c||)
  double a = 3.0;            // momentum schedule parameter, > 2
  double outer_tol = 1e-5;   // stop when ||u_{n+1} - u_n|| <= outer_tol
  int max_outer = 5000;
  BlockStrategy strategy;
  ProjectionConfig projection;
};

struct SolveRecord {
  int n;
  double objective;
  double step_norm;
  int projection_iterations;
  double seconds;
};

struct SolveTrace {
  std::vector<SolveRecord> records;
  bool converged = false;

  void write_csv(std::ostream& out) const;
};

/// Momentum coefficient (tau_n - 1)/tau_{n+1} with tau_n = (n + a - 1)/a.
inline double momentum_coefficient(int n, double a) {
  return static_cast<double>(n - 1) / (static_cast<double>(n) + a);
}

struct SolveResult {
  DecisionPoint point;
  SolveTrace trace;
};

/// Projection non-convergence, carrying the partial trace and best iterate.
struct SolveFailure : std::runtime_error {
  DecisionPoint best;
  SolveTrace partial_trace;
  SolveFailure(const std::string& what, DecisionPoint b, SolveTrace t)
      : std::runtime_error(what), best(std::move(b)),
        partial_trace(std::move(t)) {}
};

/// Accelerated projected-gradient loop: v_n = u_n + coef (u_n - u_{n-1}),
/// u_{n+1} = P_C(v_n - gamma c).
SolveResult solve(const RobustProblem& problem, const SolverConfig& config,
                  const DecisionPoint* warm_start = nullptr);

inline Eigen::VectorXd extract_estimator(const DecisionPoint& u) {
  return u.theta();
}

/// Classical empirical-risk minimizer (uniform weights), by gradient descent
/// with backtracking; used as the non-robust baseline and as a test oracle.
Eigen::VectorXd fit_erm(const Dataset& data, const LossModel& loss,
                        double grad_tol = 1e-8, int max_iter = 200000);

/// Classifier scores x_i' theta (rank-equivalent to predicted probability).
Eigen::VectorXd margins(const Dataset& data, const Eigen::VectorXd& theta);

}  // namespace dro

#endif  // DRO_SOLVER_HPP
