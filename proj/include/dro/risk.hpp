#ifndef DRO_RISK_HPP
#define DRO_RISK_HPP

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <functional>

#include "dro/divergence.hpp"

namespace dro {

using Vector = Eigen::VectorXd;

/// Probability weights on N scenarios.  Entries are strictly positive and sum
/// to one (the reference distribution charges all points).
struct SimplexWeights {
  Vector p;

  explicit SimplexWeights(Vector weights);
  static SimplexWeights uniform(Eigen::Index n);
  Eigen::Index size() const { return p.size(); }
};

/// D_phi(q, p) = sum_i p_i phi(q_i / p_i).
double phi_divergence(const DivergenceFamily& family, const Vector& q,
                      const SimplexWeights& p);

/// Derivative-free minimization of a (quasi-)convex extended-real function on
/// [a, b].  Robust to kinks and to +inf plateaus at the bracket ends.
struct ScalarMinimum {
  double x;
  double value;
};
ScalarMinimum golden_section_minimize(const std::function<double(double)>& f,
                                      double a, double b, double tol = 1e-10,
                                      int max_iter = 200);

/// Risk with divergence penalty lambda0 * D_phi(q, p):
///   lambda0 * min_mu [ mu + sum_i p_i phi_star(x_i / lambda0 - mu) ].
double risk_divergence_penalty(const Vector& x, const SimplexWeights& p,
                               const DivergenceFamily& family, double lambda0);

/// Risk over the divergence ball { q : D_phi(q, p) <= eps }:
///   min_{lambda >= 0, mu} lambda*eps + mu
///     + sum_i p_i lambda phi_star((x_i - mu) / lambda),
/// with the lambda = 0 endpoint handled by the lsc convention.
double risk_divergence_ball(const Vector& x, const SimplexWeights& p,
                            const DivergenceFamily& family, double eps);

namespace detail {

/// Enumerates all integer count vectors (k_1, ..., k_N) with sum m and calls
/// visitor(counts).  Grid points are q_i = k_i / m on the simplex.
template <class Visitor>
void simplex_grid_scan(int n, int m, Visitor&& visit) {
  std::array<int, 8> counts{};
  auto rec = [&](auto&& self, int coord, int rem) -> void {
    if (coord == n - 1) {
      counts[coord] = rem;
      visit(counts.data());
      return;
    }
    for (int k = 0; k <= rem; ++k) {
      counts[coord] = k;
      self(self, coord + 1, rem - k);
    }
  };
  rec(rec, 0, m);
}

}  // namespace detail

/// Direct evaluation of sup_{q in simplex} <q, x> - alpha(q) over a
/// barycentric grid of mesh grid_step.  Exponential in N; N <= 5 only.
double risk_bruteforce(const Vector& x, const SimplexWeights& p,
                       const std::function<double(const Vector&)>& alpha,
                       double grid_step);

/// alpha(q) = indicator of the divergence ball of radius eps around p.
std::function<double(const Vector&)> divergence_ball_indicator(
    const DivergenceFamily& family, const SimplexWeights& p, double eps);

/// alpha(q) = lambda0 * D_phi(q, p).
std::function<double(const Vector&)> divergence_penalty_alpha(
    const DivergenceFamily& family, const SimplexWeights& p, double lambda0);

}  // namespace dro

#endif  // DRO_RISK_HPP
