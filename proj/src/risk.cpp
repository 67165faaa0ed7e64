#include "dro/risk.hpp"

#include <cmath>
#include <stdexcept>

namespace dro {

SimplexWeights::SimplexWeights(Vector weights) : p(std::move(weights)) {
  if (p.size() == 0) throw std::invalid_argument("SimplexWeights: empty");
  if ((p.array() <= 0.0).any())
    throw std::invalid_argument("SimplexWeights: entries must be positive");
  if (std::abs(p.sum() - 1.0) > 1e-12)
    throw std::invalid_argument("SimplexWeights: entries must sum to 1");
}

SimplexWeights SimplexWeights::uniform(Eigen::Index n) {
  return SimplexWeights(Vector::Constant(n, 1.0 / static_cast<double>(n)));
}

double phi_divergence(const DivergenceFamily& family, const Vector& q,
                      const SimplexWeights& p) {
  double d = 0.0;
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    double term = p.p[i] * family.phi(q[i] / p.p[i]);
    if (std::isinf(term)) return kInf;
    d += term;
  }
  return d;
}

ScalarMinimum golden_section_minimize(const std::function<double(double)>& f,
                                      double a, double b, double tol,
                                      int max_iter) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  int it = 0;
  while (b - a > tol && it < max_iter) {
    // +inf at both probes: the finite region of our evaluators lies to the
    // right of the conjugate's domain wall, so shrink from the left.
    bool both_inf = std::isinf(f1) && std::isinf(f2);
    if (f1 <= f2 && !both_inf) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = f(x2);
    }
    ++it;
  }
  double xm = 0.5 * (a + b);
  double fm = f(xm);
  if (f1 < fm) {
    xm = x1;
    fm = f1;
  }
  if (f2 < fm) {
    xm = x2;
    fm = f2;
  }
  return {xm, fm};
}

namespace {

// Inner minimization over mu of mu + sum_i w_i phi_star(x_i - mu).
// The minimizer lies in the convex hull of the data for nondecreasing
// phi_star, hence the [min - 1, max + 1] bracket.
double min_over_mu(const Vector& x, const Vector& w,
                   const DivergenceFamily& family, double tol) {
  double lo = x.minCoeff() - 1.0;
  double hi = x.maxCoeff() + 1.0;
  auto h = [&](double mu) {
    double v = mu;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      double t = phi_conjugate(family, x[i] - mu);
      if (std::isinf(t)) return kInf;
      v += w[i] * t;
    }
    return v;
  };
  ScalarMinimum m = golden_section_minimize(h, lo, hi, tol);
  if (std::isinf(m.value))
    throw std::runtime_error("risk evaluator: inner search did not converge");
  return m.value;
}

}  // namespace

double risk_divergence_penalty(const Vector& x, const SimplexWeights& p,
                               const DivergenceFamily& family, double lambda0) {
  if (!(lambda0 > 0.0))
    throw std::invalid_argument("risk_divergence_penalty: lambda0 must be > 0");
  Vector scaled = x / lambda0;
  return lambda0 * min_over_mu(scaled, p.p, family, 1e-8);
}

double risk_divergence_ball(const Vector& x, const SimplexWeights& p,
                            const DivergenceFamily& family, double eps) {
  if (!(eps > 0.0))
    throw std::invalid_argument("risk_divergence_ball: eps must be > 0");
  double spread = x.maxCoeff() - x.minCoeff();
  double lambda_max = spread / eps + 1.0;
  auto g = [&](double lambda) {
    if (lambda <= 0.0) return x.maxCoeff();  // lsc convention endpoint
    double lo = x.minCoeff() - 1.0;
    double hi = x.maxCoeff() + 1.0;
    auto h = [&](double mu) {
      double v = mu;
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        double t = perspective_conjugate(family, lambda, x[i] - mu);
        if (std::isinf(t)) return kInf;
        v += p.p[i] * t;
      }
      return v;
    };
    ScalarMinimum inner = golden_section_minimize(h, lo, hi, 1e-8);
    return lambda * eps + inner.value;
  };
  ScalarMinimum outer = golden_section_minimize(g, 0.0, lambda_max, 1e-8);
  double best = std::min(outer.value, std::min(g(0.0), g(lambda_max)));
  if (std::isinf(best))
    throw std::runtime_error("risk_divergence_ball: search did not converge");
  return best;
}

double risk_bruteforce(const Vector& x, const SimplexWeights& p,
                       const std::function<double(const Vector&)>& alpha,
                       double grid_step) {
  const int n = static_cast<int>(x.size());
  if (n > 5)
    throw std::invalid_argument("risk_bruteforce: N <= 5 only (exponential)");
  if (!(grid_step > 0.0))
    throw std::invalid_argument("risk_bruteforce: grid_step must be > 0");
  const int m = std::max<int>(1, static_cast<int>(std::llround(1.0 / grid_step)));
  double best = -kInf;
  Vector q(n);
  detail::simplex_grid_scan(n, m, [&](const int* counts) {
    for (int i = 0; i < n; ++i) q[i] = static_cast<double>(counts[i]) / m;
    double a = alpha(q);
    if (std::isinf(a)) return;
    double v = q.dot(x) - a;
    if (v > best) best = v;
  });
  return best;
}

std::function<double(const Vector&)> divergence_ball_indicator(
    const DivergenceFamily& family, const SimplexWeights& p, double eps) {
  return [family, p, eps](const Vector& q) {
    return phi_divergence(family, q, p) <= eps ? 0.0 : kInf;
  };
}

std::function<double(const Vector&)> divergence_penalty_alpha(
    const DivergenceFamily& family, const SimplexWeights& p, double lambda0) {
  return [family, p, lambda0](const Vector& q) {
    return lambda0 * phi_divergence(family, q, p);
  };
}

}  // namespace dro
