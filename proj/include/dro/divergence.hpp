#ifndef DRO_DIVERGENCE_HPP
#define DRO_DIVERGENCE_HPP

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

namespace dro {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// A phi-divergence family: the generator phi, its convex conjugate, one
/// element of the conjugate subdifferential, and the upper end of the
/// conjugate domain.  phi is finite only on a subset of [0, +inf);
/// phi(1) = 0 and phi >= 0.  phi_star is nondecreasing on its domain.
struct DivergenceFamily {
  std::string name;
  std::function<double(double)> phi;
  std::function<double(double)> phi_star;
  std::function<double(double)> phi_star_subgrad;  // right derivative at kinks
  double phi_star_domain_sup = kInf;  // phi_star = +inf at and beyond this
  std::optional<double> shape_param;  // theta (chi-order, Cressie-Read), beta (AVaR)
};

// Table rows.
DivergenceFamily kl_family();
DivergenceFamily burg_family();
DivergenceFamily chi2_distance_family();
DivergenceFamily modified_chi2_family();
DivergenceFamily hellinger_family();
DivergenceFamily chi_order_family(double theta);    // theta > 1
DivergenceFamily variation_family();
DivergenceFamily cressie_read_family(double theta); // theta > 0, theta != 1
DivergenceFamily avar_family(double beta);          // beta in [0, 1)

/// Lookup by name; `param` is required for the parametric families.
DivergenceFamily family_from_name(const std::string& name,
                                  std::optional<double> param = std::nullopt);

inline double phi_value(const DivergenceFamily& f, double t) { return f.phi(t); }

inline double phi_conjugate(const DivergenceFamily& f, double s) {
  if (s > f.phi_star_domain_sup) return kInf;
  return f.phi_star(s);  // families that blow up at the boundary return +inf
}

inline double phi_conjugate_subgrad(const DivergenceFamily& f, double s) {
  return f.phi_star_subgrad(s);
}

/// lambda * phi_star(s / lambda) for lambda > 0, extended at lambda = 0 by
/// the lsc convention: 0 if s <= 0, +inf otherwise.
inline double perspective_conjugate(const DivergenceFamily& f, double lambda,
                                    double s) {
  if (lambda < 0.0)
    throw std::domain_error("perspective_conjugate: lambda must be >= 0");
  if (lambda == 0.0) return s <= 0.0 ? 0.0 : kInf;
  return lambda * phi_conjugate(f, s / lambda);
}

}  // namespace dro

#endif  // DRO_DIVERGENCE_HPP
