#include "dro/divergence.hpp"

namespace dro {

namespace {

// exp with the exponent capped; beyond the cap the conjugate is treated as
// +inf (it is extended-real valued anyway).
double guarded_exp(double s) {
  if (s > 700.0) return kInf;
  return std::exp(s);
}

}  // namespace

DivergenceFamily kl_family() {
  DivergenceFamily f;
  f.name = "kl";
  f.phi = [](double t) {
    if (t < 0.0) return kInf;
    if (t == 0.0) return 1.0;
    return t * std::log(t) - t + 1.0;
  };
  f.phi_star = [](double s) {
    double e = guarded_exp(s);
    return std::isinf(e) ? kInf : e - 1.0;
  };
  f.phi_star_subgrad = [](double s) { return guarded_exp(s); };
  f.phi_star_domain_sup = kInf;
  return f;
}

DivergenceFamily burg_family() {
  DivergenceFamily f;
  f.name = "burg";
  f.phi = [](double t) {
    if (t <= 0.0) return kInf;
    return -std::log(t) + t - 1.0;
  };
  f.phi_star = [](double s) { return s < 1.0 ? -std::log1p(-s) : kInf; };
  f.phi_star_subgrad = [](double s) { return 1.0 / (1.0 - s); };
  f.phi_star_domain_sup = 1.0;
  return f;
}

DivergenceFamily chi2_distance_family() {
  DivergenceFamily f;
  f.name = "chi2";
  f.phi = [](double t) {
    if (t <= 0.0) return kInf;
    double d = t - 1.0;
    return d * d / t;
  };
  f.phi_star = [](double s) {
    return s < 1.0 ? 2.0 - 2.0 * std::sqrt(1.0 - s) : kInf;
  };
  f.phi_star_subgrad = [](double s) { return 1.0 / std::sqrt(1.0 - s); };
  f.phi_star_domain_sup = 1.0;
  return f;
}

DivergenceFamily modified_chi2_family() {
  DivergenceFamily f;
  f.name = "modified_chi2";
  f.phi = [](double t) {
    if (t < 0.0) return kInf;
    double d = t - 1.0;
    return d * d;
  };
  f.phi_star = [](double s) {
    if (s < -2.0) return -1.0;
    return s + 0.25 * s * s;
  };
  f.phi_star_subgrad = [](double s) {
    if (s < -2.0) return 0.0;
    return 1.0 + 0.5 * s;
  };
  f.phi_star_domain_sup = kInf;
  return f;
}

DivergenceFamily hellinger_family() {
  DivergenceFamily f;
  f.name = "hellinger";
  f.phi = [](double t) {
    if (t < 0.0) return kInf;
    double d = std::sqrt(t) - 1.0;
    return d * d;
  };
  f.phi_star = [](double s) { return s < 1.0 ? s / (1.0 - s) : kInf; };
  f.phi_star_subgrad = [](double s) {
    double d = 1.0 - s;
    return 1.0 / (d * d);
  };
  f.phi_star_domain_sup = 1.0;
  return f;
}

DivergenceFamily chi_order_family(double theta) {
  if (!(theta > 1.0))
    throw std::invalid_argument("chi_order_family: theta must be > 1");
  DivergenceFamily f;
  f.name = "chi_order";
  f.shape_param = theta;
  f.phi = [theta](double t) {
    if (t < 0.0) return kInf;
    return std::pow(std::abs(t - 1.0), theta);
  };
  // The stationary point leaves [0, +inf) when s <= -theta; there the sup is
  // attained at t = 0 with value -phi(0) = -1.
  f.phi_star = [theta](double s) {
    if (s <= -theta) return -1.0;
    return s + (theta - 1.0) *
                   std::pow(std::abs(s) / theta, theta / (theta - 1.0));
  };
  f.phi_star_subgrad = [theta](double s) {
    if (s <= -theta) return 0.0;
    double m = std::pow(std::abs(s) / theta, 1.0 / (theta - 1.0));
    return s >= 0.0 ? 1.0 + m : 1.0 - m;
  };
  f.phi_star_domain_sup = kInf;
  return f;
}

DivergenceFamily variation_family() {
  DivergenceFamily f;
  f.name = "variation";
  f.phi = [](double t) {
    if (t < 0.0) return kInf;
    return std::abs(t - 1.0);
  };
  f.phi_star = [](double s) {
    if (s <= -1.0) return -1.0;
    if (s <= 1.0) return s;
    return kInf;
  };
  f.phi_star_subgrad = [](double s) { return s < -1.0 ? 0.0 : 1.0; };
  // phi_star(1) = 1 is finite (closed domain); +inf only beyond 1.
  f.phi_star_domain_sup = 1.0;
  return f;
}

DivergenceFamily cressie_read_family(double theta) {
  if (!(theta > 0.0) || theta == 1.0)
    throw std::invalid_argument(
        "cressie_read_family: theta must be > 0 and != 1");
  DivergenceFamily f;
  f.name = "cressie_read";
  f.shape_param = theta;
  f.phi = [theta](double t) {
    if (t < 0.0) return kInf;
    return (1.0 - theta + theta * t - std::pow(t, theta)) /
           (theta * (1.0 - theta));
  };
  double expo = theta / (theta - 1.0);
  if (theta > 1.0) {
    // Kink at s = -1/(theta-1): below it the sup is attained at t = 0.
    double kink = -1.0 / (theta - 1.0);
    f.phi_star = [theta, expo, kink](double s) {
      if (s <= kink) return -1.0 / theta;
      return (std::pow(1.0 + s * (theta - 1.0), expo) - 1.0) / theta;
    };
    f.phi_star_subgrad = [theta, kink](double s) {
      if (s <= kink) return 0.0;
      return std::pow(1.0 + s * (theta - 1.0), 1.0 / (theta - 1.0));
    };
    f.phi_star_domain_sup = kInf;
  } else {
    // 0 < theta < 1: phi grows linearly with slope 1/(1-theta), so the
    // conjugate blows up at s = 1/(1-theta).
    double sup = 1.0 / (1.0 - theta);
    f.phi_star = [theta, expo, sup](double s) {
      if (s >= sup) return kInf;
      return (std::pow(1.0 - s * (1.0 - theta), expo) - 1.0) / theta;
    };
    f.phi_star_subgrad = [theta](double s) {
      return std::pow(1.0 - s * (1.0 - theta), 1.0 / (theta - 1.0));
    };
    f.phi_star_domain_sup = sup;
  }
  return f;
}

DivergenceFamily avar_family(double beta) {
  if (!(beta >= 0.0 && beta < 1.0))
    throw std::invalid_argument("avar_family: beta must be in [0, 1)");
  DivergenceFamily f;
  f.name = "avar";
  f.shape_param = beta;
  double cap = 1.0 / (1.0 - beta);
  f.phi = [cap](double t) { return (t >= 0.0 && t <= cap) ? 0.0 : kInf; };
  f.phi_star = [cap](double s) { return s >= 0.0 ? cap * s : 0.0; };
  f.phi_star_subgrad = [cap](double s) { return s >= 0.0 ? cap : 0.0; };
  f.phi_star_domain_sup = kInf;
  return f;
}

DivergenceFamily family_from_name(const std::string& name,
                                  std::optional<double> param) {
  if (name == "kl") return kl_family();
  if (name == "burg") return burg_family();
  if (name == "chi2") return chi2_distance_family();
  if (name == "modified_chi2" || name == "mchi2") return modified_chi2_family();
  if (name == "hellinger") return hellinger_family();
  if (name == "variation") return variation_family();
  if (name == "chi_order") {
    if (!param) throw std::invalid_argument("chi_order requires a parameter");
    return chi_order_family(*param);
  }
  if (name == "cressie_read") {
    if (!param)
      throw std::invalid_argument("cressie_read requires a parameter");
    return cressie_read_family(*param);
  }
  if (name == "avar") {
    if (!param) throw std::invalid_argument("avar requires a parameter");
    return avar_family(*param);
  }
  throw std::invalid_argument("unknown divergence family: " + name);
}

}  // namespace dro
