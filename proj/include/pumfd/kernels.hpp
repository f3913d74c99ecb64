#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

#include "pumfd/errors.hpp"

namespace pumfd {

enum class KernelFamily { GA, MQ, IMQ, TPS, M4, M2, W4, W2 };

/// Radial kernel phi(eps * r). For TPS the shape parameter is ignored and
/// `nu` selects the smoothness order.
struct KernelSpec {
  KernelFamily family = KernelFamily::IMQ;
  double epsilon = 1.0;
  int nu = 1;

  KernelSpec() = default;
  KernelSpec(KernelFamily f, double eps, int nu_ = 1) : family(f), epsilon(eps), nu(nu_) {
    if (f == KernelFamily::TPS) {
      if (nu_ < 1) throw ConfigError("TPS requires nu >= 1");
    } else if (!(eps > 0.0) || !std::isfinite(eps)) {
      throw ConfigError("kernel shape parameter must be positive, got " + std::to_string(eps));
    }
  }
};

inline bool is_positive_definite(KernelFamily f) {
  return f != KernelFamily::MQ && f != KernelFamily::TPS;
}

inline bool is_compactly_supported(KernelFamily f) {
  return f == KernelFamily::W2 || f == KernelFamily::W4;
}

/// Order of conditional positive definiteness (0 for PD kernels).
inline int cpd_order(const KernelSpec& k) {
  switch (k.family) {
    case KernelFamily::MQ: return 1;
    case KernelFamily::TPS: return k.nu + 1;
    default: return 0;
  }
}

inline std::string_view to_string(KernelFamily f) {
  switch (f) {
    case KernelFamily::GA: return "ga";
    case KernelFamily::MQ: return "mq";
    case KernelFamily::IMQ: return "imq";
    case KernelFamily::TPS: return "tps";
    case KernelFamily::M4: return "m4";
    case KernelFamily::M2: return "m2";
    case KernelFamily::W4: return "w4";
    case KernelFamily::W2: return "w2";
  }
  return "?";
}

inline KernelFamily parse_kernel_family(std::string_view name) {
  for (auto f : {KernelFamily::GA, KernelFamily::MQ, KernelFamily::IMQ, KernelFamily::TPS,
                 KernelFamily::M4, KernelFamily::M2, KernelFamily::W4, KernelFamily::W2}) {
    if (to_string(f) == name) return f;
  }
  throw ConfigError("unknown kernel '" + std::string(name) + "'");
}

namespace detail {

// Profiles in the scaled variable s = eps * r. `d1` and `d2` are derivatives
// with respect to s; `g` is d1(s)/s with its analytic limit at s = 0.
struct Profile {
  double value;
  double d1;
  double d2;
  double g;
};

inline Profile profile(KernelFamily family, double s) {
  switch (family) {
    case KernelFamily::GA: {
      const double e = std::exp(-s * s);
      return {e, -2.0 * s * e, (4.0 * s * s - 2.0) * e, -2.0 * e};
    }
    case KernelFamily::MQ: {
      const double q = 1.0 + s * s;
      const double sq = std::sqrt(q);
      return {sq, s / sq, 1.0 / (q * sq), 1.0 / sq};
    }
    case KernelFamily::IMQ: {
      const double q = 1.0 + s * s;
      const double inv = 1.0 / std::sqrt(q);
      const double inv3 = inv / q;
      return {inv, -s * inv3, (2.0 * s * s - 1.0) * inv3 / q, -inv3};
    }
    case KernelFamily::M4: {
      const double e = std::exp(-s);
      return {e * (s * s + 3.0 * s + 3.0), -s * (s + 1.0) * e, (s * s - s - 1.0) * e,
              -(s + 1.0) * e};
    }
    case KernelFamily::M2: {
      const double e = std::exp(-s);
      return {e * (s + 1.0), -s * e, (s - 1.0) * e, -e};
    }
    case KernelFamily::W2: {
      if (s >= 1.0) return {0.0, 0.0, 0.0, 0.0};
      const double t = 1.0 - s;
      const double t2 = t * t;
      const double t3 = t2 * t;
      return {t2 * t2 * (4.0 * s + 1.0), -20.0 * s * t3, 20.0 * t2 * (4.0 * s - 1.0),
              -20.0 * t3};
    }
    case KernelFamily::W4: {
      if (s >= 1.0) return {0.0, 0.0, 0.0, 0.0};
      const double t = 1.0 - s;
      const double t4 = t * t * t * t;
      const double t5 = t4 * t;
      return {t5 * t * (35.0 * s * s + 18.0 * s + 3.0), -56.0 * s * t5 * (5.0 * s + 1.0),
              -56.0 * t4 * (1.0 + 4.0 * s - 35.0 * s * s), -56.0 * t5 * (5.0 * s + 1.0)};
    }
    case KernelFamily::TPS:
      break;
  }
  throw std::logic_error("profile() called for TPS");
}

// TPS in the unscaled radius: (-1)^(nu+1) r^(2nu) log r.
inline Profile tps_profile(int nu, double r) {
  const double sign = (nu % 2 == 1) ? 1.0 : -1.0;  // (-1)^(nu+1)
  if (r == 0.0) return {0.0, 0.0, 0.0, 0.0};
  const double lr = std::log(r);
  const double n2 = 2.0 * nu;
  const double r2m2 = std::pow(r, n2 - 2.0);
  return {sign * r2m2 * r * r * lr, sign * r2m2 * r * (n2 * lr + 1.0),
          sign * r2m2 * (n2 * (n2 - 1.0) * lr + 2.0 * n2 - 1.0), sign * r2m2 * (n2 * lr + 1.0)};
}

inline void require_nonnegative(double r) {
  if (!(r >= 0.0)) throw std::domain_error("kernel radius must be nonnegative");
}

inline void require_tps_derivative_domain(const KernelSpec& k, double r) {
  if (k.family == KernelFamily::TPS && r == 0.0)
    throw std::domain_error("TPS derivatives are singular at r = 0");
}

}  // namespace detail

inline double eval(const KernelSpec& k, double r) {
  detail::require_nonnegative(r);
  if (k.family == KernelFamily::TPS) return detail::tps_profile(k.nu, r).value;
  return detail::profile(k.family, k.epsilon * r).value;
}

inline double radial_d1(const KernelSpec& k, double r) {
  detail::require_nonnegative(r);
  detail::require_tps_derivative_domain(k, r);
  if (k.family == KernelFamily::TPS) return detail::tps_profile(k.nu, r).d1;
  return k.epsilon * detail::profile(k.family, k.epsilon * r).d1;
}

inline double radial_d2(const KernelSpec& k, double r) {
  detail::require_nonnegative(r);
  detail::require_tps_derivative_domain(k, r);
  if (k.family == KernelFamily::TPS) return detail::tps_profile(k.nu, r).d2;
  return k.epsilon * k.epsilon * detail::profile(k.family, k.epsilon * r).d2;
}

/// phi'(r) / r, so that grad phi(|x - c|) = grad_factor * (x - c). Equals
/// phi''(0) at the origin.
inline double grad_factor(const KernelSpec& k, double r) {
  detail::require_nonnegative(r);
  detail::require_tps_derivative_domain(k, r);
  if (k.family == KernelFamily::TPS) return detail::tps_profile(k.nu, r).g;
  return k.epsilon * k.epsilon * detail::profile(k.family, k.epsilon * r).g;
}

/// Laplacian of x -> phi(|x|) in `dim` dimensions: phi'' + (dim - 1) phi'/r.
inline double laplacian(const KernelSpec& k, double r, int dim = 2) {
  detail::require_nonnegative(r);
  detail::require_tps_derivative_domain(k, r);
  if (dim < 1 || dim > 3) throw std::domain_error("laplacian: dimension must be 1, 2 or 3");
  if (k.family == KernelFamily::TPS) {
    const auto p = detail::tps_profile(k.nu, r);
    return p.d2 + (dim - 1) * p.g;
  }
  const auto p = detail::profile(k.family, k.epsilon * r);
  return k.epsilon * k.epsilon * (p.d2 + (dim - 1) * p.g);
}

}  // namespace pumfd
