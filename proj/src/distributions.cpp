#include "granger/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace granger {
namespace {

// Unaccounted Poisson mixture mass allowed at truncation. Every mixture
// term is a probability, so the truncation error is bounded by this.
constexpr double kTailMass = 1e-14;

void require_finite_nonneg(double v, const char* name) {
  if (!std::isfinite(v) || v < 0.0) {
    throw std::invalid_argument(std::string(name) + " must be finite and >= 0");
  }
}

// e^{-y} y^k / k!, computed in log space.
double poisson_pmf(int k, double y) {
  if (y == 0.0) return k == 0 ? 1.0 : 0.0;
  return std::exp(-y + k * std::log(y) - std::lgamma(double(k) + 1.0));
}

// Upper regularized gamma Q(s, y) for integer s >= 1, i.e. the sum of the
// first s Poisson(y) terms. Accumulated outward from the largest term so
// it stays accurate for any y.
double gamma_q_int(int s, double y) {
  if (y <= 0.0) return 1.0;
  const int peak = std::min(s - 1, int(y));
  const double t0 = poisson_pmf(peak, y);
  if (t0 == 0.0) return 0.0;  // entire sum underflows
  double sum = 0.0;
  double t = t0;
  for (int i = peak; i >= 0; --i) {
    sum += t;
    t *= double(i) / y;
    if (t < sum * 1e-18) break;
  }
  t = t0;
  for (int i = peak + 1; i <= s - 1; ++i) {
    t *= y / double(i);
    sum += t;
    if (t < sum * 1e-18) break;
  }
  return std::min(sum, 1.0);
}

// Lower regularized gamma P(s, y) by power series; effective for y < s + 1.
double gamma_p_series(double s, double y) {
  double ap = s;
  double del = 1.0 / s;
  double sum = del;
  for (int i = 0; i < 100000; ++i) {
    ap += 1.0;
    del *= y / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * 1e-17) break;
  }
  const double log_prefix = -y + s * std::log(y) - std::lgamma(s);
  return std::min(1.0, sum * std::exp(log_prefix));
}

// Upper regularized gamma Q(s, y) by modified Lentz continued fraction;
// effective for y >= s + 1.
double gamma_q_contfrac(double s, double y) {
  constexpr double kFpMin = 1e-300;
  double b = y + 1.0 - s;
  double c = 1.0 / kFpMin;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 100000; ++i) {
    const double an = -double(i) * (double(i) - s);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = b + an / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  const double log_prefix = -y + s * std::log(y) - std::lgamma(s);
  return std::min(1.0, h * std::exp(log_prefix));
}

double gamma_p(double s, double y) {
  if (y <= 0.0) return 0.0;
  return y < s + 1.0 ? gamma_p_series(s, y) : 1.0 - gamma_q_contfrac(s, y);
}

double gamma_q(double s, double y) {
  if (y <= 0.0) return 1.0;
  return y < s + 1.0 ? 1.0 - gamma_p_series(s, y) : gamma_q_contfrac(s, y);
}

void check_dof(int dof) {
  if (dof < 1) throw std::invalid_argument("dof must be a positive integer");
}

}  // namespace

double chi2_sf(int dof, double t) {
  check_dof(dof);
  require_finite_nonneg(t, "t");
  return gamma_q(0.5 * dof, 0.5 * t);
}

double chi2_cdf(int dof, double t) {
  check_dof(dof);
  require_finite_nonneg(t, "t");
  return gamma_p(0.5 * dof, 0.5 * t);
}

double chi2_quantile(int dof, double p) {
  check_dof(dof);
  if (!std::isfinite(p) || p < 0.0 || p >= 1.0) {
    throw std::invalid_argument("p must lie in [0, 1)");
  }
  if (p == 0.0) return 0.0;
  double lo = 0.0;
  double hi = dof + 16.0 * std::sqrt(double(dof)) + 16.0;
  while (chi2_cdf(dof, hi) < p) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (chi2_cdf(dof, mid) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo < 1e-13 * (1.0 + hi)) break;
  }
  return 0.5 * (lo + hi);
}

double marcum_q(int order, double a, double b) {
  if (order < 1) throw std::invalid_argument("marcum_q order must be >= 1");
  require_finite_nonneg(a, "a");
  require_finite_nonneg(b, "b");
  if (b == 0.0) return 1.0;
  const double y = 0.5 * b * b;  // gamma-tail threshold
  const double x = 0.5 * a * a;  // Poisson rate
  if (x == 0.0) return gamma_q_int(order, y);

  // Poisson mixture of integer-shape upper gamma tails, summed outward
  // from the Poisson mode; the gamma tails follow by a one-term ladder.
  const int j0 = int(x);
  const double p0 = poisson_pmf(j0, x);
  const double q0 = gamma_q_int(order + j0, y);
  double sum = p0 * q0;
  double mass = p0;

  double pj = p0;
  double qj = q0;
  double ladder = poisson_pmf(order + j0, y);  // term linking Q(s) -> Q(s+1)
  for (int j = j0 + 1; mass < 1.0 - kTailMass && j < j0 + 1000000; ++j) {
    pj *= x / double(j);
    qj = std::min(qj + ladder, 1.0);
    ladder *= y / double(order + j);
    sum += pj * qj;
    mass += pj;
  }

  pj = p0;
  qj = q0;
  ladder = poisson_pmf(order + j0 - 1, y);  // term linking Q(s+1) -> Q(s)
  for (int j = j0 - 1; j >= 0 && mass < 1.0 - kTailMass; --j) {
    pj *= double(j + 1) / x;
    qj = std::max(qj - ladder, 0.0);
    ladder *= double(order + j) / y;
    sum += pj * qj;
    mass += pj;
  }
  return std::clamp(sum, 0.0, 1.0);
}

double noncentral_chi2_cdf(int dof, double noncentrality, double t) {
  check_dof(dof);
  require_finite_nonneg(noncentrality, "noncentrality");
  require_finite_nonneg(t, "t");
  if (t == 0.0) return 0.0;
  const double shape = 0.5 * dof;
  const double y = 0.5 * t;
  const double x = 0.5 * noncentrality;
  if (x == 0.0) return gamma_p(shape, y);

  const int j0 = int(x);
  const double p0 = poisson_pmf(j0, x);
  double sum = p0 * gamma_p(shape + j0, y);
  double mass = p0;

  double pj = p0;
  for (int j = j0 + 1; mass < 1.0 - kTailMass && j < j0 + 1000000; ++j) {
    pj *= x / double(j);
    sum += pj * gamma_p(shape + j, y);
    mass += pj;
  }
  pj = p0;
  for (int j = j0 - 1; j >= 0 && mass < 1.0 - kTailMass; --j) {
    pj *= double(j + 1) / x;
    sum += pj * gamma_p(shape + j, y);
    mass += pj;
  }
  return std::clamp(sum, 0.0, 1.0);
}

double noncentral_chi2_sf(int dof, double noncentrality, double t) {
  return std::clamp(1.0 - noncentral_chi2_cdf(dof, noncentrality, t), 0.0, 1.0);
}

double threshold_for_pfa(int order, double alpha, Field field) {
  if (order < 1) throw std::invalid_argument("order must be >= 1");
  if (!std::isfinite(alpha) || alpha <= 0.0 || alpha > 1.0) {
    throw std::invalid_argument("alpha must lie in (0, 1]");
  }
  if (alpha == 1.0) return 0.0;
  const int dof = chi2_dof(order, field);
  const auto sf = [&](double lambda) {
    return dof % 2 == 0 ? marcum_q(dof / 2, 0.0, std::sqrt(lambda))
                        : noncentral_chi2_sf(dof, 0.0, lambda);
  };
  double lo = 0.0;
  double hi = 2.0 * dof + 8.0;
  while (sf(hi) > alpha) hi *= 2.0;
  double mid = hi;
  for (int i = 0; i < 300; ++i) {
    mid = 0.5 * (lo + hi);
    const double q = sf(mid);
    if (std::abs(q - alpha) <= 1e-11) break;
    if (q > alpha) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return mid;
}

double predicted_pd(int order, double kappa, double lambda) {
  require_finite_nonneg(kappa, "kappa");
  require_finite_nonneg(lambda, "lambda");
  return marcum_q(order, std::sqrt(kappa), std::sqrt(lambda));
}

double detection_probability(int dof, double kappa, double lambda) {
  check_dof(dof);
  if (dof % 2 == 0) return predicted_pd(dof / 2, kappa, lambda);
  require_finite_nonneg(kappa, "kappa");
  require_finite_nonneg(lambda, "lambda");
  return noncentral_chi2_sf(dof, kappa, lambda);
}

}  // namespace granger
