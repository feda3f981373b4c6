#pragma once

#include "granger/types.hpp"

namespace granger {

/// Survival function P(X > t) of a central chi-squared variable.
double chi2_sf(int dof, double t);

/// CDF of a central chi-squared variable.
double chi2_cdf(int dof, double t);

/// Quantile (inverse CDF) of a central chi-squared variable, p in [0, 1).
double chi2_quantile(int dof, double p);

/// Marcum Q-function of positive integer order: the survival function of
/// a noncentral chi-squared variable with 2*order degrees of freedom and
/// noncentrality a^2, evaluated at b^2. Absolute accuracy <= 1e-10.
double marcum_q(int order, double a, double b);

/// Survival function P(X > t) of a noncentral chi-squared variable.
/// Evaluated by a route independent of marcum_q (lower-gamma series /
/// continued fraction instead of the upper-tail ladder) so the two can
/// cross-check each other.
double noncentral_chi2_sf(int dof, double noncentrality, double t);

/// CDF companion of noncentral_chi2_sf.
double noncentral_chi2_cdf(int dof, double noncentrality, double t);

/// Smallest threshold lambda with P(T > lambda | H0) <= alpha, where T is
/// the whitened-norm statistic of the given order and field convention.
/// alpha in (0, 1]; alpha = 1 gives 0.
double threshold_for_pfa(int order, double alpha, Field field = Field::kComplex);

/// Detection probability Q_order(sqrt(kappa), sqrt(lambda)).
double predicted_pd(int order, double kappa, double lambda);

/// Detection probability for an arbitrary dof convention: even dof uses
/// the integer-order Marcum Q, odd dof falls back to the noncentral
/// chi-squared survival function.
double detection_probability(int dof, double kappa, double lambda);

}  // namespace granger
