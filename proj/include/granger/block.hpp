#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <utility>

#include "granger/second_order.hpp"
#include "granger/types.hpp"

namespace granger {

/// Regression problem built from a window of N observed sample pairs:
/// one row per target x[n], n = K+1..N, each row being the adjoint of the
/// stacked regressor [x_K[n-1]; y_K[n-1]].
template <class Scalar>
struct DesignMatrix {
  Eigen::MatrixX<Scalar> rows;     ///< (N-K) x 2K
  Eigen::VectorX<Scalar> targets;  ///< x[K+1..N]
  int order = 0;
};

template <class Scalar>
DesignMatrix<Scalar> assemble(const Eigen::VectorX<Scalar>& x,
                              const Eigen::VectorX<Scalar>& y, int order,
                              int n_window) {
  if (order < 1) throw std::invalid_argument("order must be >= 1");
  if (n_window < order + 1) {
    throw std::invalid_argument("window must contain at least K+1 samples");
  }
  if (x.size() < n_window || y.size() < n_window) {
    throw std::invalid_argument("insufficient samples for the requested window");
  }
  const int k = order;
  const int m = n_window - k;
  DesignMatrix<Scalar> design;
  design.order = k;
  design.rows.resize(m, 2 * k);
  design.targets.resize(m);
  for (int r = 0; r < m; ++r) {
    const int n = k + r;  // 0-based target index
    for (int j = 0; j < k; ++j) {
      design.rows(r, j) = Eigen::numext::conj(x(n - 1 - j));
      design.rows(r, k + j) = Eigen::numext::conj(y(n - 1 - j));
    }
    design.targets(r) = x(n);
  }
  return design;
}

/// Sample normal equations: Phi = A^H A / (N-K) and the cross vector
/// psi accumulating regressor times conjugated target.
template <class Scalar>
std::pair<Eigen::MatrixX<Scalar>, Eigen::VectorX<Scalar>> normal_equations(
    const DesignMatrix<Scalar>& design) {
  const auto m = design.rows.rows();
  if (m == 0) throw std::invalid_argument("empty design matrix");
  Eigen::MatrixX<Scalar> phi =
      (design.rows.adjoint() * design.rows) / double(m);
  phi = Eigen::MatrixX<Scalar>(0.5 * (phi + phi.adjoint()));
  Eigen::VectorX<Scalar> psi =
      (design.rows.adjoint() * design.targets.conjugate()) / double(m);
  return {std::move(phi), std::move(psi)};
}

namespace detail {

constexpr double kConditionLimit = 1e12;

template <class Scalar>
void require_well_conditioned(const Eigen::MatrixX<Scalar>& phi) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixX<Scalar>> eig(
      phi, Eigen::EigenvaluesOnly);
  const double ev_min = eig.eigenvalues().minCoeff();
  const double ev_max = eig.eigenvalues().maxCoeff();
  if (!(ev_min > 0.0) || ev_max / ev_min > kConditionLimit) {
    throw std::runtime_error(
        "sample covariance is singular or ill-conditioned: "
        "insufficient excitation in the window");
  }
}

}  // namespace detail

/// LS weights solving Phi w = psi by a guarded symmetric factorization.
template <class Scalar>
Eigen::VectorX<Scalar> ls_weights(const Eigen::MatrixX<Scalar>& phi,
                                  const Eigen::VectorX<Scalar>& psi) {
  detail::require_well_conditioned(phi);
  return phi.ldlt().solve(psi);
}

/// Degrees-of-freedom corrected residual power of the fitted regression.
template <class Scalar>
double residual_variance(const DesignMatrix<Scalar>& design,
                         const Eigen::VectorX<Scalar>& w_hat) {
  const auto m = design.rows.rows();
  const auto p = design.rows.cols();
  if (m <= p) {
    throw std::invalid_argument(
        "residual variance needs more rows than regressors (N-K > 2K)");
  }
  // Prediction of x[n] is w^H z[n-1] = conj(row * w).
  const Eigen::VectorX<Scalar> resid =
      design.targets - (design.rows * w_hat).conjugate();
  return resid.squaredNorm() / double(m - p);
}

/// Lower-right K x K block of phi^{-1}.
template <class Scalar>
Eigen::MatrixX<Scalar> sigma_from_inverse(const Eigen::MatrixX<Scalar>& phi) {
  const int k = int(phi.rows()) / 2;
  const Eigen::MatrixX<Scalar> inv =
      phi.ldlt().solve(Eigen::MatrixX<Scalar>::Identity(phi.rows(), phi.rows()));
  Eigen::MatrixX<Scalar> sig = inv.block(k, k, k, k);
  return Eigen::MatrixX<Scalar>(0.5 * (sig + sig.adjoint()));
}

/// Same block via the Schur complement (Phi_yy - Phi_yx Phi_xx^{-1} Phi_xy)^{-1};
/// algebraically equal to sigma_from_inverse.
template <class Scalar>
Eigen::MatrixX<Scalar> sigma_schur(const Eigen::MatrixX<Scalar>& phi) {
  const int k = int(phi.rows()) / 2;
  const auto pxx = phi.block(0, 0, k, k);
  const auto pxy = phi.block(0, k, k, k);
  const auto pyx = phi.block(k, 0, k, k);
  const auto pyy = phi.block(k, k, k, k);
  const Eigen::MatrixX<Scalar> schur =
      pyy - pyx * Eigen::MatrixX<Scalar>(pxx).ldlt().solve(
                      Eigen::MatrixX<Scalar>(pxy));
  Eigen::MatrixX<Scalar> sig =
      Eigen::MatrixX<Scalar>(schur).ldlt().solve(
          Eigen::MatrixX<Scalar>::Identity(k, k));
  return Eigen::MatrixX<Scalar>(0.5 * (sig + sig.adjoint()));
}

/// Everything the block detector extracts from one window of N samples.
template <class Scalar>
struct BlockEstimate {
  int order = 0;
  int n_window = 0;
  int dof = 0;
  Eigen::MatrixX<Scalar> phi;
  Eigen::VectorX<Scalar> psi;
  Eigen::VectorX<Scalar> w_hat;      ///< stacked (w_x; w_y)
  Eigen::MatrixX<Scalar> sigma_hat;  ///< plug-in error shape
  double sigma2_phi_hat = 0.0;
  double t_plugin = 0.0;

  Eigen::VectorX<Scalar> w_x() const { return w_hat.head(order); }
  Eigen::VectorX<Scalar> w_y() const { return w_hat.tail(order); }
};

namespace detail {

template <class Scalar>
double whitened_norm(const Eigen::VectorX<Scalar>& w_y,
                     const Eigen::MatrixX<Scalar>& sigma) {
  Eigen::LDLT<Eigen::MatrixX<Scalar>> ldlt(sigma);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    throw std::runtime_error("error-shape matrix is not positive definite");
  }
  const Eigen::VectorX<Scalar> solved = ldlt.solve(w_y);
  return std::max(0.0, Eigen::numext::real(Scalar(w_y.dot(solved))));
}

}  // namespace detail

/// T_N with an explicitly supplied error shape and prediction error power.
template <class Scalar>
double test_statistic(const BlockEstimate<Scalar>& est,
                      const Eigen::MatrixX<Scalar>& sigma, double sigma2_phi) {
  if (!(sigma2_phi > 0.0)) {
    throw std::invalid_argument("sigma2_phi must be > 0");
  }
  const double scale = field_scale(field_of<Scalar>());
  const double quad = detail::whitened_norm<Scalar>(est.w_y(), sigma);
  return scale * double(est.n_window - est.order) * quad / sigma2_phi;
}

/// Plug-in T_N: Sigma and sigma_phi^2 estimated from the window itself.
template <class Scalar>
double test_statistic(const BlockEstimate<Scalar>& est) {
  return test_statistic(est, est.sigma_hat, est.sigma2_phi_hat);
}

/// Oracle T_N: whitening taken from exact model statistics.
template <class Scalar>
double test_statistic(const BlockEstimate<Scalar>& est,
                      const SecondOrderStats<Scalar>& stats) {
  return test_statistic(est, stats.sigma, stats.sigma2_phi);
}

/// Runs the full block pipeline on the first n_window samples of (x, y).
template <class Scalar>
BlockEstimate<Scalar> block_estimate(const Eigen::VectorX<Scalar>& x,
                                     const Eigen::VectorX<Scalar>& y, int order,
                                     int n_window) {
  // N - K > 2K rows are needed for a positive residual dof.
  if (n_window < 3 * order + 1) {
    throw std::invalid_argument("window too short for a plug-in block estimate");
  }
  const auto design = assemble(x, y, order, n_window);
  auto [phi, psi] = normal_equations(design);

  BlockEstimate<Scalar> est;
  est.order = order;
  est.n_window = n_window;
  est.dof = chi2_dof(order, field_of<Scalar>());
  est.w_hat = ls_weights(phi, psi);
  est.sigma_hat = sigma_from_inverse(phi);
  est.sigma2_phi_hat = residual_variance(design, est.w_hat);
  est.phi = std::move(phi);
  est.psi = std::move(psi);
  est.t_plugin = test_statistic(est);
  return est;
}

/// Log ratio of reduced (x past only) to full (x and y past) residual
/// powers; the classical prediction-error-ratio causality index.
template <class Scalar>
double gci(const Eigen::VectorX<Scalar>& x, const Eigen::VectorX<Scalar>& y,
           int order, int n_window) {
  const auto design = assemble(x, y, order, n_window);
  const auto m = design.rows.rows();

  DesignMatrix<Scalar> reduced;
  reduced.order = design.order;
  reduced.rows = design.rows.leftCols(order);
  reduced.targets = design.targets;

  auto [phi_full, psi_full] = normal_equations(design);
  auto [phi_red, psi_red] = normal_equations(reduced);
  const auto w_full = ls_weights(phi_full, psi_full);
  const auto w_red = ls_weights(phi_red, psi_red);

  // Maximum-likelihood style variances: common denominator, so the nested
  // residual ordering keeps the ratio >= 1.
  const double rss_full =
      (design.targets - (design.rows * w_full).conjugate()).squaredNorm();
  const double rss_red =
      (reduced.targets - (reduced.rows * w_red).conjugate()).squaredNorm();
  if (!(rss_full > 0.0)) {
    throw std::runtime_error("full-model residual is zero; index undefined");
  }
  return std::log((rss_red / double(m)) / (rss_full / double(m)));
}

}  // namespace granger
