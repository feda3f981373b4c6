#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <utility>

#include "granger/types.hpp"
#include "granger/var_model.hpp"

namespace granger {

namespace detail {

// Stationary covariance of the stacked state z[n] = [u_K[n]; v_K[n]],
// obtained from the discrete Lyapunov equation P = F P F^H + Q written as
// one linear system in vec(P). This is the joint Yule-Walker solve for all
// lags 0..K-1 at once; higher lags then follow from the correlation
// recursions.
template <class Scalar>
Eigen::MatrixXcd stacked_state_covariance(const VarModel<Scalar>& model) {
  const int k = model.order();
  const int d = 2 * k;
  Eigen::MatrixXcd f = Eigen::MatrixXcd::Zero(d, d);
  for (int j = 0; j < k; ++j) {
    f(0, j) = Eigen::numext::conj(std::complex<double>(model.a_uu(j)));
    f(0, k + j) = Eigen::numext::conj(std::complex<double>(model.a_uv(j)));
    f(k, k + j) = Eigen::numext::conj(std::complex<double>(model.a_vv(j)));
  }
  for (int i = 1; i < k; ++i) {
    f(i, i - 1) = 1.0;
    f(k + i, k + i - 1) = 1.0;
  }
  Eigen::MatrixXcd q = Eigen::MatrixXcd::Zero(d, d);
  q(0, 0) = model.sigma2_eta_u;
  q(k, k) = model.sigma2_eta_v;

  // vec(F P F^H) = (conj(F) (x) F) vec(P), column-major vec.
  const int d2 = d * d;
  Eigen::MatrixXcd lhs = Eigen::MatrixXcd::Identity(d2, d2);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      for (int p = 0; p < d; ++p) {
        for (int r = 0; r < d; ++r) {
          lhs(i + d * j, p + d * r) -= f(i, p) * Eigen::numext::conj(f(j, r));
        }
      }
    }
  }
  Eigen::VectorXcd rhs(d2);
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < d; ++i) rhs(i + d * j) = q(i, j);
  }
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(lhs);
  const Eigen::VectorXcd sol = lu.solve(rhs);
  if (!sol.allFinite()) {
    throw std::runtime_error("joint Yule-Walker system is singular");
  }
  Eigen::MatrixXcd cov(d, d);
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < d; ++i) cov(i, j) = sol(i + d * j);
  }
  return 0.5 * (cov + cov.adjoint());
}

template <class Scalar>
Scalar from_complex(const std::complex<double>& z) {
  if constexpr (is_complex_v<Scalar>) {
    return Scalar(z);
  } else {
    return Scalar(z.real());
  }
}

}  // namespace detail

/// Exact second-order description of a VarModel observed through additive
/// measurement noise: correlation sequences of the clean processes, the
/// joint regressor covariance of the noisy pair, the minimum mean squared
/// error regression weights, the prediction error power, the LS error
/// shape Sigma, and the per-sample noncentrality slope.
template <class Scalar>
struct SecondOrderStats {
  using Vector = Eigen::VectorX<Scalar>;
  using Matrix = Eigen::MatrixX<Scalar>;

  int order = 0;
  int lag_max = 0;

  // Clean-process correlation sequences, index = lag in [0, lag_max].
  Vector ruu, ruv, rvu, rvv;

  double sigma2_nu_x = 0.0;
  double sigma2_nu_y = 0.0;

  Matrix r_full;  ///< 2K x 2K joint regressor covariance, noise included.
  Vector w_x;     ///< MMSE weights on x's own past.
  Vector w_y;     ///< MMSE weights on y's past; zero iff no causal coupling.
  double sigma2_phi = 0.0;  ///< prediction error power of x.
  Matrix sigma;             ///< K x K LS error shape (Hermitian PD).
  double kappa_slope = 0.0;  ///< kappa(N) = (N - K) * kappa_slope.

  /// True when sigma2_phi coincides with sigma2_eta_v + sigma2_nu_y, a
  /// shorthand that holds only for special models; kept as a cross-check.
  bool sigma2_phi_matches_y_power = false;

  Scalar r_uu(int tau) const { return lag(ruu, ruu, tau); }
  Scalar r_vv(int tau) const { return lag(rvv, rvv, tau); }
  Scalar r_uv(int tau) const { return lag(ruv, rvu, tau); }
  Scalar r_vu(int tau) const { return lag(rvu, ruv, tau); }

  // Noise-inclusive correlations of the measured series.
  Scalar r_xx(int tau) const {
    return r_uu(tau) + Scalar(tau == 0 ? sigma2_nu_x : 0.0);
  }
  Scalar r_yy(int tau) const {
    return r_vv(tau) + Scalar(tau == 0 ? sigma2_nu_y : 0.0);
  }
  Scalar r_xy(int tau) const { return r_uv(tau); }
  Scalar r_yx(int tau) const { return r_vu(tau); }

  /// Noncentrality of the block statistic on N samples; affine in N.
  double kappa(int n_samples) const {
    if (n_samples <= order) {
      throw std::invalid_argument("kappa requires N > K");
    }
    return double(n_samples - order) * kappa_slope;
  }

 private:
  Scalar lag(const Vector& fwd, const Vector& rev, int tau) const {
    if (tau >= 0) {
      if (tau > lag_max) throw std::out_of_range("lag exceeds lag_max");
      return fwd(tau);
    }
    if (-tau > lag_max) throw std::out_of_range("lag exceeds lag_max");
    return Eigen::numext::conj(rev(-tau));
  }
};

/// Solves the joint Yule-Walker equations and extends the correlation
/// sequences out to lag_max by the model recursions.
template <class Scalar>
SecondOrderStats<Scalar> theoretical_correlations(const VarModel<Scalar>& model,
                                                  const NoiseConfig& noise,
                                                  int lag_max) {
  const int k = model.order();
  if (lag_max < k) throw std::invalid_argument("lag_max must be >= K");

  SecondOrderStats<Scalar> stats;
  stats.order = k;
  stats.lag_max = lag_max;
  stats.sigma2_nu_x = noise.sigma2_nu_x;
  stats.sigma2_nu_y = noise.sigma2_nu_y;

  const Eigen::MatrixXcd state_cov = detail::stacked_state_covariance(model);
  auto& ruu = stats.ruu;
  auto& ruv = stats.ruv;
  auto& rvu = stats.rvu;
  auto& rvv = stats.rvv;
  ruu.resize(lag_max + 1);
  ruv.resize(lag_max + 1);
  rvu.resize(lag_max + 1);
  rvv.resize(lag_max + 1);
  for (int tau = 0; tau < k; ++tau) {
    ruu(tau) = detail::from_complex<Scalar>(state_cov(0, tau));
    ruv(tau) = detail::from_complex<Scalar>(state_cov(0, k + tau));
    rvu(tau) = detail::from_complex<Scalar>(state_cov(k, tau));
    rvv(tau) = detail::from_complex<Scalar>(state_cov(k, k + tau));
  }
  for (int tau = k; tau <= lag_max; ++tau) {
    Scalar suu{}, suv{}, svu{}, svv{};
    for (int j = 1; j <= k; ++j) {
      const Scalar cuu = Eigen::numext::conj(model.a_uu(j - 1));
      const Scalar cuv = Eigen::numext::conj(model.a_uv(j - 1));
      const Scalar cvv = Eigen::numext::conj(model.a_vv(j - 1));
      suu += cuu * ruu(tau - j) + cuv * rvu(tau - j);
      suv += cuu * ruv(tau - j) + cuv * rvv(tau - j);
      svu += cvv * rvu(tau - j);
      svv += cvv * rvv(tau - j);
    }
    ruu(tau) = suu;
    ruv(tau) = suv;
    rvu(tau) = svu;
    rvv(tau) = svv;
  }
  return stats;
}

/// Stationary powers (sigma_u^2, sigma_v^2) of the clean processes.
template <class Scalar>
std::pair<double, double> signal_variances(const VarModel<Scalar>& model) {
  const Eigen::MatrixXcd cov = detail::stacked_state_covariance(model);
  return {cov(0, 0).real(), cov(model.order(), model.order()).real()};
}

/// Noise configuration for a per-series SNR in dB against the model's
/// theoretical signal powers.
template <class Scalar>
NoiseConfig noise_for_snr_db(const VarModel<Scalar>& model, double snr_x_db,
                             double snr_y_db) {
  const auto [s2_u, s2_v] = signal_variances(model);
  return NoiseConfig(variance_for_snr_db(s2_u, snr_x_db),
                     variance_for_snr_db(s2_v, snr_y_db));
}

/// Full second-order analysis: correlations, R_full, MMSE weights, the
/// prediction error power, Sigma, and the noncentrality slope.
template <class Scalar>
SecondOrderStats<Scalar> second_order_stats(const VarModel<Scalar>& model,
                                            const NoiseConfig& noise = {},
                                            int lag_max = -1) {
  using Matrix = Eigen::MatrixX<Scalar>;
  using Vector = Eigen::VectorX<Scalar>;
  const int k = model.order();
  if (lag_max < 0) lag_max = k;
  SecondOrderStats<Scalar> stats = theoretical_correlations(model, noise, lag_max);

  const int d = 2 * k;
  Matrix r_full(d, d);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      r_full(i, j) = stats.r_xx(j - i);
      r_full(i, k + j) = stats.r_xy(j - i);
      r_full(k + i, j) = stats.r_yx(j - i);
      r_full(k + i, k + j) = stats.r_yy(j - i);
    }
  }
  r_full = (Matrix(0.5 * (r_full + r_full.adjoint())));
  stats.r_full = r_full;

  Eigen::SelfAdjointEigenSolver<Matrix> eig(r_full, Eigen::EigenvaluesOnly);
  const double ev_min = eig.eigenvalues().minCoeff();
  const double ev_max = eig.eigenvalues().maxCoeff();
  if (!(ev_min > 0.0) || ev_max / ev_min > 1e14) {
    throw std::runtime_error(
        "joint regressor covariance is numerically singular");
  }

  Vector rhs(d);
  for (int i = 0; i < k; ++i) {
    rhs(i) = Eigen::numext::conj(stats.r_xx(i + 1));
    rhs(k + i) = Eigen::numext::conj(stats.r_xy(i + 1));
  }
  Eigen::LDLT<Matrix> ldlt(r_full);
  const Vector w = ldlt.solve(rhs);
  stats.w_x = w.head(k);
  stats.w_y = w.tail(k);

  const double r0 = Eigen::numext::real(stats.r_xx(0));
  stats.sigma2_phi = r0 - Eigen::numext::real(Scalar(w.dot(rhs)));
  if (!(stats.sigma2_phi > 0.0)) {
    throw std::runtime_error("prediction error power is not positive");
  }

  const Matrix r_inv = ldlt.solve(Matrix::Identity(d, d));
  Matrix sig = r_inv.block(k, k, k, k);
  stats.sigma = Matrix(0.5 * (sig + sig.adjoint()));

  const Vector solved = stats.sigma.ldlt().solve(stats.w_y);
  const double quad =
      std::max(0.0, Eigen::numext::real(Scalar(stats.w_y.dot(solved))));
  stats.kappa_slope =
      field_scale(field_of<Scalar>()) * quad / stats.sigma2_phi;

  const double shorthand = model.sigma2_eta_v + noise.sigma2_nu_y;
  stats.sigma2_phi_matches_y_power =
      std::abs(stats.sigma2_phi - shorthand) <=
      1e-9 * std::max(1.0, stats.sigma2_phi);
  return stats;
}

/// MMSE regression weights of x on the joint past, plus the prediction
/// error power.
template <class Scalar>
std::tuple<Eigen::VectorX<Scalar>, Eigen::VectorX<Scalar>, double> mmse_weights(
    const VarModel<Scalar>& model, const NoiseConfig& noise = {}) {
  const auto stats = second_order_stats(model, noise);
  return {stats.w_x, stats.w_y, stats.sigma2_phi};
}

/// LS error shape: lower-right K x K block of R_full^{-1}.
template <class Scalar>
Eigen::MatrixX<Scalar> error_covariance(const SecondOrderStats<Scalar>& stats) {
  return stats.sigma;
}

/// Noncentrality of the block statistic at sample count N.
template <class Scalar>
double noncentrality(const SecondOrderStats<Scalar>& stats, int n_samples) {
  return stats.kappa(n_samples);
}

/// Best predictor of x from its own past only, with its error power.
/// This is the reduced model of the prediction-error-ratio index.
template <class Scalar>
std::pair<Eigen::VectorX<Scalar>, double> reduced_predictor(
    const SecondOrderStats<Scalar>& stats) {
  using Matrix = Eigen::MatrixX<Scalar>;
  using Vector = Eigen::VectorX<Scalar>;
  const int k = stats.order;
  Matrix r_xx(k, k);
  Vector rhs(k);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) r_xx(i, j) = stats.r_xx(j - i);
    rhs(i) = Eigen::numext::conj(stats.r_xx(i + 1));
  }
  const Vector w = r_xx.ldlt().solve(rhs);
  const double sigma2 = Eigen::numext::real(stats.r_xx(0)) -
                        Eigen::numext::real(Scalar(w.dot(rhs)));
  return {w, sigma2};
}

}  // namespace granger
