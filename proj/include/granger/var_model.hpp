#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <complex>
#include <sstream>
#include <stdexcept>

#include "granger/types.hpp"

namespace granger {

/// Companion matrix of a one-step predictor s[n] = sum_k conj(a[k]) s[n-k].
template <class Scalar>
Eigen::MatrixX<Scalar> companion_matrix(const Eigen::VectorX<Scalar>& coeffs) {
  const auto k = coeffs.size();
  Eigen::MatrixX<Scalar> f = Eigen::MatrixX<Scalar>::Zero(k, k);
  f.row(0) = coeffs.conjugate().transpose();
  for (Eigen::Index i = 1; i < k; ++i) f(i, i - 1) = Scalar(1);
  return f;
}

template <class Scalar>
double spectral_radius(const Eigen::MatrixX<Scalar>& m) {
  if (m.rows() == 0) return 0.0;
  Eigen::MatrixXcd mc = m.template cast<std::complex<double>>();
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(mc, false);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

/// Bivariate AR-K process with one-way coupling: y's past enters x's
/// recursion through a_uv, while x never enters y's (there is no a_vu).
///
///   u[n] = a_uu^H u_K[n-1] + a_uv^H v_K[n-1] + eta_u[n]
///   v[n] =                   a_vv^H v_K[n-1] + eta_v[n]
///
/// Both univariate subsystems must be stable; construction rejects
/// anything with a companion spectral radius >= 1.
template <class Scalar>
struct VarModel {
  using Vector = Eigen::VectorX<Scalar>;

  Vector a_uu;
  Vector a_uv;
  Vector a_vv;
  double sigma2_eta_u = 1.0;
  double sigma2_eta_v = 1.0;

  VarModel(Vector a_uu_in, Vector a_uv_in, Vector a_vv_in, double s2_eta_u,
           double s2_eta_v)
      : a_uu(std::move(a_uu_in)),
        a_uv(std::move(a_uv_in)),
        a_vv(std::move(a_vv_in)),
        sigma2_eta_u(s2_eta_u),
        sigma2_eta_v(s2_eta_v) {
    if (a_uu.size() < 1 || a_uv.size() != a_uu.size() ||
        a_vv.size() != a_uu.size()) {
      throw std::invalid_argument(
          "coefficient vectors must share a common positive length K");
    }
    if (!(sigma2_eta_u > 0.0) || !std::isfinite(sigma2_eta_u) ||
        !(sigma2_eta_v > 0.0) || !std::isfinite(sigma2_eta_v)) {
      throw std::invalid_argument("innovation variances must be finite and > 0");
    }
    check_stable(a_uu, "a_uu");
    check_stable(a_vv, "a_vv");
  }

  int order() const { return int(a_uu.size()); }

  static constexpr Field field() { return field_of<Scalar>(); }

  /// Same process with the cross coupling removed (the no-causality null).
  VarModel decoupled() const {
    return VarModel(a_uu, Vector::Zero(a_uv.size()), a_vv, sigma2_eta_u,
                    sigma2_eta_v);
  }

 private:
  static void check_stable(const Vector& coeffs, const char* name) {
    const double radius = spectral_radius(companion_matrix<Scalar>(coeffs));
    if (!(radius < 1.0)) {
      std::ostringstream msg;
      msg << "unstable model: companion spectral radius of " << name << " is "
          << radius;
      throw std::invalid_argument(msg.str());
    }
  }
};

/// Additive measurement noise powers for the observed pair x = u + nu_x,
/// y = v + nu_y.
struct NoiseConfig {
  double sigma2_nu_x = 0.0;
  double sigma2_nu_y = 0.0;

  NoiseConfig() = default;
  NoiseConfig(double s2_x, double s2_y) : sigma2_nu_x(s2_x), sigma2_nu_y(s2_y) {
    if (!std::isfinite(s2_x) || s2_x < 0.0 || !std::isfinite(s2_y) || s2_y < 0.0) {
      throw std::invalid_argument("noise variances must be finite and >= 0");
    }
  }
};

/// Noise power giving the requested per-series SNR (dB) against a signal
/// of the given stationary power.
inline double variance_for_snr_db(double signal_variance, double snr_db) {
  return signal_variance * std::pow(10.0, -snr_db / 10.0);
}

}  // namespace granger
