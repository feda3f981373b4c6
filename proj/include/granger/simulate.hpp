#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>

#include "granger/second_order.hpp"
#include "granger/var_model.hpp"

namespace granger {

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Independent per-stream seed derived from a master seed. Used to keep
/// parallel trials and separate noise streams reproducible regardless of
/// scheduling.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return splitmix64(master ^ splitmix64(stream + 0x51ED270B7A4FF9C3ull));
}

/// One realization of the observed pair. Fresh from generate() the
/// channels are the clean u and v; corrupt() returns the noisy x and y.
template <class Scalar>
struct SamplePath {
  Eigen::VectorX<Scalar> x;
  Eigen::VectorX<Scalar> y;
  std::uint64_t seed = 0;
  int burn_in = 0;
};

namespace detail {

template <class Scalar>
Scalar draw_gaussian(std::mt19937_64& rng, std::normal_distribution<double>& n01,
                     double sigma2) {
  if constexpr (is_complex_v<Scalar>) {
    const double s = std::sqrt(0.5 * sigma2);
    const double re = n01(rng);
    const double im = n01(rng);
    return Scalar(s * re, s * im);
  } else {
    return std::sqrt(sigma2) * n01(rng);
  }
}

}  // namespace detail

/// Iterates the model from a zero initial state, discards burn_in samples
/// (default 100*K) and returns the next n_samples. Bit-identical for
/// identical (model, seed, n_samples, burn_in).
template <class Scalar>
SamplePath<Scalar> generate(const VarModel<Scalar>& model, int n_samples,
                            std::uint64_t seed, int burn_in = -1) {
  if (n_samples <= 0) throw std::invalid_argument("n_samples must be > 0");
  const int k = model.order();
  if (burn_in < 0) burn_in = 100 * k;

  SamplePath<Scalar> path;
  path.x.resize(n_samples);
  path.y.resize(n_samples);
  path.seed = seed;
  path.burn_in = burn_in;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  Eigen::VectorX<Scalar> u_hist = Eigen::VectorX<Scalar>::Zero(k);
  Eigen::VectorX<Scalar> v_hist = Eigen::VectorX<Scalar>::Zero(k);

  for (int t = 0; t < burn_in + n_samples; ++t) {
    const Scalar eta_u =
        detail::draw_gaussian<Scalar>(rng, n01, model.sigma2_eta_u);
    const Scalar eta_v =
        detail::draw_gaussian<Scalar>(rng, n01, model.sigma2_eta_v);
    Scalar u_new = eta_u;
    Scalar v_new = eta_v;
    for (int j = 0; j < k; ++j) {
      u_new += Eigen::numext::conj(model.a_uu(j)) * u_hist(j) +
               Eigen::numext::conj(model.a_uv(j)) * v_hist(j);
      v_new += Eigen::numext::conj(model.a_vv(j)) * v_hist(j);
    }
    for (int j = k - 1; j > 0; --j) {
      u_hist(j) = u_hist(j - 1);
      v_hist(j) = v_hist(j - 1);
    }
    u_hist(0) = u_new;
    v_hist(0) = v_new;
    if (t >= burn_in) {
      path.x(t - burn_in) = u_new;
      path.y(t - burn_in) = v_new;
    }
  }
  return path;
}

/// Adds white measurement noise from streams independent of the clean
/// path, so one realization can be corrupted at several noise levels.
/// A zero variance leaves the corresponding channel bit-exact.
template <class Scalar>
SamplePath<Scalar> corrupt(const SamplePath<Scalar>& path,
                           const NoiseConfig& noise, std::uint64_t seed) {
  if (path.x.size() == 0) throw std::invalid_argument("empty sample path");
  SamplePath<Scalar> noisy = path;
  if (noise.sigma2_nu_x > 0.0) {
    std::mt19937_64 rng(derive_seed(seed, 1));
    std::normal_distribution<double> n01(0.0, 1.0);
    for (Eigen::Index i = 0; i < noisy.x.size(); ++i) {
      noisy.x(i) += detail::draw_gaussian<Scalar>(rng, n01, noise.sigma2_nu_x);
    }
  }
  if (noise.sigma2_nu_y > 0.0) {
    std::mt19937_64 rng(derive_seed(seed, 2));
    std::normal_distribution<double> n01(0.0, 1.0);
    for (Eigen::Index i = 0; i < noisy.y.size(); ++i) {
      noisy.y(i) += detail::draw_gaussian<Scalar>(rng, n01, noise.sigma2_nu_y);
    }
  }
  return noisy;
}

/// corrupt() at a per-series SNR taken against the model's theoretical
/// signal powers.
template <class Scalar>
SamplePath<Scalar> corrupt_at_snr(const VarModel<Scalar>& model,
                                  const SamplePath<Scalar>& path, double snr_db,
                                  std::uint64_t seed) {
  return corrupt(path, noise_for_snr_db(model, snr_db, snr_db), seed);
}

}  // namespace granger
