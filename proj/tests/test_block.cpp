#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "granger/block.hpp"
#include "granger/simulate.hpp"
#include "oracles.hpp"

using namespace granger;
using Cplx = std::complex<double>;

namespace {

template <class Scalar>
VarModel<Scalar> toy_model(double a = 0.25) {
  using V = Eigen::VectorX<Scalar>;
  V zero = V::Zero(1);
  V coupling(1);
  coupling(0) = Scalar(a);
  return VarModel<Scalar>(zero, coupling, zero, 1.0, 1.0);
}

}  // namespace

TEST_SUITE("block") {

TEST_CASE("hand-built design matrix and normal equations") {
  Eigen::VectorXd x(3), y(3);
  x << 1, 2, 3;
  y << 4, 5, 6;
  const auto design = assemble<double>(x, y, 1, 3);
  REQUIRE(design.rows.rows() == 2);
  CHECK(design.rows(0, 0) == 1.0);
  CHECK(design.rows(0, 1) == 4.0);
  CHECK(design.rows(1, 0) == 2.0);
  CHECK(design.rows(1, 1) == 5.0);
  CHECK(design.targets(0) == 2.0);
  CHECK(design.targets(1) == 3.0);

  const auto [phi, psi] = normal_equations(design);
  CHECK(phi(0, 0) == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(phi(0, 1) == doctest::Approx(7.0).epsilon(1e-15));
  CHECK(phi(1, 0) == doctest::Approx(7.0).epsilon(1e-15));
  CHECK(phi(1, 1) == doctest::Approx(20.5).epsilon(1e-15));
  CHECK(psi(0) == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(psi(1) == doctest::Approx(11.5).epsilon(1e-15));
}

TEST_CASE("row count is always N - K") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::VectorXd x(40), y(40);
  for (int i = 0; i < 40; ++i) {
    x(i) = g(rng);
    y(i) = g(rng);
  }
  for (int k : {1, 2, 3}) {
    for (int n : {k + 1, 2 * k + 2, 17, 40}) {
      const auto d = assemble<double>(x, y, k, n);
      CHECK(d.rows.rows() == n - k);
      CHECK(d.rows.cols() == 2 * k);
    }
  }
  // Boundary: N = K + 1 is a single row.
  CHECK(assemble<double>(x, y, 2, 3).rows.rows() == 1);
  CHECK_THROWS_AS(assemble<double>(x, y, 1, 41), std::invalid_argument);
}

TEST_CASE("all-zero data gives zero normal equations") {
  Eigen::VectorXd z = Eigen::VectorXd::Zero(10);
  const auto [phi, psi] = normal_equations(assemble<double>(z, z, 1, 10));
  CHECK(phi.cwiseAbs().maxCoeff() == 0.0);
  CHECK(psi.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("phi equals its adjoint exactly") {
  const auto path = generate(toy_model<Cplx>(), 64, 5);
  const auto [phi, psi] = normal_equations(assemble<Cplx>(path.x, path.y, 2, 64));
  CHECK((phi - phi.adjoint()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("degenerate input is rejected as insufficient excitation") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::VectorXd x(50), y = Eigen::VectorXd::Zero(50);
  for (int i = 0; i < 50; ++i) x(i) = g(rng);
  const auto [phi, psi] = normal_equations(assemble<double>(x, y, 1, 50));
  CHECK_THROWS_AS(ls_weights<double>(phi, psi), std::runtime_error);
}

TEST_CASE("exact linear data is recovered exactly") {
  const int n = 60;
  Eigen::VectorXd x(n), y(n);
  y(0) = 1.0;
  x(0) = 0.5;
  for (int i = 1; i < n; ++i) {
    y(i) = std::cos(0.7 * i) + 0.2;
    x(i) = 0.3 * x(i - 1) + 0.5 * y(i - 1);
  }
  const auto design = assemble<double>(x, y, 1, n);
  const auto [phi, psi] = normal_equations(design);
  const auto w = ls_weights<double>(phi, psi);
  CHECK(std::abs(w(0) - 0.3) < 1e-10);
  CHECK(std::abs(w(1) - 0.5) < 1e-10);
  CHECK(residual_variance(design, w) < 1e-20);
}

TEST_CASE("sample covariance converges to the joint regressor covariance") {
  const int n = 100000;
  const auto model = toy_model<Cplx>();
  const NoiseConfig noise = noise_for_snr_db(model, 0.0, 0.0);
  const auto stats = second_order_stats(model, noise);
  const auto path = corrupt(generate(model, n, 21), noise, 22);
  const auto [phi, psi] = normal_equations(assemble<Cplx>(path.x, path.y, 1, n));
  // 5 conservative standard errors for averaged fourth-moment entries.
  const double tol = 5.0 * std::sqrt(2.0 * 2.125 * 2.125 / double(n - 1));
  CHECK((phi - stats.r_full).cwiseAbs().maxCoeff() < tol);
}

TEST_CASE("ls weights converge at the theoretical rate and value") {
  SUBCASE("value at large N") {
    const int n = 100000;
    const auto path = generate(toy_model<double>(), n, 33);
    const auto est = block_estimate<double>(path.x, path.y, 1, n);
    // weight error std = sqrt(sigma_phi^2 Sigma / (N-K)) = 1/sqrt(N-1)
    const double se = 1.0 / std::sqrt(double(n - 1));
    CHECK(std::abs(est.w_y()(0) - 0.25) < 5.0 * se);
    CHECK(std::abs(est.w_x()(0)) < 5.0 * se);
  }
  SUBCASE("log-log error slope is -1/2") {
    std::mt19937_64 seeder(99);
    const auto model = toy_model<Cplx>();
    Eigen::VectorXcd truth(2);
    truth << Cplx(0.0), Cplx(0.25);
    std::vector<double> log_n, log_err;
    for (int n : {100, 1000, 10000, 100000}) {
      double acc = 0.0;
      const int reps = n <= 1000 ? 60 : 20;
      for (int r = 0; r < reps; ++r) {
        const auto path = generate(model, n, seeder());
        const auto est = block_estimate<Cplx>(path.x, path.y, 1, n);
        acc += (est.w_hat - truth).norm();
      }
      log_n.push_back(std::log(double(n - 1)));
      log_err.push_back(std::log(acc / reps));
    }
    // least-squares slope
    const int m = int(log_n.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < m; ++i) {
      sx += log_n[i];
      sy += log_err[i];
      sxx += log_n[i] * log_n[i];
      sxy += log_n[i] * log_err[i];
    }
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    CHECK(slope == doctest::Approx(-0.5).epsilon(0.1));
  }
}

TEST_CASE("residual variance tracks the prediction error power") {
  const int n = 100000;
  SUBCASE("noiseless toy: sigma_phi^2 = 1") {
    const auto path = generate(toy_model<double>(), n, 43);
    const auto est = block_estimate<double>(path.x, path.y, 1, n);
    CHECK(std::abs(est.sigma2_phi_hat - 1.0) < 5.0 * std::sqrt(2.0 / n));
  }
  SUBCASE("y noise raises it") {
    const auto model = toy_model<double>();
    const auto clean = generate(model, n, 47);
    const auto noisy = corrupt(clean, NoiseConfig(0.0, 1.0), 53);
    const auto est = block_estimate<double>(noisy.x, noisy.y, 1, n);
    const auto stats = second_order_stats(model, NoiseConfig(0.0, 1.0));
    CHECK(est.sigma2_phi_hat > 1.0);
    CHECK(std::abs(est.sigma2_phi_hat - stats.sigma2_phi) <
          5.0 * stats.sigma2_phi * std::sqrt(2.0 / n));
  }
}

TEST_CASE("zero coupling weight gives zero statistic") {
  BlockEstimate<double> est;
  est.order = 1;
  est.n_window = 100;
  est.dof = 1;
  est.w_hat = Eigen::VectorXd::Zero(2);
  est.sigma_hat = Eigen::MatrixXd::Identity(1, 1);
  est.sigma2_phi_hat = 1.0;
  CHECK(test_statistic(est) == 0.0);
}

TEST_CASE("statistic moments match the chi-squared law") {
  const int trials = 2000;
  const int n = 100;
  SUBCASE("H0 mean is dof") {
    const auto model = toy_model<Cplx>(0.0);
    const auto stats = second_order_stats(model);
    double acc = 0.0;
    for (int t = 0; t < trials; ++t) {
      const auto path = generate(model, n, derive_seed(1234, t));
      acc += test_statistic(block_estimate<Cplx>(path.x, path.y, 1, n), stats);
    }
    const double mean = acc / trials;
    const double se = std::sqrt(2.0 * 2.0 / trials);
    CHECK(std::abs(mean - 2.0) < 5.0 * se + 0.05);  // 0.05 finite-N allowance
  }
  SUBCASE("H1 mean is dof + kappa") {
    const auto model = toy_model<Cplx>();
    const auto stats = second_order_stats(model);
    const double kappa = stats.kappa(n);
    double acc = 0.0;
    for (int t = 0; t < trials; ++t) {
      const auto path = generate(model, n, derive_seed(4321, t));
      acc += test_statistic(block_estimate<Cplx>(path.x, path.y, 1, n), stats);
    }
    const double mean = acc / trials;
    const double se = std::sqrt(2.0 * (2.0 + 2.0 * kappa) / trials);
    CHECK(std::abs(mean - (2.0 + kappa)) < 5.0 * se + 0.4);
  }
}

TEST_CASE("null calibration by Kolmogorov-Smirnov") {
  const int trials = 10000;
  const int n = 200;
  const auto model = toy_model<Cplx>(0.0);
  const auto stats = second_order_stats(model);
  std::vector<double> t_oracle, t_plugin;
  t_oracle.reserve(trials);
  t_plugin.reserve(trials);
  for (int t = 0; t < trials; ++t) {
    const auto path = generate(model, n, derive_seed(777, t));
    const auto est = block_estimate<Cplx>(path.x, path.y, 1, n);
    t_oracle.push_back(test_statistic(est, stats));
    t_plugin.push_back(est.t_plugin);
  }
  // 1% KS critical value for 10^4 samples.
  const double critical = 1.628 / std::sqrt(double(trials));
  CHECK(oracle::ks_distance(t_oracle, oracle::chi2_2_cdf) < critical);
  CHECK(oracle::ks_distance(t_plugin, oracle::chi2_2_cdf) < 0.03);
}

TEST_CASE("plug-in error shape: inverse block equals Schur complement") {
  std::mt19937_64 rng(61);
  const auto path =
      generate(oracle::random_stable_model<Cplx>(rng, 2), 400, 63);
  const auto est = block_estimate<Cplx>(path.x, path.y, 2, 400);
  const auto schur = sigma_schur(est.phi);
  CHECK((schur - est.sigma_hat).cwiseAbs().maxCoeff() < 1e-10);
  const double t_inv = test_statistic(est, est.sigma_hat, est.sigma2_phi_hat);
  const double t_schur = test_statistic(est, schur, est.sigma2_phi_hat);
  CHECK(std::abs(t_inv - t_schur) < 1e-10 * std::max(1.0, t_inv));
}

TEST_CASE("dof bookkeeping per field") {
  const auto rpath = generate(toy_model<double>(), 50, 3);
  CHECK(block_estimate<double>(rpath.x, rpath.y, 1, 50).dof == 1);
  const auto cpath = generate(toy_model<Cplx>(), 50, 3);
  CHECK(block_estimate<Cplx>(cpath.x, cpath.y, 1, 50).dof == 2);
}

TEST_CASE("prediction-error-ratio index") {
  SUBCASE("invariant under common rescaling") {
    const auto path = generate(toy_model<double>(0.4), 500, 71);
    const double g1 = gci<double>(path.x, path.y, 1, 500);
    const Eigen::VectorXd xs = 3.7 * path.x;
    const Eigen::VectorXd ys = 3.7 * path.y;
    const double g2 = gci<double>(xs, ys, 1, 500);
    CHECK(g1 == doctest::Approx(g2).epsilon(1e-12));
    CHECK(g1 >= 0.0);
  }
  SUBCASE("uncoupled pair drives the index to zero") {
    const auto path = generate(toy_model<double>(0.0), 200000, 73);
    CHECK(gci<double>(path.x, path.y, 1, 200000) < 0.001);
  }
  SUBCASE("toy limit ln(sigma2_reduced / sigma2_eta_u)") {
    const int n = 200000;
    const auto path = generate(toy_model<double>(), n, 79);
    const auto stats = second_order_stats(toy_model<double>(), NoiseConfig{}, 3);
    const auto [w_red, s2_red] = reduced_predictor(stats);
    const double expect = std::log(s2_red / 1.0);
    CHECK(gci<double>(path.x, path.y, 1, n) ==
          doctest::Approx(expect).epsilon(0.15));
  }
}

TEST_CASE("window length guards") {
  const auto path = generate(toy_model<double>(), 50, 83);
  CHECK_THROWS_AS(block_estimate<double>(path.x, path.y, 1, 3),
                  std::invalid_argument);
  const auto d = assemble<double>(path.x, path.y, 2, 6);
  const auto [phi, psi] = normal_equations(d);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(4);
  CHECK_THROWS_AS(residual_variance(d, w), std::invalid_argument);
}

}  // TEST_SUITE
