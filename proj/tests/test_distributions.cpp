#include <doctest.h>

#include <cmath>
#include <random>

#include "granger/distributions.hpp"
#include "oracles.hpp"

using namespace granger;

TEST_SUITE("stats") {

TEST_CASE("marcum_q equals 1 at b = 0") {
  for (int k : {1, 2, 4, 9}) {
    for (double a : {0.0, 0.3, 2.0, 11.0}) {
      CHECK(marcum_q(k, a, 0.0) == 1.0);
    }
  }
}

TEST_CASE("central Marcum closed form: Q_1(0,b) = exp(-b^2/2)") {
  const double b = std::sqrt(2.0 * std::log(10.0));
  CHECK(std::abs(marcum_q(1, 0.0, b) - 0.1) < 1e-12);
  for (double bb : {0.1, 0.9, 2.3, 4.0}) {
    CHECK(std::abs(marcum_q(1, 0.0, bb) - std::exp(-0.5 * bb * bb)) < 1e-12);
  }
}

TEST_CASE("central Marcum vs quadrature upper gamma") {
  for (int k : {1, 2, 4, 7}) {
    for (double b : {0.2, 1.0, 2.5, 4.0, 6.0}) {
      const double expect = oracle::gamma_q_quadrature(k, 0.5 * b * b);
      CHECK(std::abs(marcum_q(k, 0.0, b) - expect) < 1e-10);
    }
  }
}

TEST_CASE("noncentral marcum vs quadrature mixture") {
  for (int k : {1, 2, 4}) {
    for (double a : {0.5, 1.5, 3.0, 5.0}) {
      for (double b : {0.5, 2.0, 4.5}) {
        const double expect = oracle::ncx2_sf_quadrature(2 * k, a * a, b * b);
        CHECK(std::abs(marcum_q(k, a, b) - expect) < 1e-9);
      }
    }
  }
}

TEST_CASE("noncentral chi-squared sf: central reduction and closed form") {
  CHECK(noncentral_chi2_sf(2, 0.0, 2.0 * std::log(10.0)) ==
        doctest::Approx(0.1).epsilon(1e-11));
  for (int dof : {1, 2, 3, 5}) {
    for (double t : {0.3, 1.7, 6.0}) {
      CHECK(std::abs(noncentral_chi2_sf(dof, 0.0, t) - chi2_sf(dof, t)) < 1e-12);
    }
  }
  CHECK(noncentral_chi2_sf(4, 3.0, 0.0) == 1.0);
}

TEST_CASE("marcum / noncentral chi-squared identity on a grid") {
  // P(chi2_{2K}(a^2) > b^2) = Q_K(a, b); the two sides use different
  // evaluation routes.
  double worst = 0.0;
  for (int k : {1, 2, 4}) {
    for (double a = 0.0; a <= 5.0; a += 1.25) {
      for (double b = 0.0; b <= 6.0; b += 1.5) {
        const double diff =
            std::abs(marcum_q(k, a, b) - noncentral_chi2_sf(2 * k, a * a, b * b));
        worst = std::max(worst, diff);
      }
    }
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("odd-dof noncentral sf vs quadrature") {
  for (int dof : {1, 3, 5}) {
    for (double kappa : {0.0, 1.0, 4.0, 9.0}) {
      for (double t : {0.5, 2.0, 7.0}) {
        const double expect = oracle::ncx2_sf_quadrature(dof, kappa, t);
        CHECK(std::abs(noncentral_chi2_sf(dof, kappa, t) - expect) < 1e-9);
      }
    }
  }
}

TEST_CASE("monotonicity of Q_K in a, b and K") {
  for (int k : {1, 2, 4}) {
    for (double b : {0.5, 2.0, 4.0}) {
      double prev = -1.0;
      for (double a = 0.0; a <= 6.0; a += 0.5) {
        const double q = marcum_q(k, a, b);
        CHECK(q >= prev - 1e-12);
        prev = q;
      }
    }
    for (double a : {0.0, 1.0, 3.0}) {
      double prev = 2.0;
      for (double b = 0.0; b <= 7.0; b += 0.5) {
        const double q = marcum_q(k, a, b);
        CHECK(q <= prev + 1e-12);
        prev = q;
      }
    }
  }
  for (double a : {0.0, 1.0, 3.0}) {
    for (double b : {0.5, 2.5, 5.0}) {
      CHECK(marcum_q(2, a, b) >= marcum_q(1, a, b) - 1e-12);
      CHECK(marcum_q(4, a, b) >= marcum_q(2, a, b) - 1e-12);
    }
  }
}

TEST_CASE("threshold_for_pfa inverts the false-alarm relation") {
  CHECK(threshold_for_pfa(1, 1.0) == 0.0);
  CHECK(threshold_for_pfa(1, 0.1) ==
        doctest::Approx(2.0 * std::log(10.0)).epsilon(1e-9));
  for (int k : {1, 2, 4}) {
    for (double alpha : {0.5, 0.1, 0.01}) {
      const double lambda = threshold_for_pfa(k, alpha);
      CHECK(std::abs(marcum_q(k, 0.0, std::sqrt(lambda)) - alpha) < 1e-9);
    }
  }
  // Real-field (odd dof) path.
  const double lam = threshold_for_pfa(1, 0.1, Field::kReal);
  CHECK(std::abs(noncentral_chi2_sf(1, 0.0, lam) - 0.1) < 1e-9);
  // Monotone nonincreasing in alpha.
  double prev = threshold_for_pfa(2, 0.02);
  for (double alpha : {0.05, 0.1, 0.3, 0.7, 1.0}) {
    const double lambda = threshold_for_pfa(2, alpha);
    CHECK(lambda <= prev + 1e-12);
    prev = lambda;
  }
  CHECK_THROWS_AS(threshold_for_pfa(1, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(threshold_for_pfa(1, 1.5), std::invalid_argument);
}

TEST_CASE("predicted_pd endpoints and monotonicity in kappa") {
  CHECK(predicted_pd(1, 0.0, 2.0 * std::log(10.0)) ==
        doctest::Approx(0.1).epsilon(1e-10));
  CHECK(predicted_pd(3, 5.0, 0.0) == 1.0);
  double prev = 0.0;
  for (double kappa = 0.0; kappa <= 40.0; kappa += 2.5) {
    const double pd = predicted_pd(2, kappa, 9.0);
    CHECK(pd >= prev - 1e-12);
    prev = pd;
  }
  // The hand value of the toy configuration: Q_1(2.5, sqrt(2 ln 10)),
  // checked through the independent noncentral route first.
  const double lambda = 2.0 * std::log(10.0);
  const double via_ncx2 = noncentral_chi2_sf(2, 6.25, lambda);
  CHECK(std::abs(predicted_pd(1, 6.25, lambda) - via_ncx2) < 1e-9);
}

TEST_CASE("detection_probability dof conventions") {
  CHECK(detection_probability(2, 3.0, 1.5) ==
        doctest::Approx(predicted_pd(1, 3.0, 1.5)).epsilon(1e-12));
  CHECK(detection_probability(4, 3.0, 1.5) ==
        doctest::Approx(predicted_pd(2, 3.0, 1.5)).epsilon(1e-12));
  CHECK(detection_probability(1, 3.0, 1.5) ==
        doctest::Approx(noncentral_chi2_sf(1, 3.0, 1.5)).epsilon(1e-12));
}

TEST_CASE("chi2 quantile round trips") {
  for (int dof : {1, 2, 3, 8}) {
    for (double p : {0.01, 0.05, 0.5, 0.9, 0.999}) {
      const double t = chi2_quantile(dof, p);
      CHECK(std::abs(chi2_cdf(dof, t) - p) < 1e-10);
    }
    CHECK(chi2_quantile(dof, 0.0) == 0.0);
  }
  CHECK_THROWS_AS(chi2_quantile(2, 1.0), std::invalid_argument);
}

TEST_CASE("ROC dominance: larger kappa lifts the whole theory curve") {
  for (int k : {1, 2}) {
    for (double lo = 0.5, hi = 4.0; hi <= 64.0; lo *= 2.0, hi *= 2.0) {
      for (double p_fa : {0.01, 0.1, 0.3, 0.7}) {
        const double lambda = threshold_for_pfa(k, p_fa);
        CHECK(predicted_pd(k, hi, lambda) >= predicted_pd(k, lo, lambda) - 1e-12);
      }
    }
  }
}

TEST_CASE("argument validation") {
  CHECK_THROWS_AS(marcum_q(0, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(marcum_q(1, -1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(marcum_q(1, std::nan(""), 1.0), std::invalid_argument);
  CHECK_THROWS_AS(noncentral_chi2_sf(0, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(noncentral_chi2_sf(2, -0.5, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(chi2_sf(2, -1.0), std::invalid_argument);
}

}  // TEST_SUITE
