#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "granger/block.hpp"
#include "granger/distributions.hpp"
#include "granger/parallel.hpp"
#include "granger/simulate.hpp"
#include "granger/types.hpp"

namespace granger {

struct RocPoint {
  double lambda = 0.0;
  double p_fa_emp = 0.0;
  double p_d_emp = 0.0;
  double p_fa_theory = 0.0;
  double p_d_theory = 0.0;
};

struct RocMeta {
  int n_window = 0;
  int order = 0;
  double snr_db = 0.0;
  int trials = 0;
  std::uint64_t master_seed = 0;
  SigmaMode sigma_mode = SigmaMode::kPlugin;
  Field field = Field::kReal;
  int dof = 0;
};

/// Ordered (lambda, P_fa, P_d) sweep, empirical and theoretical, with the
/// run configuration attached. Points are stored by decreasing lambda so
/// P_fa is nondecreasing along the curve.
struct RocCurve {
  RocMeta meta;
  std::vector<RocPoint> points;
};

/// Thresholds hitting evenly spaced theoretical false-alarm targets in
/// [p_lo, p_hi], returned by decreasing lambda.
inline std::vector<double> default_threshold_grid(int dof, int n_points = 25,
                                                  double p_lo = 0.02,
                                                  double p_hi = 0.98) {
  if (n_points < 2) throw std::invalid_argument("grid needs >= 2 points");
  std::vector<double> grid(n_points);
  for (int i = 0; i < n_points; ++i) {
    const double p_fa = p_lo + (p_hi - p_lo) * double(i) / double(n_points - 1);
    grid[i] = chi2_quantile(dof, 1.0 - p_fa);
  }
  return grid;  // p_fa ascending <=> lambda descending
}

/// Monte Carlo ROC for the block statistic: per trial, one realization of
/// the given model (H1) and one of the decoupled model (H0), both observed
/// at the same absolute noise powers (per-series SNR against the H1 signal
/// powers). Trials carry derived seeds, so the curve is identical for any
/// worker count.
template <class Scalar>
RocCurve run_roc(const VarModel<Scalar>& model, double snr_db, int n_window,
                 int trials, std::uint64_t master_seed,
                 std::vector<double> grid = {},
                 SigmaMode sigma_mode = SigmaMode::kPlugin, int n_threads = 0) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  const int k = model.order();
  const Field field = field_of<Scalar>();
  const int dof = chi2_dof(k, field);
  if (grid.empty()) grid = default_threshold_grid(dof);

  const NoiseConfig noise = noise_for_snr_db(model, snr_db, snr_db);
  const VarModel<Scalar> null_model = model.decoupled();
  const auto stats_h1 = second_order_stats(model, noise);
  const auto stats_h0 = second_order_stats(null_model, noise);
  const double kappa = stats_h1.kappa(n_window);

  std::vector<double> t_h1(trials), t_h0(trials);
  parallel_for(trials, n_threads, [&](int trial) {
    const std::uint64_t base = derive_seed(master_seed, std::uint64_t(trial));
    const auto clean1 = generate(model, n_window, derive_seed(base, 1));
    const auto path1 = corrupt(clean1, noise, derive_seed(base, 2));
    const auto clean0 = generate(null_model, n_window, derive_seed(base, 3));
    const auto path0 = corrupt(clean0, noise, derive_seed(base, 4));
    const auto est1 = block_estimate(path1.x, path1.y, k, n_window);
    const auto est0 = block_estimate(path0.x, path0.y, k, n_window);
    if (sigma_mode == SigmaMode::kOracle) {
      t_h1[trial] = test_statistic(est1, stats_h1);
      t_h0[trial] = test_statistic(est0, stats_h0);
    } else {
      t_h1[trial] = est1.t_plugin;
      t_h0[trial] = est0.t_plugin;
    }
  });

  RocCurve curve;
  curve.meta = {n_window, k,           snr_db, trials,
                master_seed, sigma_mode, field,  dof};
  curve.points.reserve(grid.size());
  std::sort(grid.begin(), grid.end(), std::greater<double>());
  for (const double lambda : grid) {
    std::int64_t d = 0, fa = 0;
    for (int i = 0; i < trials; ++i) {
      d += t_h1[i] > lambda;
      fa += t_h0[i] > lambda;
    }
    RocPoint pt;
    pt.lambda = lambda;
    pt.p_d_emp = double(d) / trials;
    pt.p_fa_emp = double(fa) / trials;
    pt.p_fa_theory = chi2_sf(dof, lambda);
    pt.p_d_theory = detection_probability(dof, kappa, lambda);
    curve.points.push_back(pt);
  }
  return curve;
}

namespace detail {

inline double trapezoid_auc(std::vector<std::pair<double, double>> pts) {
  pts.emplace_back(0.0, 0.0);
  pts.emplace_back(1.0, 1.0);
  std::sort(pts.begin(), pts.end());
  double area = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    area += 0.5 * (pts[i].first - pts[i - 1].first) *
            (pts[i].second + pts[i - 1].second);
  }
  return area;
}

}  // namespace detail

/// Trapezoidal area under the empirical ROC, with (0,0) and (1,1) endpoints.
inline double auc(const RocCurve& curve) {
  std::vector<std::pair<double, double>> pts;
  pts.reserve(curve.points.size());
  for (const auto& p : curve.points) pts.emplace_back(p.p_fa_emp, p.p_d_emp);
  return detail::trapezoid_auc(std::move(pts));
}

/// Windowed real-data sweep: detection rates from noise-corrupted data
/// windows, false-alarm rates from the injected noise alone.
struct WindowedPoint {
  double lambda = 0.0;
  double p_fa = 0.0;
  double p_d = 0.0;
};

struct WindowedResult {
  int n_window = 0;
  int order = 0;
  double snr_db = 0.0;
  int n_windows = 0;
  int trials = 0;
  std::uint64_t master_seed = 0;
  std::vector<WindowedPoint> points;
};

WindowedResult run_windowed(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                            int order, int n_window, double snr_db,
                            int trials_noise, std::vector<double> grid,
                            std::uint64_t master_seed);

double auc(const WindowedResult& result);

}  // namespace granger
