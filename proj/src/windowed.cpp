#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

#include "granger/block.hpp"
#include "granger/roc.hpp"
#include "granger/simulate.hpp"

namespace granger {

namespace {

double sample_variance(const Eigen::VectorXd& v) {
  const double mean = v.mean();
  return (v.array() - mean).square().sum() / double(v.size());
}

}  // namespace

WindowedResult run_windowed(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                            int order, int n_window, double snr_db,
                            int trials_noise, std::vector<double> grid,
                            std::uint64_t master_seed) {
  if (order < 1) throw std::invalid_argument("order must be >= 1");
  if (n_window < 3 * order + 1) {
    throw std::invalid_argument("window too small for the given order");
  }
  if (x.size() != y.size()) {
    throw std::invalid_argument("series lengths differ");
  }
  const auto length = x.size();
  if (length < 2 * n_window) {
    throw std::invalid_argument("series shorter than two windows");
  }
  if (trials_noise < 1) throw std::invalid_argument("trials_noise must be >= 1");
  const int dof = chi2_dof(order, Field::kReal);
  if (grid.empty()) grid = default_threshold_grid(dof);
  std::sort(grid.begin(), grid.end(), std::greater<double>());

  // Injected noise power per series from the sample signal powers (the
  // underlying model of measured data is unknown).
  const double s2_x = variance_for_snr_db(sample_variance(x), snr_db);
  const double s2_y = variance_for_snr_db(sample_variance(y), snr_db);

  const int n_windows = int((length - order) / n_window);
  if (n_windows < 1) throw std::invalid_argument("no complete window fits");

  WindowedResult result;
  result.n_window = n_window;
  result.order = order;
  result.snr_db = snr_db;
  result.n_windows = n_windows;
  result.trials = trials_noise;
  result.master_seed = master_seed;

  std::vector<std::int64_t> detect(grid.size(), 0), alarm(grid.size(), 0);
  std::int64_t evaluated = 0;

  Eigen::VectorXd data_x(length), data_y(length), noise_x(length),
      noise_y(length);
  for (int trial = 0; trial < trials_noise; ++trial) {
    std::mt19937_64 rng(derive_seed(master_seed, std::uint64_t(trial)));
    std::normal_distribution<double> n01(0.0, 1.0);
    for (Eigen::Index i = 0; i < length; ++i) {
      noise_x(i) = std::sqrt(s2_x) * n01(rng);
      noise_y(i) = std::sqrt(s2_y) * n01(rng);
    }
    data_x = x + noise_x;
    data_y = y + noise_y;

    for (int w = 0; w < n_windows; ++w) {
      const int start = order + w * n_window;
      const Eigen::VectorXd wx = data_x.segment(start, n_window);
      const Eigen::VectorXd wy = data_y.segment(start, n_window);
      const Eigen::VectorXd nx = noise_x.segment(start, n_window);
      const Eigen::VectorXd ny = noise_y.segment(start, n_window);
      const double t_data = block_estimate(wx, wy, order, n_window).t_plugin;
      const double t_noise = block_estimate(nx, ny, order, n_window).t_plugin;
      ++evaluated;
      for (std::size_t g = 0; g < grid.size(); ++g) {
        detect[g] += t_data > grid[g];
        alarm[g] += t_noise > grid[g];
      }
    }
  }

  result.points.reserve(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    WindowedPoint pt;
    pt.lambda = grid[g];
    pt.p_d = double(detect[g]) / double(evaluated);
    pt.p_fa = double(alarm[g]) / double(evaluated);
    result.points.push_back(pt);
  }
  return result;
}

double auc(const WindowedResult& result) {
  std::vector<std::pair<double, double>> pts;
  pts.reserve(result.points.size());
  for (const auto& p : result.points) pts.emplace_back(p.p_fa, p.p_d);
  return detail::trapezoid_auc(std::move(pts));
}

}  // namespace granger
