// Command-line front end: simulate sample pairs, run the block and
// sequential causality tests, calibrate thresholds, and drive the Monte
// Carlo ROC and windowed real-data experiments.

#include <complex>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "granger/block.hpp"
#include "granger/distributions.hpp"
#include "granger/io.hpp"
#include "granger/roc.hpp"
#include "granger/second_order.hpp"
#include "granger/sequential.hpp"
#include "granger/simulate.hpp"

using namespace granger;

namespace {

ModelSpec load_spec(const std::string& config_path) {
  if (config_path.empty()) {
    throw std::runtime_error("this command needs a model via --config");
  }
  return parse_model_config(config_path);
}

void require_real_field(const ModelSpec& spec, const char* what) {
  if (spec.field != Field::kReal) {
    throw std::runtime_error(
        std::string(what) +
        " handles real-valued two-column streams; complex-field models are "
        "available through the library API");
  }
}

EmitFormat parse_format(const std::string& name) {
  if (name == "csv") return EmitFormat::kCsv;
  if (name == "jsonl") return EmitFormat::kJsonLines;
  throw std::runtime_error("format must be csv or jsonl");
}

SigmaMode parse_sigma(const std::string& name) {
  if (name == "plugin") return SigmaMode::kPlugin;
  if (name == "oracle") return SigmaMode::kOracle;
  throw std::runtime_error("sigma mode must be plugin or oracle");
}

Field parse_field(const std::string& name) {
  if (name == "real") return Field::kReal;
  if (name == "complex") return Field::kComplex;
  throw std::runtime_error("field must be real or complex");
}

int run_simulate(const std::string& config_path, int n, std::uint64_t seed,
                 int burn_in, bool clean, const std::string& output) {
  const auto spec = load_spec(config_path);
  require_real_field(spec, "simulate");
  const auto model = make_model<double>(spec);
  auto path = generate(model, n, seed, burn_in);
  if (!clean) {
    path = corrupt(path, resolve_noise(spec, model), derive_seed(seed, 0xA5));
  }
  std::FILE* out = output.empty() ? stdout : std::fopen(output.c_str(), "w");
  if (out == nullptr) {
    throw std::runtime_error(output + ": cannot open for writing");
  }
  for (int i = 0; i < n; ++i) {
    std::fprintf(out, "%.17g %.17g\n", path.x(i), path.y(i));
  }
  if (out != stdout) std::fclose(out);
  return 0;
}

int run_block_test(const std::string& input, int order, int window,
                   std::optional<double> threshold, std::optional<double> pfa,
                   const std::string& sigma_name,
                   const std::string& config_path, bool with_gci) {
  const auto [x, y] = ingest_pair(input);
  if (x.size() < window) {
    throw std::runtime_error("input has fewer samples than --window");
  }
  const auto est = block_estimate<double>(x, y, order, window);

  double t = est.t_plugin;
  if (parse_sigma(sigma_name) == SigmaMode::kOracle) {
    const auto spec = load_spec(config_path);
    require_real_field(spec, "block-test --sigma oracle");
    const auto model = make_model<double>(spec);
    t = test_statistic(est,
                       second_order_stats(model, resolve_noise(spec, model)));
  }
  double lambda = 0.0;
  if (threshold) {
    lambda = *threshold;
  } else if (pfa) {
    lambda = threshold_for_pfa(order, *pfa, Field::kReal);
  } else {
    throw std::runtime_error("give a decision rule: --threshold or --pfa");
  }
  std::printf("T_N=%.12g\n", t);
  std::printf("lambda=%.12g\n", lambda);
  std::printf("decision=%s\n", t > lambda ? "causal" : "noncausal");
  if (with_gci) {
    std::printf("gci=%.12g\n", gci<double>(x, y, order, window));
  }
  return 0;
}

int run_calibrate(int order, double pfa, const std::string& field_name,
                  std::optional<double> kappa) {
  const Field field = parse_field(field_name);
  const double lambda = threshold_for_pfa(order, pfa, field);
  std::printf("lambda=%.12g\n", lambda);
  if (kappa) {
    std::printf("p_d=%.12g\n",
                detection_probability(chi2_dof(order, field), *kappa, lambda));
  }
  return 0;
}

int run_sequential(const std::string& input, SeqConfig config,
                   const std::string& sigma_name,
                   const std::string& config_path) {
  config.sigma_mode = parse_sigma(sigma_name);
  std::optional<SecondOrderStats<double>> stats;
  if (config.sigma_mode == SigmaMode::kOracle) {
    const auto spec = load_spec(config_path);
    require_real_field(spec, "sequential --sigma oracle");
    const auto model = make_model<double>(spec);
    stats = second_order_stats(model, resolve_noise(spec, model));
  }
  SequentialDetector<double> detector(config, stats ? &*stats : nullptr);

  std::ifstream file;
  std::istream* in = &std::cin;
  if (!input.empty() && input != "-") {
    file.open(input);
    if (!file) throw std::runtime_error(input + ": cannot open for reading");
    in = &file;
  }
  std::string line;
  int line_no = 0;
  while (std::getline(*in, line)) {
    ++line_no;
    std::istringstream ss(line);
    double xv = 0.0, yv = 0.0;
    if (!(ss >> xv >> yv)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      throw std::runtime_error("input:" + std::to_string(line_no) +
                               ": expected two numeric columns");
    }
    const auto step = detector.step(xv, yv);
    std::printf("%d %.12g %.12g %.12g %s\n", step.n, step.t, step.lambda0,
                step.lambda1, to_string(step.verdict));
    if (detector.status() != Verdict::kContinue) break;
  }
  return 0;
}

template <class Scalar>
RocCurve roc_for_field(const ModelSpec& spec, double snr_db, int window,
                       int trials, std::uint64_t seed, int grid_points,
                       SigmaMode sigma_mode) {
  const auto model = make_model<Scalar>(spec);
  const auto grid =
      default_threshold_grid(chi2_dof(spec.order, spec.field), grid_points);
  return run_roc(model, snr_db, window, trials, seed, grid, sigma_mode);
}

int run_roc_cmd(const std::string& config_path, double snr_db, int window,
                int trials, std::uint64_t seed, int grid_points,
                const std::string& sigma_name, const std::string& output,
                const std::string& format_name) {
  const auto spec = load_spec(config_path);
  const SigmaMode mode = parse_sigma(sigma_name);
  const RocCurve curve =
      spec.field == Field::kComplex
          ? roc_for_field<std::complex<double>>(spec, snr_db, window, trials,
                                                seed, grid_points, mode)
          : roc_for_field<double>(spec, snr_db, window, trials, seed,
                                  grid_points, mode);
  if (output.empty()) {
    std::printf("lambda,p_fa_emp,p_d_emp,p_fa_theory,p_d_theory\n");
    for (const auto& p : curve.points) {
      std::printf("%.12g,%.6g,%.6g,%.6g,%.6g\n", p.lambda, p.p_fa_emp,
                  p.p_d_emp, p.p_fa_theory, p.p_d_theory);
    }
  } else {
    emit(curve, output, parse_format(format_name));
    std::printf("wrote %zu points to %s\n", curve.points.size(),
                output.c_str());
  }
  return 0;
}

int run_windowed_cmd(const std::string& input, int order, int window,
                     double snr_db, int trials, std::uint64_t seed,
                     int grid_points, const std::string& output,
                     const std::string& format_name) {
  const auto [x, y] = ingest_pair(input);
  const auto grid =
      default_threshold_grid(chi2_dof(order, Field::kReal), grid_points);
  const auto result =
      run_windowed(x, y, order, window, snr_db, trials, grid, seed);
  if (output.empty()) {
    std::printf("# n=%d n_windows=%d snr_db=%g auc=%.4f\n", result.n_window,
                result.n_windows, result.snr_db, auc(result));
    std::printf("lambda,p_fa,p_d\n");
    for (const auto& p : result.points) {
      std::printf("%.12g,%.6g,%.6g\n", p.lambda, p.p_fa, p.p_d);
    }
  } else {
    emit(result, output, parse_format(format_name));
    std::printf("wrote %zu points to %s\n", result.points.size(),
                output.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Granger-causality detection for noisy time series pairs"};
  app.require_subcommand(1);

  std::string config_path, input, output, format_name = "csv";
  std::string sigma_name = "plugin", field_name = "complex";

  auto* sim = app.add_subcommand("simulate",
                                 "Generate a two-column sample pair from a "
                                 "model configuration");
  int sim_n = 1000, sim_burn = -1;
  std::uint64_t sim_seed = 1;
  bool sim_clean = false;
  sim->add_option("--config", config_path, "model configuration file")
      ->required();
  sim->add_option("--n", sim_n, "number of samples");
  sim->add_option("--seed", sim_seed, "master seed");
  sim->add_option("--burn-in", sim_burn, "transient samples to discard");
  sim->add_flag("--clean", sim_clean, "emit the clean pair without noise");
  sim->add_option("--output", output, "write here instead of stdout");

  auto* blk = app.add_subcommand("block-test",
                                 "Block test statistic and decision on the "
                                 "first N samples of a pair file");
  int blk_order = 1, blk_window = 0;
  std::optional<double> blk_threshold, blk_pfa;
  bool blk_gci = false;
  blk->add_option("input", input, "two-column sample file")->required();
  blk->add_option("--order", blk_order, "regression order K");
  blk->add_option("--window", blk_window, "window length N")->required();
  blk->add_option("--threshold", blk_threshold, "decision threshold lambda");
  blk->add_option("--pfa", blk_pfa, "false-alarm level to derive lambda");
  blk->add_option("--sigma", sigma_name, "plugin or oracle");
  blk->add_option("--config", config_path,
                  "model configuration (oracle mode)");
  blk->add_flag("--gci", blk_gci,
                "also print the prediction-error-ratio index");

  auto* cal = app.add_subcommand(
      "calibrate", "Threshold for a target false-alarm level, and the "
                   "predicted detection probability at a given kappa");
  int cal_order = 1;
  double cal_pfa = 0.1;
  std::optional<double> cal_kappa;
  cal->add_option("--order", cal_order, "regression order K");
  cal->add_option("--pfa", cal_pfa, "false-alarm level alpha");
  cal->add_option("--field", field_name, "real or complex");
  cal->add_option("--kappa", cal_kappa, "noncentrality for the P_d prediction");

  auto* seq = app.add_subcommand("sequential",
                                 "Per-sample detector on a streaming pair "
                                 "(file or stdin)");
  SeqConfig seq_config;
  seq->add_option("input", input, "two-column sample file, '-' for stdin");
  seq->add_option("--order", seq_config.order, "regression order K");
  seq->add_option("--mu", seq_config.mu, "forgetting factor");
  seq->add_option("--delta", seq_config.delta, "initial information ridge");
  seq->add_option("--alpha", seq_config.alpha, "terminal false-alarm level");
  seq->add_option("--beta", seq_config.beta, "lower-stop level");
  seq->add_option("--alpha-ramp", seq_config.alpha_ramp,
                  "upper boundary spending exponent");
  seq->add_option("--beta-ramp", seq_config.beta_ramp,
                  "lower boundary tightening exponent");
  seq->add_option("--nmax", seq_config.n_max, "truncation horizon");
  seq->add_option("--nmin", seq_config.n_min, "decision warm-up");
  seq->add_option("--sigma", sigma_name, "plugin or oracle");
  seq->add_option("--config", config_path,
                  "model configuration (oracle mode)");

  auto* roc = app.add_subcommand("roc",
                                 "Monte Carlo ROC of the block statistic "
                                 "for a configured model");
  double roc_snr = 0.0;
  int roc_window = 100, roc_trials = 10000, roc_grid = 25;
  std::uint64_t roc_seed = 1;
  roc->add_option("--config", config_path, "model configuration file")
      ->required();
  roc->add_option("--snr-db", roc_snr, "per-series SNR in dB");
  roc->add_option("--window", roc_window, "samples per trial N");
  roc->add_option("--trials", roc_trials, "Monte Carlo trials");
  roc->add_option("--seed", roc_seed, "master seed");
  roc->add_option("--grid-points", roc_grid, "threshold grid size");
  roc->add_option("--sigma", sigma_name, "plugin or oracle");
  roc->add_option("--output", output, "result file (default stdout)");
  roc->add_option("--format", format_name, "csv or jsonl");

  auto* win = app.add_subcommand("windowed",
                                 "Windowed detection sweep on a measured "
                                 "pair with injected noise");
  int win_order = 1, win_window = 50, win_trials = 25, win_grid = 25;
  double win_snr = 20.0;
  std::uint64_t win_seed = 1;
  win->add_option("--input", input, "two-column sample file")->required();
  win->add_option("--order", win_order, "regression order K");
  win->add_option("--window", win_window, "window length N");
  win->add_option("--snr-db", win_snr, "injected-noise SNR in dB");
  win->add_option("--trials", win_trials, "independent noise injections");
  win->add_option("--seed", win_seed, "master seed");
  win->add_option("--grid-points", win_grid, "threshold grid size");
  win->add_option("--output", output, "result file (default stdout)");
  win->add_option("--format", format_name, "csv or jsonl");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) {
      return run_simulate(config_path, sim_n, sim_seed, sim_burn, sim_clean,
                          output);
    }
    if (blk->parsed()) {
      return run_block_test(input, blk_order, blk_window, blk_threshold,
                            blk_pfa, sigma_name, config_path, blk_gci);
    }
    if (cal->parsed()) {
      return run_calibrate(cal_order, cal_pfa, field_name, cal_kappa);
    }
    if (seq->parsed()) {
      return run_sequential(input, seq_config, sigma_name, config_path);
    }
    if (roc->parsed()) {
      return run_roc_cmd(config_path, roc_snr, roc_window, roc_trials,
                         roc_seed, roc_grid, sigma_name, output, format_name);
    }
    if (win->parsed()) {
      return run_windowed_cmd(input, win_order, win_window, win_snr,
                              win_trials, win_seed, win_grid, output,
                              format_name);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
