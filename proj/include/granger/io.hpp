#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <utility>

#include "granger/roc.hpp"
#include "granger/second_order.hpp"
#include "granger/types.hpp"
#include "granger/var_model.hpp"

namespace granger {

/// Two-column whitespace-separated sample file (the cause-effect pair
/// format). Returns the columns, zero-meaned unless told otherwise.
/// Parse failures name the offending line.
std::pair<Eigen::VectorXd, Eigen::VectorXd> ingest_pair(
    const std::string& path, bool zero_mean = true);

enum class EmitFormat { kCsv, kJsonLines };

/// Deterministic result emission: identical inputs give byte-identical
/// files. CSV carries the run configuration in a single leading comment.
void emit(const RocCurve& curve, const std::string& path, EmitFormat format);
void emit(const WindowedResult& result, const std::string& path,
          EmitFormat format);

/// Exact round-trip of an emitted ROC CSV.
RocCurve read_roc_csv(const std::string& path);

/// Parsed model configuration: key = value text with the keys
/// K, a_uu, a_uv, a_vv, sigma2_eta_u, sigma2_eta_v, field and per-series
/// noise given either as sigma2_nu_{x,y} or snr_{x,y}_db.
struct ModelSpec {
  int order = 0;
  Field field = Field::kReal;
  Eigen::VectorXd a_uu, a_uv, a_vv;
  double sigma2_eta_u = 1.0;
  double sigma2_eta_v = 1.0;
  std::optional<double> sigma2_nu_x, sigma2_nu_y;
  std::optional<double> snr_x_db, snr_y_db;
};

ModelSpec parse_model_config(const std::string& path);

template <class Scalar>
VarModel<Scalar> make_model(const ModelSpec& spec) {
  return VarModel<Scalar>(spec.a_uu.cast<Scalar>(), spec.a_uv.cast<Scalar>(),
                          spec.a_vv.cast<Scalar>(), spec.sigma2_eta_u,
                          spec.sigma2_eta_v);
}

/// Resolves the configured noise description against the model (SNR keys
/// need the theoretical signal powers).
template <class Scalar>
NoiseConfig resolve_noise(const ModelSpec& spec, const VarModel<Scalar>& model) {
  double s2_x = spec.sigma2_nu_x.value_or(0.0);
  double s2_y = spec.sigma2_nu_y.value_or(0.0);
  if (spec.snr_x_db || spec.snr_y_db) {
    const auto [var_u, var_v] = signal_variances(model);
    if (spec.snr_x_db) s2_x = variance_for_snr_db(var_u, *spec.snr_x_db);
    if (spec.snr_y_db) s2_y = variance_for_snr_db(var_v, *spec.snr_y_db);
  }
  return NoiseConfig(s2_x, s2_y);
}

}  // namespace granger
