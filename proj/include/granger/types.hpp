#pragma once

#include <Eigen/Core>

namespace granger {

/// Scalar field of the observed processes. Complex series use
/// circularly-symmetric innovations with total variance sigma^2
/// (sigma^2/2 per real dimension); real series use variance sigma^2.
enum class Field { kReal, kComplex };

/// Where the whitening statistics (Sigma, sigma_phi^2) come from when
/// forming a test statistic: estimated from the data, or supplied from
/// the exact second-order statistics of a known model.
enum class SigmaMode { kPlugin, kOracle };

template <class Scalar>
inline constexpr bool is_complex_v = Eigen::NumTraits<Scalar>::IsComplex != 0;

template <class Scalar>
constexpr Field field_of() {
  return is_complex_v<Scalar> ? Field::kComplex : Field::kReal;
}

/// Degrees of freedom of the whitened-norm statistic under H0:
/// 2K for complex data, K for real data.
inline int chi2_dof(int order, Field field) {
  return field == Field::kComplex ? 2 * order : order;
}

/// Scale applied to the whitened quadratic form so that each real
/// dimension has unit variance under H0.
inline double field_scale(Field field) {
  return field == Field::kComplex ? 2.0 : 1.0;
}

inline const char* to_string(Field field) {
  return field == Field::kComplex ? "complex" : "real";
}

inline const char* to_string(SigmaMode mode) {
  return mode == SigmaMode::kOracle ? "oracle" : "plugin";
}

}  // namespace granger
