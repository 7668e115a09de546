#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace vbs {

struct ScalingPoint {
  int boundary_size = 0;
  double per_bond = 0;
  double stderr_ = 0;  // 0 for exact values
};

struct ScalingDataset {
  std::vector<ScalingPoint> points;
  std::string family;
  int nx = 0;
};

/// Checks distinct sizes >= 1 and entropies in (0, ln 2 + 1e-9].
void validate_dataset(const ScalingDataset& data);

/// S/|L| = C / |L|^Delta + alpha.
struct AreaLawFit {
  double c = 0, delta = 0, alpha = 0;
  double c_err = 0, delta_err = 0, alpha_err = 0;
  Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();
  double residual_norm = 0;  // weighted
  double gradient_norm = 0;
  int iterations = 0;
  bool damped = false;  // the damping fallback was used
  int points = 0;

  double evaluate(double boundary_size) const;
};

/// Weighted Gauss-Newton with backtracking. Weights are 1/stderr^2 when every
/// point carries an error, uniform otherwise.
AreaLawFit fit_area_law(const ScalingDataset& data);

struct ExtrapolationReport {
  double alpha = 0, alpha_err = 0;
  double gap_to_ln2 = 0;
  bool below_ln2 = false;  // alpha < ln 2 - 3 stderr
  std::string area_law_form;  // "S = a |L| + C |L|^(1 - Delta)"
  std::string summary;
};

ExtrapolationReport extrapolation_report(const AreaLawFit& fit);

/// Value with the error on its last digit in parentheses: (0.1123, 0.0012) -> "0.112(1)".
std::string format_with_uncertainty(double value, double error);

/// Two columns "|L| fitted" from `from` to `to`, `samples` points.
std::string fitted_curve(const AreaLawFit& fit, double from, double to, int samples);

}  // namespace vbs
