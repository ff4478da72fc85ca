#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>

namespace decoh {

struct LmOptions {
  int max_iterations = 500;
  /// Converged once |dp| <= step_tolerance * (|p| + step_tolerance).
  double step_tolerance = 1e-10;
  double initial_damping = 1e-3;
  /// Per-parameter lower bounds (projected after each step); empty = none.
  Eigen::VectorXd lower_bounds;
  /// Heteroscedasticity-consistent (HC1 sandwich) covariance instead of s^2 (J^T J)^+.
  bool robust_covariance = false;
};

struct LmResult {
  Eigen::VectorXd params;
  /// s^2 (J^T J)^+ with s^2 = RSS / (n - p), or the HC1 sandwich
  /// n / (n - p) (J^T J)^+ J^T diag(r^2) J (J^T J)^+.
  Eigen::MatrixXd covariance;
  double residual_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string message;
};

using ResidualFn = std::function<void(const Eigen::VectorXd& p, Eigen::VectorXd& residuals)>;
using JacobianFn = std::function<void(const Eigen::VectorXd& p, Eigen::MatrixXd& jacobian)>;

/// Damped Gauss-Newton (Marquardt scaling). Uses the analytic Jacobian when
/// given, central differences otherwise.
LmResult levenberg_marquardt(const ResidualFn& residual, const std::optional<JacobianFn>& jacobian,
                             Eigen::VectorXd start, Eigen::Index n_residuals, const LmOptions& options = {});

}  // namespace decoh
