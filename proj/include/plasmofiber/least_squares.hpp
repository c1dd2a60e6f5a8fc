#pragma once

#include <Eigen/Dense>

#include <functional>

namespace plasmofiber {

using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd &)>;

struct LmOptions {
  int max_iterations = 500;
  double step_tolerance = 1e-9; // step norm relative to the parameter norm
  double initial_lambda = 1e-3;
};

struct LmResult {
  Eigen::VectorXd params;
  Eigen::MatrixXd covariance; // (J^T J)^-1 at the solution
  double cost = 0.0;          // sum of squared residuals
  int iterations = 0;
  bool converged = false;
};

// Levenberg-Marquardt on box-bounded parameters (bounds may be +/-inf). The
// Jacobian is taken by central differences. Steps are projected onto the box.
LmResult levenberg_marquardt(const ResidualFn &residuals, Eigen::VectorXd start,
                             const Eigen::VectorXd &lower, const Eigen::VectorXd &upper,
                             const LmOptions &options = {});

struct LinearFit {
  Eigen::VectorXd params;
  Eigen::MatrixXd covariance;
  double chi2 = 0.0;
};

// Weighted linear least squares min sum w_i (A x - b)_i^2 with covariance
// (A^T W A)^-1.
LinearFit weighted_linear_fit(const Eigen::MatrixXd &design, const Eigen::VectorXd &target,
                              const Eigen::VectorXd &weights);

} // namespace plasmofiber
