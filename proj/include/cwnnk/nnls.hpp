#pragma once

#include <Eigen/Core>

namespace cwnnk {

struct NnlsResult {
  Eigen::VectorXd x;
  double objective = 0.0;  // 0.5 x'Gx - x'b
  int iterations = 0;
  bool converged = false;
};

// Lawson-Hanson active-set solver for the quadratic form of NNLS:
//
//   min_{x >= 0} 0.5 x'Gx - x'b
//
// G must be symmetric positive definite (a kernel Gram matrix plus jitter).
// The passive-set subsystem is re-factored with LDLT on each inner step,
// which is fine for the K <= ~50 systems this engine solves.
NnlsResult solve_nnls_gram(const Eigen::MatrixXd& gram, const Eigen::VectorXd& rhs,
                           double dual_tolerance = 1e-12, int max_iterations = 0);

double quadratic_objective(const Eigen::MatrixXd& gram, const Eigen::VectorXd& rhs,
                           const Eigen::VectorXd& x);

}  // namespace cwnnk
