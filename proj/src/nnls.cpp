#include "cwnnk/nnls.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <limits>
#include <vector>

namespace cwnnk {

namespace {

// Solves G_PP z_P = b_P for the passive indices; zero elsewhere.
Eigen::VectorXd solve_passive(const Eigen::MatrixXd& gram, const Eigen::VectorXd& rhs,
                              const std::vector<bool>& passive) {
  std::vector<Eigen::Index> idx;
  for (Eigen::Index i = 0; i < rhs.size(); ++i) {
    if (passive[static_cast<std::size_t>(i)]) idx.push_back(i);
  }
  const auto p = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXd sub(p, p);
  Eigen::VectorXd sub_rhs(p);
  for (Eigen::Index r = 0; r < p; ++r) {
    sub_rhs(r) = rhs(idx[r]);
    for (Eigen::Index c = 0; c < p; ++c) sub(r, c) = gram(idx[r], idx[c]);
  }
  const Eigen::VectorXd sol = sub.ldlt().solve(sub_rhs);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(rhs.size());
  for (Eigen::Index r = 0; r < p; ++r) z(idx[r]) = sol(r);
  return z;
}

}  // namespace

double quadratic_objective(const Eigen::MatrixXd& gram, const Eigen::VectorXd& rhs,
                           const Eigen::VectorXd& x) {
  return 0.5 * x.dot(gram * x) - x.dot(rhs);
}

NnlsResult solve_nnls_gram(const Eigen::MatrixXd& gram, const Eigen::VectorXd& rhs,
                           double dual_tolerance, int max_iterations) {
  const Eigen::Index n = rhs.size();
  const auto un = static_cast<std::size_t>(n);
  if (max_iterations <= 0) max_iterations = 10 * static_cast<int>(n) + 10;

  NnlsResult result;
  result.x = Eigen::VectorXd::Zero(n);
  std::vector<bool> passive(un, false);
  std::vector<bool> blocked(un, false);
  Eigen::VectorXd& x = result.x;

  while (result.iterations < max_iterations) {
    ++result.iterations;
    const Eigen::VectorXd dual = rhs - gram * x;

    Eigen::Index pick = -1;
    double best = dual_tolerance;
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto uj = static_cast<std::size_t>(j);
      if (passive[uj] || blocked[uj]) continue;
      if (dual(j) > best) {
        best = dual(j);
        pick = j;
      }
    }
    if (pick < 0) {
      result.converged = true;
      break;
    }
    passive[static_cast<std::size_t>(pick)] = true;

    bool first_pass = true;
    while (true) {
      const Eigen::VectorXd z = solve_passive(gram, rhs, passive);
      bool feasible = true;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (passive[static_cast<std::size_t>(i)] && z(i) <= 0.0) {
          feasible = false;
          break;
        }
      }
      if (feasible) {
        x = z;
        std::fill(blocked.begin(), blocked.end(), false);
        break;
      }
      if (first_pass && z(pick) <= 0.0) {
        // Rounding made the entering index useless; skip it until x moves.
        passive[static_cast<std::size_t>(pick)] = false;
        blocked[static_cast<std::size_t>(pick)] = true;
        break;
      }
      first_pass = false;

      double alpha = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < n; ++i) {
        if (passive[static_cast<std::size_t>(i)] && z(i) <= 0.0) {
          alpha = std::min(alpha, x(i) / (x(i) - z(i)));
        }
      }
      x += alpha * (z - x);
      for (Eigen::Index i = 0; i < n; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        if (passive[ui] && x(i) <= 1e-15) {
          passive[ui] = false;
          x(i) = 0.0;
        }
      }
      if (std::none_of(passive.begin(), passive.end(), [](bool b) { return b; })) break;
    }
  }

  result.objective = quadratic_objective(gram, rhs, x);
  return result;
}

}  // namespace cwnnk
