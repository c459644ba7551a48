#pragma once

// Independent reference implementations used to check the engine. Nothing
// here calls into cwnnk beyond plain data types; the linear algebra is
// hand-rolled so it shares no code path with the Eigen-based solver.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

namespace oracle {

using Row = std::vector<double>;
using Rows = std::vector<Row>;
using Mat = std::vector<std::vector<double>>;

enum class Kind { gaussian, cosine };

inline double kernel(const Row& a, const Row& b, Kind kind, double sigma) {
  if (kind == Kind::gaussian) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::min(1.0, std::max(0.0, std::exp(-s / (2 * sigma * sigma))));
  }
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (std::sqrt(aa) < 1e-12 || std::sqrt(bb) < 1e-12) return 0.5;
  return std::min(1.0, std::max(0.0, 0.5 + ab / (2 * std::sqrt(aa) * std::sqrt(bb))));
}

inline double dist(const Row& a, const Row& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// Median over nodes of the K-th nearest-neighbor distance, by full sorting.
inline double median_kth_distance(const Rows& x, std::size_t k) {
  std::vector<double> kth;
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::vector<double> d;
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (j != i) d.push_back(dist(x[i], x[j]));
    }
    std::sort(d.begin(), d.end());
    kth.push_back(d[k - 1]);
  }
  std::sort(kth.begin(), kth.end());
  const std::size_t n = kth.size();
  const double med = n % 2 ? kth[n / 2] : (kth[n / 2 - 1] + kth[n / 2]) / 2;
  return med < 1e-12 ? 1.0 : med;
}

// All other nodes sorted by (similarity desc, id asc), first k.
inline std::vector<std::size_t> knn(const Rows& x, std::size_t q, std::size_t k, Kind kind,
                                    double sigma) {
  std::vector<std::size_t> ids;
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (j != q) ids.push_back(j);
  }
  // similarities in [0,1] bucketed to 1e-12 so rounding noise cannot split ties
  std::vector<long long> sim(x.size());
  for (std::size_t j : ids) sim[j] = std::llround(kernel(x[q], x[j], kind, sigma) * 1e12);
  std::stable_sort(ids.begin(), ids.end(), [&](std::size_t a, std::size_t b) { return sim[a] > sim[b]; });
  ids.resize(k);
  return ids;
}

inline double objective(const Mat& g, const Row& b, const Row& x) {
  double v = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = 0; j < x.size(); ++j) v += 0.5 * x[i] * g[i][j] * x[j];
    v -= x[i] * b[i];
  }
  return v;
}

// Gaussian elimination with partial pivoting. Returns false when singular.
inline bool solve_dense(Mat a, Row b, Row& x) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
    }
    if (std::abs(a[p][c]) < 1e-300) return false;
    std::swap(a[p], a[c]);
    std::swap(b[p], b[c]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  x.assign(n, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
    x[i] = s / a[i][i];
  }
  return true;
}

// Exact NNLS by enumerating every support: the optimum of a strictly convex
// QP over the orthant is the unconstrained optimum of some face, and among
// faces whose optimum is strictly positive it has the lowest objective.
inline Row nnls_exhaustive(const Mat& g, const Row& b) {
  const std::size_t n = b.size();
  Row best(n, 0.0);
  double best_obj = 0.0;
  for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
    std::vector<std::size_t> s;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask >> i & 1) s.push_back(i);
    }
    Mat sub(s.size(), Row(s.size()));
    Row rhs(s.size()), z;
    for (std::size_t i = 0; i < s.size(); ++i) {
      rhs[i] = b[s[i]];
      for (std::size_t j = 0; j < s.size(); ++j) sub[i][j] = g[s[i]][s[j]];
    }
    if (!solve_dense(sub, rhs, z)) continue;
    if (std::any_of(z.begin(), z.end(), [](double v) { return v <= 0; })) continue;
    Row full(n, 0.0);
    for (std::size_t i = 0; i < s.size(); ++i) full[s[i]] = z[i];
    const double obj = objective(g, b, full);
    if (obj < best_obj) {
      best_obj = obj;
      best = full;
    }
  }
  return best;
}

// Accelerated projected gradient (FISTA with adaptive restart), run until the
// iterate stops moving.
inline Row nnls_projected_gradient(const Mat& g, const Row& b, int max_iter = 200000) {
  const std::size_t n = b.size();
  double lip = 0;  // row-sum bound on the largest eigenvalue
  for (const auto& r : g) {
    double s = 0;
    for (double v : r) s += std::abs(v);
    lip = std::max(lip, s);
  }
  const double step = 1.0 / lip;
  Row x(n, 0.0), y(n, 0.0), x_prev(n, 0.0);
  double t = 1.0;
  double prev_obj = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iter; ++it) {
    Row grad(n);
    for (std::size_t i = 0; i < n; ++i) {
      double s = -b[i];
      for (std::size_t j = 0; j < n; ++j) s += g[i][j] * y[j];
      grad[i] = s;
    }
    x_prev = x;
    double moved = 0;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = std::max(0.0, y[i] - step * grad[i]);
      moved = std::max(moved, std::abs(x[i] - x_prev[i]));
    }
    const double obj = objective(g, b, x);
    if (obj > prev_obj) {
      t = 1.0;  // restart momentum
      y = x;
    } else {
      const double t_next = (1 + std::sqrt(1 + 4 * t * t)) / 2;
      for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + (t - 1) / t_next * (x[i] - x_prev[i]);
      t = t_next;
    }
    prev_obj = obj;
    if (moved < 1e-15 && it > 10) break;
  }
  return x;
}

struct NnkProblem {
  Mat gram;  // candidate-candidate kernel, diagonal 1 + jitter
  Row rhs;   // candidate-query kernel
};

inline NnkProblem nnk_problem(const Rows& x, std::size_t q, const std::vector<std::size_t>& cand,
                              Kind kind, double sigma, double jitter) {
  NnkProblem p;
  p.gram.assign(cand.size(), Row(cand.size()));
  for (std::size_t i = 0; i < cand.size(); ++i) {
    p.rhs.push_back(kernel(x[cand[i]], x[q], kind, sigma));
    for (std::size_t j = 0; j < cand.size(); ++j) {
      p.gram[i][j] = i == j ? 1.0 + jitter : kernel(x[cand[i]], x[cand[j]], kind, sigma);
    }
  }
  return p;
}

// Full LOO classification of every node: KNN, exact NNLS, 1e-8 pruning,
// normalized vote, argmax with lowest-class ties. Returns -1 for nodes whose
// weights all prune away.
inline std::vector<int> loo_predictions(const Rows& x, const std::vector<int>& y, int num_classes,
                                        std::size_t k, Kind kind, bool median_sigma,
                                        double sigma = 1.0) {
  if (kind == Kind::gaussian && median_sigma) sigma = median_kth_distance(x, k);
  std::vector<int> out;
  for (std::size_t q = 0; q < x.size(); ++q) {
    const auto cand = knn(x, q, k, kind, sigma);
    const auto p = nnk_problem(x, q, cand, kind, sigma, 1e-8);
    const Row theta = nnls_exhaustive(p.gram, p.rhs);
    std::vector<double> votes(static_cast<std::size_t>(num_classes), 0.0);
    double total = 0;
    for (std::size_t i = 0; i < cand.size(); ++i) {
      if (theta[i] >= 1e-8) {
        votes[static_cast<std::size_t>(y[cand[i]])] += theta[i];
        total += theta[i];
      }
    }
    if (total == 0) {
      out.push_back(-1);
      continue;
    }
    // lowest class among those within 1e-6 of the top normalized vote
    const double top = *std::max_element(votes.begin(), votes.end());
    int best = 0;
    while (votes[static_cast<std::size_t>(best)] / total < top / total - 1e-6) ++best;
    out.push_back(best);
  }
  return out;
}

}  // namespace oracle
