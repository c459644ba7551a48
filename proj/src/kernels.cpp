#include "cwnnk/kernels.hpp"

#include "cwnnk/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace cwnnk {

void KernelSpec::validate() const {
  if (kind == KernelKind::gaussian && sigma_policy == SigmaPolicy::fixed &&
      !(sigma > 0.0 && std::isfinite(sigma))) {
    throw InputError("gaussian kernel needs a positive finite sigma, got " +
                     std::to_string(sigma));
  }
}

KernelKind parse_kernel_kind(std::string_view name) {
  if (name == "gaussian") return KernelKind::gaussian;
  if (name == "cosine") return KernelKind::cosine;
  throw InputError("unknown kernel '" + std::string(name) + "'");
}

std::string_view to_string(KernelKind kind) {
  return kind == KernelKind::gaussian ? "gaussian" : "cosine";
}

double kernel_value(std::span<const double> a, std::span<const double> b, const KernelSpec& spec) {
  if (a.size() != b.size()) {
    throw InputError("kernel arguments differ in dimension: " + std::to_string(a.size()) +
                     " vs " + std::to_string(b.size()));
  }
  if (a.empty()) throw InputError("kernel arguments must have dimension >= 1");

  double value = 0.0;
  if (spec.kind == KernelKind::gaussian) {
    double sq = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double d = a[i] - b[i];
      sq += d * d;
    }
    value = std::exp(-sq / (2.0 * spec.sigma * spec.sigma));
  } else {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      dot += a[i] * b[i];
      na += a[i] * a[i];
      nb += b[i] * b[i];
    }
    na = std::sqrt(na);
    nb = std::sqrt(nb);
    if (na < kZeroNormThreshold || nb < kZeroNormThreshold) return 0.5;
    value = 0.5 + dot / (2.0 * na * nb);
  }
  return std::clamp(value, 0.0, 1.0);
}

Eigen::MatrixXd kernel_matrix(const FeatureMatrix& x, const KernelSpec& spec) {
  if (x.rows() < 1) throw InputError("kernel_matrix needs at least one row");
  require_finite(x);
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    m(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = kernel_value(row_span(x, i), row_span(x, j), spec);
      m(i, j) = v;
      m(j, i) = v;
    }
  }
  return m;
}

double estimate_sigma(const FeatureMatrix& x, std::size_t k) {
  const auto n = static_cast<std::size_t>(x.rows());
  if (k < 1 || n <= k) {
    throw InputError("estimate_sigma needs N > K >= 1 (N=" + std::to_string(n) +
                     ", K=" + std::to_string(k) + ")");
  }
  std::vector<double> kth(n);
  std::vector<double> dist(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t slot = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      dist[slot++] = (x.row(static_cast<Eigen::Index>(i)) - x.row(static_cast<Eigen::Index>(j))).squaredNorm();
    }
    std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k - 1), dist.end());
    kth[i] = std::sqrt(dist[k - 1]);
  }
  std::sort(kth.begin(), kth.end());
  const double median = n % 2 == 1 ? kth[n / 2] : 0.5 * (kth[n / 2 - 1] + kth[n / 2]);
  return median < 1e-12 ? 1.0 : median;
}

KernelSpec resolve_kernel(const KernelSpec& spec, const FeatureMatrix& x, std::size_t k) {
  if (spec.sigma_policy != SigmaPolicy::median_knn_distance) {
    spec.validate();
    return spec;
  }
  KernelSpec out = spec;
  out.sigma_policy = SigmaPolicy::fixed;
  if (spec.kind == KernelKind::gaussian) out.sigma = estimate_sigma(x, k);
  return out;
}

void require_finite(const FeatureMatrix& x) {
  if (!x.allFinite()) throw InputError("feature matrix contains non-finite entries");
}

}  // namespace cwnnk
