#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <span>
#include <string_view>

namespace cwnnk {

// Node features, one row per sample.
using FeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline std::span<const double> row_span(const FeatureMatrix& x, Eigen::Index row) {
  return {x.data() + row * x.cols(), static_cast<std::size_t>(x.cols())};
}

enum class KernelKind { gaussian, cosine };

enum class SigmaPolicy { fixed, median_knn_distance };

struct KernelSpec {
  KernelKind kind = KernelKind::cosine;
  double sigma = 1.0;  // feature units, gaussian only
  SigmaPolicy sigma_policy = SigmaPolicy::median_knn_distance;

  static KernelSpec gaussian(double sigma) {
    return {KernelKind::gaussian, sigma, SigmaPolicy::fixed};
  }
  static KernelSpec gaussian_adaptive() {
    return {KernelKind::gaussian, 1.0, SigmaPolicy::median_knn_distance};
  }
  static KernelSpec cosine() { return {KernelKind::cosine, 1.0, SigmaPolicy::fixed}; }

  // Throws InputError for a fixed gaussian bandwidth that is not positive.
  void validate() const;
};

KernelKind parse_kernel_kind(std::string_view name);
std::string_view to_string(KernelKind kind);

// Norm below which a cosine argument is treated as the zero vector.
inline constexpr double kZeroNormThreshold = 1e-12;

// Gaussian: exp(-|a-b|^2 / 2 sigma^2). Cosine: 1/2 + <a,b> / (2 |a| |b|), and
// 0.5 when either argument has (near) zero norm. Result is clamped to [0, 1].
// A median_knn_distance spec must be resolved first; its sigma field is used as-is.
double kernel_value(std::span<const double> a, std::span<const double> b, const KernelSpec& spec);

// Dense N x N similarity matrix. The diagonal is exactly 1.
Eigen::MatrixXd kernel_matrix(const FeatureMatrix& x, const KernelSpec& spec);

// Median over nodes of the distance to the k-th nearest other node; 1.0 when
// that median is below 1e-12.
double estimate_sigma(const FeatureMatrix& x, std::size_t k);

// Returns a fixed-bandwidth spec. For median_knn_distance the bandwidth is
// estimated from x with k neighbors; other specs are returned unchanged.
KernelSpec resolve_kernel(const KernelSpec& spec, const FeatureMatrix& x, std::size_t k);

// Throws InputError when any entry is NaN or infinite.
void require_finite(const FeatureMatrix& x);

}  // namespace cwnnk
