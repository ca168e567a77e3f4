#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace sparsesphere {

/// A point on the unit sphere S^2 in Cartesian coordinates.
struct SpherePoint {
  double x = 0.0;
  double y = 0.0;
  double z = 1.0;

  /// Validating constructor; throws DomainError unless |p|^2 = 1 within 1e-12.
  static SpherePoint checked(double x, double y, double z);

  double dot(const SpherePoint& other) const noexcept {
    return x * other.x + y * other.y + z * other.z;
  }

  friend bool operator==(const SpherePoint&, const SpherePoint&) = default;
};

inline constexpr SpherePoint kNorthPole{0.0, 0.0, 1.0};
inline constexpr double kUnitNormTolerance = 1e-12;

/// P_0(z)..P_L(z) by the three-term recurrence.
/// |z| may exceed 1 by at most 1e-14 and is then clamped;
/// anything larger raises DomainError.
std::vector<double> legendre_sequence(double z, int max_degree);

/// Smoothness r, weight gamma and the truncation rule for the series
///   A_r(z) = sum_{l>=1} (2l+1) / (l(l+1))^r P_l(z).
///
/// The truncation level L is the smallest level with
///   (L(L+1))^{1-r} / (r-1) <= truncation_tol,
/// an integral bound on the tail sum_{l>L} (2l+1)/(l(l+1))^r that is valid
/// because the summand decreases in l and |P_l| <= 1. The coefficient table
/// is built once at construction and shared between copies.
class KernelParams {
 public:
  static constexpr double kDefaultTruncationTol = 1e-14;

  KernelParams(double r, double gamma, double truncation_tol = kDefaultTruncationTol);

  double r() const noexcept { return r_; }
  double gamma() const noexcept { return gamma_; }
  double truncation_tol() const noexcept { return truncation_tol_; }
  int truncation_level() const noexcept { return static_cast<int>(coefficients_->size()); }

  /// Same series, different weight. gamma must lie in (0, 1].
  KernelParams with_gamma(double gamma) const;

  /// Series coefficient (2l+1)/(l(l+1))^r for l = 1..L (index l-1).
  std::span<const double> coefficients() const noexcept { return *coefficients_; }

  /// Upper bound on sum_{l>level} (2l+1)/(l(l+1))^r.
  double tail_bound(int level) const;

 private:
  KernelParams(double r, double gamma, double tol, std::shared_ptr<const std::vector<double>> c);

  double r_;
  double gamma_;
  double truncation_tol_;
  std::shared_ptr<const std::vector<double>> coefficients_;
};

/// The weights gamma_{d,k} of a d-fold product space, all sharing r.
class SpaceParams {
 public:
  SpaceParams(double r, std::vector<double> gammas,
              double truncation_tol = KernelParams::kDefaultTruncationTol);

  /// gamma_{d,k} = g^k for k = 1..d.
  static SpaceParams geometric(double r, double g, int d,
                               double truncation_tol = KernelParams::kDefaultTruncationTol);

  int dimension() const noexcept { return static_cast<int>(kernels_.size()); }
  double r() const noexcept { return kernels_.front().r(); }
  double gamma(int k) const { return kernels_.at(static_cast<std::size_t>(k)).gamma(); }
  std::vector<double> gammas() const;
  const KernelParams& kernel(int k) const { return kernels_.at(static_cast<std::size_t>(k)); }

 private:
  std::vector<KernelParams> kernels_;
};

/// A_r(z) truncated at params.truncation_level().
double a_r(double z, const KernelParams& params);

/// Elementwise A_r over a batch of dot products (same truncation as a_r).
void a_r_batch(std::span<const double> z, std::span<double> out, const KernelParams& params);

/// K_{1,gamma}(x, y) = 1 + gamma A_r(x.y).
double kernel_1(const SpherePoint& x, const SpherePoint& y, const KernelParams& params);

/// K_d(x, y) = prod_k K_{1,gamma_k}(x_k, y_k). Throws ContractError on length mismatch.
double kernel_d(std::span<const SpherePoint> x, std::span<const SpherePoint> y,
                const SpaceParams& space);

/// Symmetric matrix G_{hi} = A_r(x_h . x_i). Only the series part; the kernel
/// matrix of K_{1,gamma} is 1 1^T + gamma G.
Eigen::MatrixXd series_gram(std::span<const SpherePoint> points, const KernelParams& params);

namespace detail {

/// 1 + gamma A_r(x.y) without the (0, 1] check on gamma; test helper.
double kernel_1_unchecked(const SpherePoint& x, const SpherePoint& y, const KernelParams& params,
                          double gamma);

/// Dot product clamped to [-1, 1].
double clamped_dot(const SpherePoint& x, const SpherePoint& y) noexcept;

}  // namespace detail

}  // namespace sparsesphere
