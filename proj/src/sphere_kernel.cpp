#include "sparsesphere/sphere_kernel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "sparsesphere/errors.hpp"

namespace sparsesphere {

namespace {

constexpr double kLegendreDomainSlack = 1e-14;
// Guard against tolerances so small that the series would never be cut off.
constexpr int kMaxTruncationLevel = 1 << 22;

double clamp_unit(double z) {
  if (!(std::abs(z) <= 1.0 + kLegendreDomainSlack)) {
    throw DomainError("Legendre argument " + std::to_string(z) + " outside [-1, 1]");
  }
  return std::clamp(z, -1.0, 1.0);
}

void check_gamma(double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw ContractError("kernel weight gamma must lie in (0, 1], got " + std::to_string(gamma));
  }
}

double tail_integral(double r, int level) {
  const double l = static_cast<double>(level);
  return std::pow(l * (l + 1.0), 1.0 - r) / (r - 1.0);
}

std::shared_ptr<const std::vector<double>> make_coefficients(double r, double tol) {
  int level = 1;
  while (tail_integral(r, level) > tol) {
    if (level >= kMaxTruncationLevel) {
      throw CapacityError("A_r truncation level exceeds " + std::to_string(kMaxTruncationLevel) +
                          " for tolerance " + std::to_string(tol));
    }
    // Grow geometrically, then bisect back to the smallest admissible level.
    level *= 2;
  }
  int lo = level / 2;
  int hi = level;
  while (hi - lo > 1) {
    const int mid = lo + (hi - lo) / 2;
    if (tail_integral(r, mid) <= tol) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  auto c = std::make_shared<std::vector<double>>(static_cast<std::size_t>(hi));
  for (int l = 1; l <= hi; ++l) {
    const double dl = static_cast<double>(l);
    (*c)[static_cast<std::size_t>(l - 1)] = (2.0 * dl + 1.0) / std::pow(dl * (dl + 1.0), r);
  }
  return c;
}

}  // namespace

SpherePoint SpherePoint::checked(double x, double y, double z) {
  const double n2 = x * x + y * y + z * z;
  if (!(std::abs(n2 - 1.0) <= kUnitNormTolerance)) {
    throw DomainError("point not on unit sphere: |p|^2 = " + std::to_string(n2));
  }
  return SpherePoint{x, y, z};
}

std::vector<double> legendre_sequence(double z, int max_degree) {
  if (max_degree < 0) throw ContractError("legendre_sequence: negative degree");
  z = clamp_unit(z);
  std::vector<double> p(static_cast<std::size_t>(max_degree) + 1);
  p[0] = 1.0;
  if (max_degree >= 1) p[1] = z;
  for (int l = 1; l < max_degree; ++l) {
    const double dl = static_cast<double>(l);
    p[static_cast<std::size_t>(l) + 1] =
        ((2.0 * dl + 1.0) * z * p[static_cast<std::size_t>(l)] -
         dl * p[static_cast<std::size_t>(l) - 1]) /
        (dl + 1.0);
  }
  return p;
}

KernelParams::KernelParams(double r, double gamma, double truncation_tol)
    : r_(r), gamma_(gamma), truncation_tol_(truncation_tol) {
  if (!(r > 1.5)) {
    throw ContractError("smoothness r must exceed 3/2, got " + std::to_string(r));
  }
  check_gamma(gamma);
  if (!(truncation_tol > 0.0)) {
    throw ContractError("truncation_tol must be positive, got " + std::to_string(truncation_tol));
  }
  coefficients_ = make_coefficients(r, truncation_tol);
}

KernelParams::KernelParams(double r, double gamma, double tol,
                           std::shared_ptr<const std::vector<double>> c)
    : r_(r), gamma_(gamma), truncation_tol_(tol), coefficients_(std::move(c)) {}

KernelParams KernelParams::with_gamma(double gamma) const {
  check_gamma(gamma);
  return KernelParams(r_, gamma, truncation_tol_, coefficients_);
}

double KernelParams::tail_bound(int level) const {
  if (level < 1) throw ContractError("tail_bound: level must be >= 1");
  return tail_integral(r_, level);
}

SpaceParams::SpaceParams(double r, std::vector<double> gammas, double truncation_tol) {
  if (gammas.empty()) throw ContractError("SpaceParams: dimension must be >= 1");
  const KernelParams base(r, gammas.front(), truncation_tol);
  kernels_.reserve(gammas.size());
  for (double g : gammas) kernels_.push_back(base.with_gamma(g));
}

SpaceParams SpaceParams::geometric(double r, double g, int d, double truncation_tol) {
  if (d < 1) throw ContractError("SpaceParams: dimension must be >= 1");
  std::vector<double> gammas;
  double gk = 1.0;
  for (int k = 1; k <= d; ++k) {
    gk *= g;
    gammas.push_back(gk);
  }
  return SpaceParams(r, std::move(gammas), truncation_tol);
}

std::vector<double> SpaceParams::gammas() const {
  std::vector<double> out;
  for (const auto& k : kernels_) out.push_back(k.gamma());
  return out;
}

void a_r_batch(std::span<const double> z, std::span<double> out, const KernelParams& params) {
  if (z.size() != out.size()) throw ContractError("a_r_batch: size mismatch");
  const auto coeff = params.coefficients();
  const int levels = static_cast<int>(coeff.size());

  constexpr std::size_t kChunk = 256;
  std::array<double, kChunk> zc{}, p_prev{}, p{}, sum{};
  for (std::size_t base = 0; base < z.size(); base += kChunk) {
    const std::size_t n = std::min(kChunk, z.size() - base);
    for (std::size_t i = 0; i < n; ++i) {
      zc[i] = clamp_unit(z[base + i]);
      p_prev[i] = 1.0;
      p[i] = zc[i];
      sum[i] = coeff[0] * zc[i];
    }
    for (int l = 1; l < levels; ++l) {
      const double dl = static_cast<double>(l);
      const double alpha = (2.0 * dl + 1.0) / (dl + 1.0);
      const double beta = dl / (dl + 1.0);
      const double c = coeff[static_cast<std::size_t>(l)];
      for (std::size_t i = 0; i < n; ++i) {
        const double next = alpha * zc[i] * p[i] - beta * p_prev[i];
        p_prev[i] = p[i];
        p[i] = next;
        sum[i] += c * next;
      }
    }
    std::copy_n(sum.begin(), n, out.begin() + static_cast<std::ptrdiff_t>(base));
  }
}

double a_r(double z, const KernelParams& params) {
  double out = 0.0;
  a_r_batch(std::span<const double>(&z, 1), std::span<double>(&out, 1), params);
  return out;
}

namespace detail {

double clamped_dot(const SpherePoint& x, const SpherePoint& y) noexcept {
  return std::clamp(x.dot(y), -1.0, 1.0);
}

double kernel_1_unchecked(const SpherePoint& x, const SpherePoint& y, const KernelParams& params,
                          double gamma) {
  return 1.0 + gamma * a_r(clamped_dot(x, y), params);
}

}  // namespace detail

double kernel_1(const SpherePoint& x, const SpherePoint& y, const KernelParams& params) {
  return detail::kernel_1_unchecked(x, y, params, params.gamma());
}

double kernel_d(std::span<const SpherePoint> x, std::span<const SpherePoint> y,
                const SpaceParams& space) {
  if (x.size() != y.size() || static_cast<int>(x.size()) != space.dimension()) {
    throw ContractError("kernel_d: tuple lengths " + std::to_string(x.size()) + ", " +
                        std::to_string(y.size()) + " do not match dimension " +
                        std::to_string(space.dimension()));
  }
  double value = 1.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    value *= kernel_1(x[k], y[k], space.kernel(static_cast<int>(k)));
  }
  return value;
}

Eigen::MatrixXd series_gram(std::span<const SpherePoint> points, const KernelParams& params) {
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd g(n, n);
  std::vector<double> z(points.size()), row(points.size());
  for (Eigen::Index h = 0; h < n; ++h) {
    const auto len = static_cast<std::size_t>(n - h);
    for (std::size_t i = 0; i < len; ++i) {
      z[i] = detail::clamped_dot(points[static_cast<std::size_t>(h)],
                                 points[static_cast<std::size_t>(h) + i]);
    }
    a_r_batch(std::span<const double>(z.data(), len), std::span<double>(row.data(), len), params);
    for (std::size_t i = 0; i < len; ++i) {
      const auto col = h + static_cast<Eigen::Index>(i);
      g(h, col) = row[i];
      g(col, h) = row[i];
    }
  }
  return g;
}

}  // namespace sparsesphere
