#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "sparsesphere/design.hpp"
#include "sparsesphere/index_lattice.hpp"
#include "sparsesphere/ladder_profile.hpp"
#include "sparsesphere/sphere_kernel.hpp"

namespace sparsesphere {

/// Default cap on the number of tensor-product terms expanded by materialize.
inline constexpr std::uint64_t kMaterializeCapacity = 10000000;
/// Weights below this fraction of the largest magnitude are dropped.
inline constexpr double kPruneRelative = 1e-15;

/// c_j = sum over z in {0,1}^d with j + z in I of (-1)^{|z|}; only nonzero
/// coefficients are returned.
std::map<MultiIndex, int> combination_coefficients(const IndexSet& set);

/// A cubature rule on (S^2)^d whose nodes are tuples of ladder points.
class ProductRule {
 public:
  std::size_t dimension() const noexcept { return d_; }
  std::size_t size() const noexcept { return weights_.size(); }
  const std::vector<double>& weights() const noexcept { return weights_; }

  /// Ladder point ids of node i, one per dimension.
  std::span<const std::uint32_t> ids(std::size_t i) const {
    return {ids_.data() + i * d_, d_};
  }
  std::vector<SpherePoint> node(std::size_t i) const;

  /// 1 - p(I) as accumulated from the per-dimension profiles.
  double declared_e2() const noexcept { return declared_e2_; }
  const IndexSet& index_set() const noexcept { return set_; }
  /// Nodes dropped because their merged weight vanished.
  std::size_t pruned() const noexcept { return pruned_; }
  std::span<const SpherePoint> ladder_points() const noexcept { return points_; }

 private:
  friend ProductRule materialize(const IndexSet&, std::span<const LadderProfile>,
                                 const DesignLadder&, std::uint64_t);

  explicit ProductRule(IndexSet set) : set_(std::move(set)) {}

  std::size_t d_ = 0;
  std::vector<std::uint32_t> ids_;
  std::vector<double> weights_;
  std::vector<SpherePoint> points_;
  double declared_e2_ = 1.0;
  IndexSet set_;
  std::size_t pruned_ = 0;
};

/// Expands sum_j c_j (x)_k q^{(k)}_{j_k}, merging coincident tuples. All
/// dimensions share `ladder`; profiles[k] holds the weights for gamma_k.
ProductRule materialize(const IndexSet& set, std::span<const LadderProfile> profiles,
                        const DesignLadder& ladder,
                        std::uint64_t capacity = kMaterializeCapacity);

/// 1 - 2 sum w + sum_{i,i'} w_i w_i' K_d(x_i, x_i'), with K_d evaluated from
/// the series Gram matrix of the ladder points.
double verify_error(const ProductRule& rule, const Eigen::MatrixXd& ladder_gram,
                    const SpaceParams& space);

/// Same quadratic form with every kernel value computed by kernel_d.
double verify_error_direct(const ProductRule& rule, const SpaceParams& space);

using Integrand = std::function<double(std::span<const SpherePoint>)>;

/// sum_i w_i f(x_i).
double integrate(const ProductRule& rule, const Integrand& f);

/// CSV with header w,x1,y1,z1,...,xd,yd,zd.
void write_rule_csv(std::ostream& out, const ProductRule& rule);

}  // namespace sparsesphere
