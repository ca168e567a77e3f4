#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sparsesphere/da_solver.hpp"
#include "sparsesphere/index_lattice.hpp"
#include "sparsesphere/ladder_profile.hpp"

namespace sparsesphere {

/// Constants of the decay model ||delta_j|| <= sqrt(gamma) C D^j plus the
/// order weights xi_k and the bound parameter eta.
struct WwParams {
  double C = 1.0;
  double D = 0.5;
  double rho = 1.0;
  double eta = 0.5;
  std::vector<double> xi;
  std::vector<double> gammas;

  std::size_t dimension() const noexcept { return gammas.size(); }
  /// Throws ContractError unless C > 0, D in (0,1), rho > 0, eta in (0,1)
  /// and xi, gammas are positive with equal length.
  void validate() const;
  /// (j+1) D^{j rho} <= 1 for j = 1..depth.
  bool growth_criterion(int depth) const;

  /// xi_k = C D for every k.
  static WwParams from_calibration(const CalibrationResult& cal, std::vector<double> gammas,
                                   double eta = 0.5);
  WwParams with_eta(double eta) const;
};

/// prod over k with j_k >= 1 of sqrt(gamma_k) C D^{j_k} / xi_k; 1 at j = 0.
double b_over_xi(const MultiIndex& j, const WwParams& params);

struct WwOrder {
  std::vector<MultiIndex> indices;
  std::vector<double> keys;
  /// First index whose predecessors do not all precede it.
  std::optional<MultiIndex> first_downset_violation;
  /// First index whose key exceeds the key before it.
  std::optional<MultiIndex> first_key_violation;
};

/// Best-first enumeration from 0 by nonincreasing key, ties broken
/// lexicographically. Successors are generated only from emitted indices,
/// so 0 always comes first. With `extents`, indices with j_k >= extents[k]
/// are never generated; `max_norm` likewise caps the 1-norm.
WwOrder build_order(const WwParams& params, std::size_t count,
                    const std::vector<int>* extents = nullptr, int max_norm = kMaxIndexComponent);

/// Number of indices with key > tau, saturating at `cap`.
std::uint64_t count_keys_above(double tau, const WwParams& params, std::uint64_t cap);

/// tau(eps) = (eps / C1)^{1/(1-eta)}.
double ww_threshold(double eps, const WwParams& params);

/// N(eps, d), at least 1. Throws CapacityError above `cap`.
std::uint64_t n_eps(double eps, const WwParams& params, std::uint64_t cap = 1000000000ull);

double c1(const WwParams& params);

/// C(d, eps) (1/eps)^{rho/(1-eta)} at params.eta.
double ww_cost_bound(double eps, const WwParams& params);

/// {0.05, 0.10, ..., 0.95}.
std::vector<double> default_eta_grid();

struct EtaBound {
  double bound = 0.0;
  double eta = 0.0;
};

/// Minimum of ww_cost_bound over the eta grid.
EtaBound min_ww_cost_bound(double eps, const WwParams& params,
                           std::span<const double> eta_grid);

/// Accumulates Delta_j in WW order (restricted to the item box and norm cap)
/// for the first N(eps, d) indices or until the point budget is hit.
DaResult run_ww(const ItemSource& items, const WwParams& params, const DaOptions& options);

}  // namespace sparsesphere
