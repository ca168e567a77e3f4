#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sparsesphere/index_lattice.hpp"
#include "sparsesphere/ladder_profile.hpp"

namespace sparsesphere {

/// Profit p_j = ||Delta_j||^2, cost nu_j and efficiency r_j = p_j / nu_j.
struct KnapsackItem {
  MultiIndex index;
  double p = 0.0;
  std::uint64_t nu = 1;
  double r = 0.0;
};

/// Supplies knapsack items for indices inside a finite box.
class ItemSource {
 public:
  virtual ~ItemSource() = default;
  virtual std::size_t dimension() const = 0;
  /// Number of available levels along axis k; indices with j_k >= depth(k)
  /// have no item.
  virtual int depth(std::size_t k) const = 0;
  /// The item for j, or nullopt when j lies outside the box.
  virtual std::optional<KnapsackItem> item(const MultiIndex& j) const = 0;

  bool in_box(const MultiIndex& j) const;
};

/// p_j = prod_k delta2_k[j_k], nu_j = prod_k nu_k[j_k].
class SeparableItems final : public ItemSource {
 public:
  struct Axis {
    std::vector<double> delta2;
    std::vector<std::uint64_t> nu;
  };

  explicit SeparableItems(std::vector<Axis> axes);
  /// One axis per profile, truncated before the first terminal level.
  static SeparableItems from_profiles(std::span<const LadderProfile> profiles);

  std::size_t dimension() const override { return axes_.size(); }
  int depth(std::size_t k) const override;
  std::optional<KnapsackItem> item(const MultiIndex& j) const override;
  const Axis& axis(std::size_t k) const { return axes_.at(k); }

 private:
  std::vector<Axis> axes_;
};

/// Arbitrary profits and costs tabulated on a box, row-major with the last
/// axis fastest.
class BoxItems final : public ItemSource {
 public:
  BoxItems(std::vector<int> extents, std::vector<double> p, std::vector<std::uint64_t> nu);

  std::size_t dimension() const override { return extents_.size(); }
  int depth(std::size_t k) const override { return extents_.at(k); }
  std::optional<KnapsackItem> item(const MultiIndex& j) const override;
  const std::vector<int>& extents() const noexcept { return extents_; }

 private:
  std::vector<int> extents_;
  std::vector<double> p_;
  std::vector<std::uint64_t> nu_;
};

enum class TerminalReason {
  kErrorTargetMet,
  kPointBudget,
  kLadderExhausted,
  kCancellationGuard,
  kIndexNormCap,
  /// WW only: all indices above the N(eps, d) threshold were used.
  kCutoffReached,
};

std::string to_string(TerminalReason reason);

struct TraceStep {
  MultiIndex index;
  double p = 0.0;
  std::uint64_t nu = 0;
  double r = 0.0;
  double p_cum = 0.0;
  std::uint64_t cost_cum = 0;
  double error = 1.0;
};

struct DaTrace {
  std::vector<TraceStep> steps;
  TerminalReason terminal = TerminalReason::kErrorTargetMet;
};

struct DaOptions {
  double eps = 1e-3;
  std::uint64_t max_points = 100000;
  /// Indices with 1-norm above this are never selected.
  int max_index_norm = 20;
};

struct DaResult {
  IndexSet set;
  DaTrace trace;
};

/// Candidates with p below this multiple of machine epsilon times the
/// current squared error stop the run.
inline constexpr double kCancellationFactor = 1e3;

/// Greedy down-set knapsack: starts from {0} and repeatedly inserts the
/// frontier index with the largest r_j (ties: lexicographically smallest)
/// until the error target, the point budget, the norm cap or the box is hit.
/// Frontier indices outside the box are skipped.
DaResult run_da(const ItemSource& items, const DaOptions& options);

/// Per-dimension profiles of one ladder for the weights of `space`.
std::vector<LadderProfile> profiles_for_space(const LadderSolver& solver,
                                              const SpaceParams& space);

/// Minimal cost of a down-set J inside the box with p(J) >= P, by exhaustive
/// enumeration. Returns nullopt when no down-set in the box reaches P.
std::optional<std::uint64_t> brute_force_downset_opt(const BoxItems& items, double P,
                                                     std::size_t max_downsets = 1000000);

/// All (p, cost) pairs of the down-sets in a box, reduced to the Pareto
/// front so many thresholds can be queried after one enumeration.
class DownsetFront {
 public:
  explicit DownsetFront(const BoxItems& items, std::size_t max_downsets = 1000000);

  std::optional<std::uint64_t> min_cost(double P) const;
  std::size_t downsets_enumerated() const noexcept { return enumerated_; }

 private:
  // Sorted by p descending; cost_[i] is the minimum cost over the first i+1.
  std::vector<long double> p_;
  std::vector<std::uint64_t> cost_;
  std::size_t enumerated_ = 0;
};

/// CSV with header step,index,p_j,nu_j,r_j,P_cum,Cost_cum,Error.
void write_trace_csv(std::ostream& out, const DaTrace& trace);
/// CSV with header Cost,Error and a trailing "# terminal: <reason>" line.
void write_convergence_csv(std::ostream& out, const DaTrace& trace);

}  // namespace sparsesphere
