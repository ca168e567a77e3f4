#include "sparsesphere/da_solver.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <queue>

#include "sparsesphere/errors.hpp"

namespace sparsesphere {

namespace {

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t out = 0;
  if (__builtin_mul_overflow(a, b, &out)) throw CapacityError("cost product overflows");
  return out;
}

struct ByEfficiency {
  // Max-heap on r; equal r prefers the lexicographically smaller index.
  bool operator()(const KnapsackItem& a, const KnapsackItem& b) const {
    if (a.r != b.r) return a.r < b.r;
    return a.index > b.index;
  }
};

}  // namespace

bool ItemSource::in_box(const MultiIndex& j) const {
  if (j.size() != dimension()) throw ContractError("index dimension mismatch");
  for (std::size_t k = 0; k < j.size(); ++k)
    if (j[k] >= depth(k)) return false;
  return true;
}

SeparableItems::SeparableItems(std::vector<Axis> axes) : axes_(std::move(axes)) {
  if (axes_.empty()) throw ContractError("SeparableItems: no axes");
  for (const auto& a : axes_) {
    if (a.delta2.empty() || a.delta2.size() != a.nu.size()) {
      throw ContractError("SeparableItems: axis tables must be nonempty and equal length");
    }
    for (std::size_t j = 0; j < a.delta2.size(); ++j) {
      if (!(a.delta2[j] > 0.0) || a.nu[j] == 0) {
        throw ContractError("SeparableItems: profits must be positive and costs >= 1");
      }
    }
  }
}

SeparableItems SeparableItems::from_profiles(std::span<const LadderProfile> profiles) {
  std::vector<Axis> axes;
  for (const auto& prof : profiles) {
    const auto usable = static_cast<std::size_t>(prof.usable_levels());
    Axis a;
    a.delta2.assign(prof.delta2.begin(), prof.delta2.begin() + usable);
    for (std::size_t j = 0; j < usable; ++j) a.nu.push_back(prof.nu[j]);
    axes.push_back(std::move(a));
  }
  return SeparableItems(std::move(axes));
}

int SeparableItems::depth(std::size_t k) const {
  return static_cast<int>(axes_.at(k).delta2.size());
}

std::optional<KnapsackItem> SeparableItems::item(const MultiIndex& j) const {
  if (!in_box(j)) return std::nullopt;
  KnapsackItem it{j, 1.0, 1, 0.0};
  for (std::size_t k = 0; k < j.size(); ++k) {
    const auto l = static_cast<std::size_t>(j[k]);
    it.p *= axes_[k].delta2[l];
    it.nu = checked_mul(it.nu, axes_[k].nu[l]);
  }
  it.r = it.p / static_cast<double>(it.nu);
  return it;
}

BoxItems::BoxItems(std::vector<int> extents, std::vector<double> p, std::vector<std::uint64_t> nu)
    : extents_(std::move(extents)), p_(std::move(p)), nu_(std::move(nu)) {
  if (extents_.empty()) throw ContractError("BoxItems: no axes");
  std::size_t cells = 1;
  for (int e : extents_) {
    if (e < 1) throw ContractError("BoxItems: extents must be positive");
    cells *= static_cast<std::size_t>(e);
  }
  if (p_.size() != cells || nu_.size() != cells) {
    throw ContractError("BoxItems: table size does not match the box");
  }
  for (std::size_t c = 0; c < cells; ++c) {
    if (!(p_[c] > 0.0) || nu_[c] == 0) {
      throw ContractError("BoxItems: profits must be positive and costs >= 1");
    }
  }
}

std::optional<KnapsackItem> BoxItems::item(const MultiIndex& j) const {
  if (!in_box(j)) return std::nullopt;
  std::size_t flat = 0;
  for (std::size_t k = 0; k < j.size(); ++k) {
    flat = flat * static_cast<std::size_t>(extents_[k]) + static_cast<std::size_t>(j[k]);
  }
  return KnapsackItem{j, p_[flat], nu_[flat], p_[flat] / static_cast<double>(nu_[flat])};
}

std::string to_string(TerminalReason reason) {
  switch (reason) {
    case TerminalReason::kErrorTargetMet: return "error_target_met";
    case TerminalReason::kPointBudget: return "point_budget";
    case TerminalReason::kLadderExhausted: return "ladder_exhausted";
    case TerminalReason::kCancellationGuard: return "cancellation_guard";
    case TerminalReason::kIndexNormCap: return "index_norm_cap";
    case TerminalReason::kCutoffReached: return "cutoff_reached";
  }
  return "unknown";
}

DaResult run_da(const ItemSource& items, const DaOptions& options) {
  if (!(options.eps > 0.0 && options.eps < 1.0)) {
    throw ContractError("run_da: eps must lie in (0, 1)");
  }
  if (options.max_points < 1) throw ContractError("run_da: max_points must be >= 1");
  const std::size_t d = items.dimension();
  DaResult res{IndexSet(d), {}};
  auto& trace = res.trace;

  const MultiIndex zero(d);
  auto first = items.item(zero);
  if (!first) throw ContractError("run_da: item source has no level 0");

  std::priority_queue<KnapsackItem, std::vector<KnapsackItem>, ByEfficiency> heap;
  bool norm_capped = false;
  long double P = 0.0L;
  std::uint64_t cost = 0;

  auto take = [&](const KnapsackItem& it) {
    for (auto& s : res.set.insert(it.index)) {
      if (s.norm1() > options.max_index_norm) {
        norm_capped = true;
        continue;
      }
      if (auto cand = items.item(s)) heap.push(std::move(*cand));
    }
    P += it.p;
    cost += it.nu;
    const double err = std::sqrt(std::max(0.0L, 1.0L - P));
    trace.steps.push_back({it.index, it.p, it.nu, it.r, static_cast<double>(P), cost,
                           static_cast<double>(err)});
  };

  take(*first);
  while (true) {
    const long double e2 = std::max(0.0L, 1.0L - P);
    if (std::sqrt(e2) <= options.eps) {
      trace.terminal = TerminalReason::kErrorTargetMet;
      break;
    }
    if (heap.empty()) {
      trace.terminal =
          norm_capped ? TerminalReason::kIndexNormCap : TerminalReason::kLadderExhausted;
      break;
    }
    const KnapsackItem best = heap.top();
    if (best.nu > options.max_points - std::min(cost, options.max_points)) {
      trace.terminal = TerminalReason::kPointBudget;
      break;
    }
    if (best.p < kCancellationFactor * DBL_EPSILON * static_cast<double>(e2) ||
        P + best.p >= 1.0L) {
      trace.terminal = TerminalReason::kCancellationGuard;
      break;
    }
    heap.pop();
    take(best);
  }
  return res;
}

std::vector<LadderProfile> profiles_for_space(const LadderSolver& solver,
                                              const SpaceParams& space) {
  if (space.kernel(0).r() != solver.params().r()) {
    throw ContractError("profiles_for_space: smoothness of space and ladder solver differ");
  }
  std::vector<LadderProfile> out;
  out.reserve(static_cast<std::size_t>(space.dimension()));
  for (int k = 0; k < space.dimension(); ++k) out.push_back(solver.profile(space.gamma(k)));
  return out;
}

DownsetFront::DownsetFront(const BoxItems& items, std::size_t max_downsets) {
  // A down-set of the box is a height function h on the base box (all axes
  // but the last) that is antitone: h(c) <= h(c - e_m). It contains (c, t)
  // for t < h(c).
  const auto& ext = items.extents();
  const std::size_t d = ext.size();
  const int height = ext.back();
  std::vector<std::size_t> stride(d - 1, 1);
  std::size_t cells = 1;
  for (std::size_t m = d - 1; m-- > 0;) {
    stride[m] = cells;
    cells *= static_cast<std::size_t>(ext[m]);
  }

  std::vector<std::vector<long double>> psum(cells, std::vector<long double>(height + 1, 0.0L));
  std::vector<std::vector<std::uint64_t>> nsum(cells, std::vector<std::uint64_t>(height + 1, 0));
  std::vector<std::vector<int>> coords(cells, std::vector<int>(d - 1, 0));
  for (std::size_t c = 0; c < cells; ++c) {
    std::vector<int> j(d, 0);
    std::size_t rest = c;
    for (std::size_t m = 0; m + 1 < d; ++m) {
      j[m] = static_cast<int>(rest / stride[m]);
      rest %= stride[m];
      coords[c][m] = j[m];
    }
    for (int t = 0; t < height; ++t) {
      j[d - 1] = t;
      const auto it = *items.item(MultiIndex(j));
      psum[c][t + 1] = psum[c][t] + it.p;
      nsum[c][t + 1] = nsum[c][t] + it.nu;
    }
  }

  std::vector<std::pair<long double, std::uint64_t>> pairs;
  std::vector<int> h(cells, 0);
  auto recurse = [&](auto&& self, std::size_t c, long double p, std::uint64_t cost) -> void {
    if (c == cells) {
      if (++enumerated_ > max_downsets) {
        throw CapacityError("brute-force down-set enumeration exceeds " +
                            std::to_string(max_downsets) + " down-sets");
      }
      pairs.emplace_back(p, cost);
      return;
    }
    int bound = height;
    for (std::size_t m = 0; m + 1 < d; ++m) {
      if (coords[c][m] > 0) bound = std::min(bound, h[c - stride[m]]);
    }
    for (int v = 0; v <= bound; ++v) {
      h[c] = v;
      self(self, c + 1, p + psum[c][v], cost + nsum[c][v]);
    }
  };
  recurse(recurse, 0, 0.0L, 0);

  std::sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  p_.reserve(pairs.size());
  cost_.reserve(pairs.size());
  for (const auto& [p, c] : pairs) {
    p_.push_back(p);
    cost_.push_back(cost_.empty() ? c : std::min(cost_.back(), c));
  }
}

std::optional<std::uint64_t> DownsetFront::min_cost(double P) const {
  // Last position with p >= P.
  const auto it = std::partition_point(p_.begin(), p_.end(),
                                       [P](long double p) { return p >= static_cast<long double>(P); });
  if (it == p_.begin()) return std::nullopt;
  return cost_[static_cast<std::size_t>(it - p_.begin()) - 1];
}

std::optional<std::uint64_t> brute_force_downset_opt(const BoxItems& items, double P,
                                                     std::size_t max_downsets) {
  return DownsetFront(items, max_downsets).min_cost(P);
}

void write_trace_csv(std::ostream& out, const DaTrace& trace) {
  out << "step,index,p_j,nu_j,r_j,P_cum,Cost_cum,Error\n";
  char buf[256];
  for (std::size_t s = 0; s < trace.steps.size(); ++s) {
    const auto& st = trace.steps[s];
    std::snprintf(buf, sizeof buf, ",%.17g,%llu,%.17g,%.17g,%llu,%.17g\n", st.p,
                  static_cast<unsigned long long>(st.nu), st.r, st.p_cum,
                  static_cast<unsigned long long>(st.cost_cum), st.error);
    out << s << ",\"" << to_string(st.index) << '"' << buf;
  }
  out << "# terminal: " << to_string(trace.terminal) << '\n';
}

void write_convergence_csv(std::ostream& out, const DaTrace& trace) {
  out << "Cost,Error\n";
  char buf[64];
  for (const auto& st : trace.steps) {
    std::snprintf(buf, sizeof buf, "%llu,%.17g\n", static_cast<unsigned long long>(st.cost_cum),
                  st.error);
    out << buf;
  }
  out << "# terminal: " << to_string(trace.terminal) << '\n';
}

}  // namespace sparsesphere
