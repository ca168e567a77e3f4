#include "sparsesphere/ww_solver.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <queue>
#include <unordered_set>

#include "sparsesphere/errors.hpp"

namespace sparsesphere {

namespace {

double axis_factor(const WwParams& p, std::size_t k, int j) {
  if (j == 0) return 1.0;
  return std::sqrt(p.gammas[k]) * p.C * std::pow(p.D, j) / p.xi[k];
}

struct Keyed {
  double key;
  MultiIndex index;
};

struct ByKey {
  bool operator()(const Keyed& a, const Keyed& b) const {
    if (a.key != b.key) return a.key < b.key;
    return a.index > b.index;
  }
};

// Best-first walk of the lattice by nonincreasing key.
class OrderGenerator {
 public:
  OrderGenerator(const WwParams& params, std::vector<int> extents, int max_norm)
      : params_(params), extents_(std::move(extents)), max_norm_(max_norm) {
    MultiIndex zero(params.dimension());
    seen_.insert(zero);
    heap_.push({1.0, std::move(zero)});
  }

  std::optional<Keyed> next() {
    if (heap_.empty()) return std::nullopt;
    Keyed top = heap_.top();
    heap_.pop();
    for (std::size_t k = 0; k < top.index.size(); ++k) {
      if (!extents_.empty() && top.index[k] + 1 >= extents_[k]) continue;
      if (top.index[k] >= kMaxIndexComponent) continue;
      MultiIndex s = top.index.shifted(k);
      if (s.norm1() > max_norm_) {
        norm_capped_ = true;
        continue;
      }
      if (seen_.insert(s).second) heap_.push({b_over_xi(s, params_), std::move(s)});
    }
    return top;
  }

  bool norm_capped() const noexcept { return norm_capped_; }

 private:
  const WwParams& params_;
  std::vector<int> extents_;
  int max_norm_;
  bool norm_capped_ = false;
  std::unordered_set<MultiIndex, MultiIndexHash> seen_;
  std::priority_queue<Keyed, std::vector<Keyed>, ByKey> heap_;
};

}  // namespace

void WwParams::validate() const {
  if (!(C > 0.0)) throw ContractError("WwParams: C must be positive");
  if (!(D > 0.0 && D < 1.0)) throw ContractError("WwParams: D must lie in (0, 1)");
  if (!(rho > 0.0)) throw ContractError("WwParams: rho must be positive");
  if (!(eta > 0.0 && eta < 1.0)) throw ContractError("WwParams: eta must lie in (0, 1)");
  if (gammas.empty() || xi.size() != gammas.size()) {
    throw ContractError("WwParams: xi and gammas must be nonempty and of equal length");
  }
  for (std::size_t k = 0; k < gammas.size(); ++k) {
    if (!(gammas[k] > 0.0) || !(xi[k] > 0.0)) {
      throw ContractError("WwParams: xi and gammas must be positive");
    }
  }
}

bool WwParams::growth_criterion(int depth) const {
  for (int j = 1; j <= depth; ++j) {
    if ((j + 1) * std::pow(D, j * rho) > 1.0 + 1e-12) return false;
  }
  return true;
}

WwParams WwParams::from_calibration(const CalibrationResult& cal, std::vector<double> gammas,
                                    double eta) {
  WwParams p;
  p.C = cal.C;
  p.D = cal.D;
  p.rho = cal.rho;
  p.eta = eta;
  p.xi.assign(gammas.size(), cal.C * cal.D);
  p.gammas = std::move(gammas);
  p.validate();
  return p;
}

WwParams WwParams::with_eta(double e) const {
  WwParams p = *this;
  p.eta = e;
  p.validate();
  return p;
}

double b_over_xi(const MultiIndex& j, const WwParams& params) {
  if (j.size() != params.dimension()) throw ContractError("b_over_xi: dimension mismatch");
  double key = 1.0;
  for (std::size_t k = 0; k < j.size(); ++k) key *= axis_factor(params, k, j[k]);
  return key;
}

WwOrder build_order(const WwParams& params, std::size_t count, const std::vector<int>* extents,
                    int max_norm) {
  params.validate();
  if (count < 1) throw ContractError("build_order: count must be >= 1");
  OrderGenerator gen(params, extents ? *extents : std::vector<int>{}, max_norm);
  WwOrder order;
  std::unordered_set<MultiIndex, MultiIndexHash> emitted;
  while (order.indices.size() < count) {
    auto next = gen.next();
    if (!next) break;
    const auto& j = next->index;
    if (!order.first_downset_violation) {
      for (std::size_t k = 0; k < j.size(); ++k) {
        if (j[k] > 0 && !emitted.count(j.shifted(k, -1))) {
          order.first_downset_violation = j;
          break;
        }
      }
    }
    if (!order.first_key_violation && !order.keys.empty() && next->key > order.keys.back()) {
      order.first_key_violation = j;
    }
    emitted.insert(j);
    order.keys.push_back(next->key);
    order.indices.push_back(std::move(next->index));
  }
  return order;
}

std::uint64_t count_keys_above(double tau, const WwParams& params, std::uint64_t cap) {
  params.validate();
  const std::size_t d = params.dimension();
  std::vector<double> suffix(d + 1, 1.0);
  for (std::size_t k = d; k-- > 0;) {
    suffix[k] = suffix[k + 1] * std::max(1.0, axis_factor(params, k, 1));
  }
  std::uint64_t count = 0;
  auto rec = [&](auto&& self, std::size_t k, double partial) -> void {
    if (count >= cap) return;
    if (k == d) {
      if (partial > tau) ++count;
      return;
    }
    for (int j = 0;; ++j) {
      const double f = axis_factor(params, k, j);
      if (!(partial * f * suffix[k + 1] > tau)) {
        if (j == 0) continue;
        break;
      }
      self(self, k + 1, partial * f);
      if (count >= cap) return;
    }
  };
  rec(rec, 0, 1.0);
  return std::min(count, cap);
}

double ww_threshold(double eps, const WwParams& params) {
  return std::pow(eps / c1(params), 1.0 / (1.0 - params.eta));
}

std::uint64_t n_eps(double eps, const WwParams& params, std::uint64_t cap) {
  if (!(eps > 0.0 && eps < 1.0)) throw ContractError("n_eps: eps must lie in (0, 1)");
  const std::uint64_t n = count_keys_above(ww_threshold(eps, params), params, cap + 1);
  if (n > cap) throw CapacityError("n_eps: more than " + std::to_string(cap) + " indices");
  return std::max<std::uint64_t>(n, 1);
}

double c1(const WwParams& params) {
  params.validate();
  const double C = params.C, D = params.D, eta = params.eta;
  const double d2eta = std::pow(D, 2.0 * eta);
  double prod = std::pow(params.xi[0], 2.0 * (1.0 - eta)) / (1.0 - D * D);
  for (std::size_t k = 1; k < params.dimension(); ++k) {
    prod *= 1.0 + std::pow(C * C * params.gammas[k], eta) *
                      std::pow(params.xi[k], 2.0 * (1.0 - eta)) * d2eta / (1.0 - d2eta);
  }
  return std::sqrt(prod);
}

double ww_cost_bound(double eps, const WwParams& params) {
  if (!(eps > 0.0 && eps < 1.0)) throw ContractError("ww_cost_bound: eps must lie in (0, 1)");
  params.validate();
  const double C = params.C, D = params.D, rho = params.rho, eta = params.eta;
  const double d2eta = std::pow(D, 2.0 * eta);
  const double half_inv = 1.0 / (2.0 * (1.0 - eta));
  auto f = [&](std::size_t i) {
    return std::pow(1.0 + std::pow(C, 2.0 * eta) * std::pow(params.gammas[i], eta) *
                              std::pow(params.xi[i], 2.0 * (1.0 - eta)) * d2eta / (1.0 - d2eta),
                    half_inv);
  };
  const double eps_pow = std::pow(eps, -1.0 / (1.0 - eta));
  double num = std::pow(params.xi[0], rho);
  double f_prod = 1.0;
  for (std::size_t k = 1; k < params.dimension(); ++k) {
    const double fk = f(k);
    f_prod *= fk;
    const double arg = C * std::sqrt(params.gammas[k]) /
                       std::pow(params.xi[k] * (1.0 - D * D), half_inv) * f_prod * eps_pow;
    const double g = std::max(0.0, std::log(arg) / std::log(1.0 / D));
    num *= (1.0 + std::pow(C, rho) * std::pow(params.gammas[k], rho / 2.0) /
                      std::pow(params.xi[k], rho) * g) *
           std::pow(fk, rho);
  }
  const double den = (1.0 - std::pow(D, rho)) * std::pow(1.0 - D * D, rho * half_inv);
  return num / den * std::pow(1.0 / eps, rho / (1.0 - eta));
}

std::vector<double> default_eta_grid() {
  std::vector<double> g;
  for (int i = 1; i <= 19; ++i) g.push_back(0.05 * i);
  return g;
}

EtaBound min_ww_cost_bound(double eps, const WwParams& params, std::span<const double> eta_grid) {
  if (eta_grid.empty()) throw ContractError("min_ww_cost_bound: empty eta grid");
  EtaBound best{HUGE_VAL, eta_grid.front()};
  for (double eta : eta_grid) {
    const double b = ww_cost_bound(eps, params.with_eta(eta));
    if (b < best.bound) best = {b, eta};
  }
  return best;
}

DaResult run_ww(const ItemSource& items, const WwParams& params, const DaOptions& options) {
  if (!(options.eps > 0.0 && options.eps < 1.0)) {
    throw ContractError("run_ww: eps must lie in (0, 1)");
  }
  if (options.max_points < 1) throw ContractError("run_ww: max_points must be >= 1");
  params.validate();
  const std::size_t d = items.dimension();
  if (d != params.dimension()) throw ContractError("run_ww: dimension mismatch");

  // Each index costs at least one point, so the budget caps the useful count.
  const std::uint64_t n = std::max<std::uint64_t>(
      1, count_keys_above(ww_threshold(options.eps, params), params, options.max_points + 1));

  std::vector<int> extents(d);
  for (std::size_t k = 0; k < d; ++k) extents[k] = items.depth(k);
  OrderGenerator gen(params, extents, options.max_index_norm);

  DaResult res{IndexSet(d), {}};
  auto& trace = res.trace;
  long double P = 0.0L;
  std::uint64_t cost = 0;
  while (true) {
    if (trace.steps.size() >= n) {
      trace.terminal = TerminalReason::kCutoffReached;
      break;
    }
    auto next = gen.next();
    if (!next) {
      trace.terminal =
          gen.norm_capped() ? TerminalReason::kIndexNormCap : TerminalReason::kLadderExhausted;
      break;
    }
    auto it = items.item(next->index);
    if (!it) throw ContractError("run_ww: item source has no level 0");
    if (!trace.steps.empty()) {
      if (it->nu > options.max_points - std::min(cost, options.max_points)) {
        trace.terminal = TerminalReason::kPointBudget;
        break;
      }
      const long double e2 = std::max(0.0L, 1.0L - P);
      if (it->p < kCancellationFactor * DBL_EPSILON * static_cast<double>(e2) ||
          P + it->p >= 1.0L) {
        trace.terminal = TerminalReason::kCancellationGuard;
        break;
      }
    }
    res.set.insert(it->index);
    P += it->p;
    cost += it->nu;
    const double err = static_cast<double>(std::sqrt(std::max(0.0L, 1.0L - P)));
    trace.steps.push_back({it->index, it->p, it->nu, it->r, static_cast<double>(P), cost, err});
  }
  return res;
}

}  // namespace sparsesphere
