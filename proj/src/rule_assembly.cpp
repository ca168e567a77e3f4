#include "sparsesphere/rule_assembly.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "sparsesphere/errors.hpp"

namespace sparsesphere {

std::map<MultiIndex, int> combination_coefficients(const IndexSet& set) {
  const std::size_t d = set.dimension();
  std::map<MultiIndex, int> out;
  for (const auto& j : set.members()) {
    // Only axes with j + e_k in I can contribute, since I is a down-set.
    std::vector<std::size_t> active;
    for (std::size_t k = 0; k < d; ++k) {
      if (j[k] < kMaxIndexComponent && set.contains(j.shifted(k))) active.push_back(k);
    }
    int c = 0;
    const std::size_t subsets = std::size_t{1} << active.size();
    for (std::size_t mask = 0; mask < subsets; ++mask) {
      std::vector<int> comp = j.components();
      int parity = 0;
      for (std::size_t b = 0; b < active.size(); ++b) {
        if (mask >> b & 1u) {
          ++comp[active[b]];
          ++parity;
        }
      }
      if (set.contains(MultiIndex(std::move(comp)))) c += parity % 2 ? -1 : 1;
    }
    if (c != 0) out.emplace(j, c);
  }
  return out;
}

std::vector<SpherePoint> ProductRule::node(std::size_t i) const {
  std::vector<SpherePoint> x;
  x.reserve(d_);
  for (auto id : ids(i)) x.push_back(points_[id]);
  return x;
}

ProductRule materialize(const IndexSet& set, std::span<const LadderProfile> profiles,
                        const DesignLadder& ladder, std::uint64_t capacity) {
  const std::size_t d = set.dimension();
  if (profiles.size() != d) throw ContractError("materialize: one profile per dimension required");
  if (set.empty()) throw ContractError("materialize: empty index set");

  long double p_sum = 0.0L;
  for (const auto& j : set.members()) {
    long double p = 1.0L;
    for (std::size_t k = 0; k < d; ++k) {
      if (j[k] >= profiles[k].usable_levels()) {
        throw ContractError("materialize: index " + to_string(j) +
                            " exceeds the profiled ladder depth");
      }
      p *= profiles[k].delta2[static_cast<std::size_t>(j[k])];
    }
    p_sum += p;
  }

  const auto coeffs = combination_coefficients(set);
  std::uint64_t terms = 0;
  for (const auto& [j, c] : coeffs) {
    std::uint64_t t = 1;
    for (std::size_t k = 0; k < d; ++k) {
      const std::uint64_t n = ladder.n().at(static_cast<std::size_t>(j[k]));
      if (t > capacity / n) throw CapacityError("materialize: tensor expansion exceeds capacity");
      t *= n;
    }
    terms += t;
    if (terms > capacity) throw CapacityError("materialize: tensor expansion exceeds capacity");
  }

  std::map<std::vector<std::uint32_t>, double> acc;
  for (const auto& [j, c] : coeffs) {
    std::vector<const Eigen::VectorXd*> w(d);
    for (std::size_t k = 0; k < d; ++k) {
      w[k] = &profiles[k].weights[static_cast<std::size_t>(j[k])];
      if (static_cast<std::size_t>(w[k]->size()) != ladder.n()[static_cast<std::size_t>(j[k])]) {
        throw ContractError("materialize: profile weights do not match the ladder");
      }
    }
    std::vector<std::uint32_t> id(d, 0);
    while (true) {
      double weight = c;
      for (std::size_t k = 0; k < d; ++k) weight *= (*w[k])[id[k]];
      acc[id] += weight;
      std::size_t k = d;
      bool done = true;
      while (k-- > 0) {
        if (id[k] + 1 < static_cast<std::uint32_t>(w[k]->size())) {
          ++id[k];
          done = false;
          break;
        }
        id[k] = 0;
      }
      if (done) break;
    }
  }

  ProductRule rule(set);
  rule.d_ = d;
  rule.points_.assign(ladder.points().begin(), ladder.points().end());
  rule.declared_e2_ = static_cast<double>(1.0L - p_sum);
  double wmax = 0.0;
  for (const auto& [id, w] : acc) wmax = std::max(wmax, std::abs(w));
  for (const auto& [id, w] : acc) {
    if (std::abs(w) < kPruneRelative * wmax) {
      ++rule.pruned_;
      continue;
    }
    rule.ids_.insert(rule.ids_.end(), id.begin(), id.end());
    rule.weights_.push_back(w);
  }
  return rule;
}

double verify_error(const ProductRule& rule, const Eigen::MatrixXd& ladder_gram,
                    const SpaceParams& space) {
  const std::size_t d = rule.dimension();
  if (static_cast<std::size_t>(space.dimension()) != d) {
    throw ContractError("verify_error: dimension mismatch");
  }
  if (static_cast<std::size_t>(ladder_gram.rows()) != rule.ladder_points().size()) {
    throw ContractError("verify_error: Gram matrix does not match the ladder");
  }
  const auto& w = rule.weights();
  const std::size_t n = w.size();
  const std::vector<double> g = space.gammas();
  long double sum_w = 0.0L;
  long double quad = 0.0L;
  for (std::size_t a = 0; a < n; ++a) {
    sum_w += w[a];
    const auto ia = rule.ids(a);
    long double row = 0.0L;
    for (std::size_t b = a + 1; b < n; ++b) {
      const auto ib = rule.ids(b);
      double k = 1.0;
      for (std::size_t m = 0; m < d; ++m) k *= 1.0 + g[m] * ladder_gram(ia[m], ib[m]);
      row += w[b] * k;
    }
    double kaa = 1.0;
    for (std::size_t m = 0; m < d; ++m) kaa *= 1.0 + g[m] * ladder_gram(ia[m], ia[m]);
    quad += w[a] * (2.0L * row + static_cast<long double>(w[a]) * kaa);
  }
  return static_cast<double>(1.0L - 2.0L * sum_w + quad);
}

double verify_error_direct(const ProductRule& rule, const SpaceParams& space) {
  const auto& w = rule.weights();
  const std::size_t n = w.size();
  std::vector<std::vector<SpherePoint>> nodes(n);
  for (std::size_t a = 0; a < n; ++a) nodes[a] = rule.node(a);
  long double sum_w = 0.0L;
  long double quad = 0.0L;
  for (std::size_t a = 0; a < n; ++a) {
    sum_w += w[a];
    for (std::size_t b = 0; b < n; ++b) {
      quad += static_cast<long double>(w[a]) * w[b] * kernel_d(nodes[a], nodes[b], space);
    }
  }
  return static_cast<double>(1.0L - 2.0L * sum_w + quad);
}

double integrate(const ProductRule& rule, const Integrand& f) {
  long double sum = 0.0L;
  for (std::size_t a = 0; a < rule.size(); ++a) {
    const auto x = rule.node(a);
    sum += rule.weights()[a] * f(x);
  }
  return static_cast<double>(sum);
}

void write_rule_csv(std::ostream& out, const ProductRule& rule) {
  out << 'w';
  for (std::size_t k = 1; k <= rule.dimension(); ++k) {
    out << ",x" << k << ",y" << k << ",z" << k;
  }
  out << '\n';
  char buf[80];
  for (std::size_t a = 0; a < rule.size(); ++a) {
    std::snprintf(buf, sizeof buf, "%.17g", rule.weights()[a]);
    out << buf;
    for (auto id : rule.ids(a)) {
      const auto& p = rule.ladder_points()[id];
      std::snprintf(buf, sizeof buf, ",%.17g,%.17g,%.17g", p.x, p.y, p.z);
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace sparsesphere
