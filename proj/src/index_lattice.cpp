#include "sparsesphere/index_lattice.hpp"

#include <algorithm>
#include <charconv>

#include "sparsesphere/errors.hpp"

namespace sparsesphere {

namespace {

void check_component(int v) {
  if (v < 0) throw ContractError("multi-index component must be nonnegative");
  if (v > kMaxIndexComponent) {
    throw CapacityError("multi-index component " + std::to_string(v) + " exceeds cap " +
                        std::to_string(kMaxIndexComponent));
  }
}

void check_same_length(const MultiIndex& a, const MultiIndex& b) {
  if (a.size() != b.size()) throw ContractError("multi-index length mismatch");
}

}  // namespace

MultiIndex::MultiIndex(std::initializer_list<int> components) : c_(components) {
  for (int v : c_) check_component(v);
}

MultiIndex::MultiIndex(std::vector<int> components) : c_(std::move(components)) {
  for (int v : c_) check_component(v);
}

bool MultiIndex::is_zero() const noexcept {
  for (int v : c_)
    if (v != 0) return false;
  return true;
}

int MultiIndex::norm1() const noexcept {
  int s = 0;
  for (int v : c_) s += v;
  return s;
}

MultiIndex MultiIndex::shifted(std::size_t k, int by) const {
  if (k >= c_.size()) throw ContractError("multi-index axis out of range");
  std::vector<int> c = c_;
  c[k] += by;
  return MultiIndex(std::move(c));
}

std::size_t MultiIndexHash::operator()(const MultiIndex& i) const noexcept {
  std::size_t h = 1469598103934665603ull;
  for (int v : i.components()) {
    h ^= static_cast<std::size_t>(v) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  }
  return h;
}

std::string to_string(const MultiIndex& i) {
  std::string s;
  for (std::size_t k = 0; k < i.size(); ++k) {
    if (k) s += ',';
    s += std::to_string(i[k]);
  }
  return s;
}

MultiIndex parse_index(std::string_view text) {
  std::vector<int> c;
  const char* p = text.data();
  const char* end = p + text.size();
  while (true) {
    int v = 0;
    auto [next, ec] = std::from_chars(p, end, v);
    if (ec != std::errc()) throw ContractError("malformed multi-index: " + std::string(text));
    c.push_back(v);
    p = next;
    if (p == end) break;
    if (*p != ',') throw ContractError("malformed multi-index: " + std::string(text));
    ++p;
  }
  return MultiIndex(std::move(c));
}

bool leq(const MultiIndex& i, const MultiIndex& j) {
  check_same_length(i, j);
  for (std::size_t k = 0; k < i.size(); ++k)
    if (i[k] > j[k]) return false;
  return true;
}

std::vector<MultiIndex> forward_neighborhood(const MultiIndex& i) {
  std::vector<MultiIndex> out;
  out.reserve(i.size());
  for (std::size_t k = 0; k < i.size(); ++k) out.push_back(i.shifted(k));
  return out;
}

std::vector<MultiIndex> down_set(const MultiIndex& i, std::size_t capacity) {
  std::size_t count = 1;
  for (int v : i.components()) {
    const auto f = static_cast<std::size_t>(v) + 1;
    if (count > capacity / f) {
      throw CapacityError("down_set: box below " + to_string(i) + " exceeds capacity");
    }
    count *= f;
  }
  std::vector<MultiIndex> out;
  out.reserve(count);
  std::vector<int> cur(i.size(), 0);
  while (true) {
    out.emplace_back(cur);
    std::size_t k = i.size();
    while (true) {
      if (k == 0) return out;
      --k;
      if (cur[k] < i[k]) {
        ++cur[k];
        break;
      }
      cur[k] = 0;
    }
  }
}

IndexSet::IndexSet(std::size_t d) : d_(d) {
  if (d == 0) throw ContractError("IndexSet: dimension must be positive");
  frontier_.insert(MultiIndex(d));
}

bool IndexSet::contains(const MultiIndex& j) const { return members_.count(j) != 0; }

bool IndexSet::predecessors_present(const MultiIndex& s) const {
  for (std::size_t k = 0; k < d_; ++k) {
    if (s[k] > 0 && !contains(s.shifted(k, -1))) return false;
  }
  return true;
}

std::vector<MultiIndex> IndexSet::insert(const MultiIndex& j) {
  if (j.size() != d_) throw ContractError("IndexSet::insert: dimension mismatch");
  auto it = frontier_.find(j);
  if (it == frontier_.end()) {
    throw AdmissibilityError("index " + to_string(j) + " is not in the frontier");
  }
  frontier_.erase(it);
  members_.insert(j);
  order_.push_back(j);
  std::vector<MultiIndex> added;
  for (std::size_t k = 0; k < d_; ++k) {
    if (j[k] >= kMaxIndexComponent) continue;
    MultiIndex s = j.shifted(k);
    if (predecessors_present(s)) {
      frontier_.insert(s);
      added.push_back(std::move(s));
    }
  }
  return added;
}

IndexSet IndexSet::inserted(const MultiIndex& j) const {
  IndexSet copy = *this;
  copy.insert(j);
  return copy;
}

std::vector<int> IndexSet::extent() const {
  std::vector<int> e(d_, 0);
  for (const auto& m : order_)
    for (std::size_t k = 0; k < d_; ++k) e[k] = std::max(e[k], m[k]);
  return e;
}

bool IndexSet::is_down_set() const { return sparsesphere::is_down_set(order_); }

bool is_down_set(const std::vector<MultiIndex>& indices) {
  std::unordered_set<MultiIndex, MultiIndexHash> set(indices.begin(), indices.end());
  for (const auto& i : indices) {
    for (std::size_t k = 0; k < i.size(); ++k) {
      if (i[k] > 0 && !set.count(i.shifted(k, -1))) return false;
    }
  }
  return true;
}

}  // namespace sparsesphere
