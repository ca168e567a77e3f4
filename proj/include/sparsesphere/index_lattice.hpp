#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace sparsesphere {

/// Components above this are rejected.
inline constexpr int kMaxIndexComponent = 64;
/// down_set refuses boxes with more elements than this.
inline constexpr std::size_t kDownSetCapacity = 1u << 22;

/// Element of N^d.
class MultiIndex {
 public:
  MultiIndex() = default;
  /// The zero index in d dimensions.
  explicit MultiIndex(std::size_t d) : c_(d, 0) {}
  MultiIndex(std::initializer_list<int> components);
  explicit MultiIndex(std::vector<int> components);

  std::size_t size() const noexcept { return c_.size(); }
  int operator[](std::size_t k) const { return c_[k]; }
  const std::vector<int>& components() const noexcept { return c_; }

  bool is_zero() const noexcept;
  int norm1() const noexcept;

  /// Copy with component k incremented (or decremented by passing -1).
  MultiIndex shifted(std::size_t k, int by = 1) const;

  /// Lexicographic order; comparing indices of different length is a contract error
  /// in leq() but allowed here so indices can key ordered containers.
  friend auto operator<=>(const MultiIndex&, const MultiIndex&) = default;
  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;

 private:
  std::vector<int> c_;
};

struct MultiIndexHash {
  std::size_t operator()(const MultiIndex& i) const noexcept;
};

/// "j1,j2,...,jd".
std::string to_string(const MultiIndex& i);
MultiIndex parse_index(std::string_view text);

/// Componentwise i <= j.
bool leq(const MultiIndex& i, const MultiIndex& j);

/// {i + e_k : k = 1..d}, ordered by k.
std::vector<MultiIndex> forward_neighborhood(const MultiIndex& i);

/// The box {j : j <= i} in lexicographic order.
std::vector<MultiIndex> down_set(const MultiIndex& i, std::size_t capacity = kDownSetCapacity);

/// A finite down-set together with the minimal elements of its complement.
class IndexSet {
 public:
  /// Empty set in d dimensions; its frontier is {0}.
  explicit IndexSet(std::size_t d);

  std::size_t dimension() const noexcept { return d_; }
  std::size_t size() const noexcept { return order_.size(); }
  bool empty() const noexcept { return order_.empty(); }

  bool contains(const MultiIndex& j) const;
  bool in_frontier(const MultiIndex& j) const { return frontier_.count(j) != 0; }

  /// Members in insertion order.
  const std::vector<MultiIndex>& members() const noexcept { return order_; }
  /// Minimal elements of the complement, lexicographically ordered.
  const std::set<MultiIndex>& frontier() const noexcept { return frontier_; }

  /// Adds a frontier element. Returns the indices that joined the frontier.
  /// Throws AdmissibilityError if j is not in the frontier.
  std::vector<MultiIndex> insert(const MultiIndex& j);

  /// Value-style insertion.
  IndexSet inserted(const MultiIndex& j) const;

  /// Largest component per dimension over the members (0 when empty).
  std::vector<int> extent() const;

  /// Checks closure under predecessors by direct search.
  bool is_down_set() const;

 private:
  bool predecessors_present(const MultiIndex& s) const;

  std::size_t d_;
  std::unordered_set<MultiIndex, MultiIndexHash> members_;
  std::vector<MultiIndex> order_;
  std::set<MultiIndex> frontier_;
};

/// True if every element of `indices` has all immediate predecessors in
/// `indices` (i.e. the set is a down-set).
bool is_down_set(const std::vector<MultiIndex>& indices);

}  // namespace sparsesphere
