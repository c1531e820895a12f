#pragma once

#include <cstddef>
#include <vector>

namespace dqfd {

// Binary tree of partial sums over non-negative leaf values. Leaves are
// addressed 0..size()-1; storage grows on demand (powers of two).
class SumTree {
 public:
  SumTree() = default;
  explicit SumTree(std::size_t reserve_leaves);

  std::size_t size() const { return size_; }
  double total() const { return nodes_.empty() ? 0.0 : nodes_[1]; }
  double get(std::size_t leaf) const;

  // Sets leaf `leaf`, extending size() to leaf + 1 if needed.
  void set(std::size_t leaf, double value);

  // Leaf whose cumulative interval [c_{i-1}, c_i) contains `mass`. Masses at
  // or beyond total() resolve to the last leaf with a positive value.
  std::size_t find(double mass) const;

  // Root agrees with a fresh left-to-right sum of leaves within `rel_tol`.
  bool verify(double rel_tol = 1e-9) const;
  // Recomputes every internal node from the leaves.
  void rebuild();

 private:
  void grow(std::size_t min_leaves);

  std::size_t leaves_ = 0;  // storage capacity, power of two
  std::size_t size_ = 0;
  std::vector<double> nodes_;  // 1-based heap layout, leaves at [leaves_, 2*leaves_)
};

}  // namespace dqfd
