#include "dqfd/sum_tree.hpp"

#include <cmath>
#include <stdexcept>

namespace dqfd {

SumTree::SumTree(std::size_t reserve_leaves) {
  if (reserve_leaves > 0) grow(reserve_leaves);
}

double SumTree::get(std::size_t leaf) const {
  if (leaf >= size_) throw std::out_of_range("sum tree leaf out of range");
  return nodes_[leaves_ + leaf];
}

void SumTree::grow(std::size_t min_leaves) {
  std::size_t n = leaves_ == 0 ? 1 : leaves_;
  while (n < min_leaves) n *= 2;
  if (n == leaves_) return;
  std::vector<double> old(nodes_.begin() + static_cast<std::ptrdiff_t>(leaves_),
                          nodes_.begin() + static_cast<std::ptrdiff_t>(leaves_ + size_));
  if (leaves_ == 0) old.clear();
  leaves_ = n;
  nodes_.assign(2 * leaves_, 0.0);
  for (std::size_t i = 0; i < old.size(); ++i) nodes_[leaves_ + i] = old[i];
  rebuild();
}

void SumTree::rebuild() {
  for (std::size_t i = leaves_ - 1; i >= 1; --i) nodes_[i] = nodes_[2 * i] + nodes_[2 * i + 1];
}

void SumTree::set(std::size_t leaf, double value) {
  if (!(value >= 0.0) || !std::isfinite(value))
    throw std::invalid_argument("sum tree values must be finite and non-negative");
  if (leaf >= leaves_) grow(leaf + 1);
  if (leaf >= size_) size_ = leaf + 1;
  std::size_t i = leaves_ + leaf;
  nodes_[i] = value;
  for (i /= 2; i >= 1; i /= 2) nodes_[i] = nodes_[2 * i] + nodes_[2 * i + 1];
}

std::size_t SumTree::find(double mass) const {
  if (size_ == 0) throw std::logic_error("find on an empty sum tree");
  std::size_t i = 1;
  while (i < leaves_) {
    const double left = nodes_[2 * i];
    if (mass < left || nodes_[2 * i + 1] <= 0.0) {
      i = 2 * i;
    } else {
      mass -= left;
      i = 2 * i + 1;
    }
  }
  std::size_t leaf = i - leaves_;
  // Rounding can land on a zero leaf at the far right; step back.
  while (leaf > 0 && (leaf >= size_ || nodes_[leaves_ + leaf] <= 0.0)) --leaf;
  return leaf;
}

bool SumTree::verify(double rel_tol) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < size_; ++i) sum += nodes_[leaves_ + i];
  const double scale = std::max(std::abs(sum), 1e-300);
  return std::abs(total() - sum) <= rel_tol * scale;
}

}  // namespace dqfd
