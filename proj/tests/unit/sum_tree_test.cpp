#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "dqfd/random.hpp"
#include "dqfd/sum_tree.hpp"

namespace dqfd {
namespace {

std::size_t linear_find(const std::vector<double>& leaves, double mass) {
  double c = 0.0;
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    c += leaves[i];
    if (mass < c) return i;
  }
  return leaves.size();
}

TEST(SumTree, TotalsAndGrowth) {
  SumTree t;
  EXPECT_EQ(t.size(), 0u);
  EXPECT_EQ(t.total(), 0.0);
  t.set(0, 1.0);
  t.set(4, 2.5);
  EXPECT_EQ(t.size(), 5u);
  EXPECT_DOUBLE_EQ(t.total(), 3.5);
  EXPECT_EQ(t.get(2), 0.0);
  EXPECT_EQ(t.get(4), 2.5);
  t.set(0, 0.5);
  EXPECT_DOUBLE_EQ(t.total(), 3.0);
}

TEST(SumTree, RejectsBadValues) {
  SumTree t(4);
  EXPECT_THROW(t.set(0, -1.0), std::invalid_argument);
  EXPECT_THROW(t.set(0, std::numeric_limits<double>::quiet_NaN()), std::invalid_argument);
  EXPECT_THROW(t.set(0, std::numeric_limits<double>::infinity()), std::invalid_argument);
}

TEST(SumTree, FindMatchesLinearScan) {
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + uniform_index(rng, 40);
    SumTree t;
    std::vector<double> leaves(n);
    for (std::size_t i = 0; i < n; ++i) {
      leaves[i] = bernoulli(rng, 0.2) ? 0.0 : uniform01(rng) * 5.0;
      t.set(i, leaves[i]);
    }
    double total = 0.0;
    for (double v : leaves) total += v;
    if (total == 0.0) continue;
    for (int k = 0; k < 200; ++k) {
      const double mass = uniform01(rng) * total;
      const auto expected = linear_find(leaves, mass);
      if (expected == n) continue;  // rounding at the very top
      ASSERT_EQ(t.find(mass), expected) << "mass " << mass;
      ASSERT_GT(leaves[t.find(mass)], 0.0);
    }
  }
}

TEST(SumTree, BoundaryMasses) {
  SumTree t;
  for (double v : {1.0, 0.0, 2.0, 0.0}) t.set(t.size(), v);
  EXPECT_EQ(t.find(0.0), 0u);
  EXPECT_EQ(t.find(0.999), 0u);
  EXPECT_EQ(t.find(1.0), 2u);
  EXPECT_EQ(t.find(3.0), 2u);  // at total: last positive leaf
  EXPECT_EQ(t.find(10.0), 2u);
}

TEST(SumTree, RootTracksLeafSumUnderUpdates) {
  Rng rng(2);
  SumTree t;
  for (int step = 0; step < 20'000; ++step) {
    t.set(uniform_index(rng, 1000), uniform01(rng) * std::pow(10.0, uniform01(rng) * 6 - 3));
    if (step % 1000 == 0) ASSERT_TRUE(t.verify(1e-9));
  }
  EXPECT_TRUE(t.verify(1e-9));
  t.rebuild();
  EXPECT_TRUE(t.verify(1e-12));
}

}  // namespace
}  // namespace dqfd
