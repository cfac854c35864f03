#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "femtonet/harness.hpp"
#include "femtonet/videoalloc.hpp"

using namespace femtonet;

namespace {

std::vector<MbsSession> identical(int n, double base = 500.0, double layer = 50.0, int max_l = 10, int min_l = 0) {
  std::vector<MbsSession> s;
  for (int m = 1; m <= n; ++m) s.push_back({m, m, base, layer, max_l, min_l, max_l, 0});
  return s;
}

double total(const std::vector<MbsSession> &s, const TechniqueResult &r) {
  double t = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) t += by_rank(s)[k].bw(r.layers[k]);
  return t;
}

// Start every session at its minimum and hand out whole layers round-robin by rank.
std::vector<int> round_robin(double budget, const std::vector<MbsSession> &s) {
  auto r = by_rank(s);
  std::vector<int> layers;
  double used = 0.0;
  for (const auto &x : r) {
    layers.push_back(x.min_layers);
    used += x.min_bw();
  }
  bool progress = true;
  while (progress) {
    progress = false;
    for (std::size_t k = 0; k < r.size(); ++k) {
      if (layers[k] < r[k].max_layers && used + r[k].layer_bw <= budget + 1e-9) {
        ++layers[k];
        used += r[k].layer_bw;
        progress = true;
      }
    }
  }
  return layers;
}

} // namespace

TEST(VideoAlloc, SessionTableBounds) {
  auto s = table71_sessions();
  EXPECT_DOUBLE_EQ(c_min_b(s), 6000.0);
  EXPECT_DOUBLE_EQ(c_max_b(s), 12000.0);
  EXPECT_DOUBLE_EQ(s[0].bw(3), 650.0);
}

TEST(VideoAlloc, BudgetRegimes) {
  auto s = table71_sessions();
  auto lo = allocate_mbs_budget(20000, 0, s);
  EXPECT_EQ(lo.regime, Regime::lower_traffic);
  EXPECT_DOUBLE_EQ(lo.c_b, 12000.0);
  auto edge = allocate_mbs_budget(20000, 8000, s);
  EXPECT_EQ(edge.regime, Regime::lower_traffic);
  auto cong = allocate_mbs_budget(20000, 11000, s);
  EXPECT_EQ(cong.regime, Regime::congested);
  EXPECT_DOUBLE_EQ(cong.c_b, 9000.0);
  EXPECT_THROW(allocate_mbs_budget(20000, 15000, s), InfeasibleAllocation);
  EXPECT_THROW(allocate_mbs_budget(1000, 2000, s), InvalidArgument);
  EXPECT_THROW(allocate_mbs_budget(1000, 0, {}), InvalidArgument);
}

TEST(VideoAlloc, TwoLevelWorkedExample) {
  auto s = identical(3);
  auto r = technique_two_level(2400.0, s);
  EXPECT_EQ(r.P, 4);
  EXPECT_EQ(r.M_I, 3);
  EXPECT_EQ(r.layers, (std::vector<int>{6, 6, 6}));
  EXPECT_DOUBLE_EQ(r.used, 2400.0);
  EXPECT_EQ(r.layers, round_robin(2400.0, s));
}

TEST(VideoAlloc, TwoLevelNearFullAndFloor) {
  auto s = identical(3);
  auto r = technique_two_level(3000.0 - 1.0, s);
  EXPECT_EQ(r.P, 0);
  EXPECT_EQ(r.M_I, 2);
  EXPECT_EQ(r.layers, (std::vector<int>{10, 10, 9}));
  auto f = technique_two_level(1500.0, s);
  EXPECT_EQ(f.layers, (std::vector<int>{0, 0, 0}));
  auto full = technique_two_level(3000.0, s);
  EXPECT_EQ(full.layers, (std::vector<int>{10, 10, 10}));
  EXPECT_THROW(technique_two_level(1499.0, s), InfeasibleAllocation);
}

TEST(VideoAlloc, TwoLevelMatchesRoundRobinOracle) {
  Rng rng = make_rng(12);
  for (int trial = 0; trial < 2000; ++trial) {
    int n = 1 + static_cast<int>(uniform_index(rng, 12));
    int max_l = 1 + static_cast<int>(uniform_index(rng, 12));
    int min_l = static_cast<int>(uniform_index(rng, max_l + 1));
    auto s = identical(n, 100.0 * uniform_index(rng, 6), 10.0 + 10.0 * uniform_index(rng, 5), max_l, min_l);
    std::shuffle(s.begin(), s.end(), rng);
    double lo = c_min_b(s), hi = c_max_b(s);
    double budget = uniform01(rng) < 0.2 ? lo + s[0].layer_bw * uniform_index(rng, n * (max_l - min_l) + 1) : lo + (hi - lo) * uniform01(rng);
    auto r = technique_two_level(budget, s);
    ASSERT_EQ(r.layers, round_robin(budget, s)) << trial;
    auto [mn, mx] = std::minmax_element(r.layers.begin(), r.layers.end());
    ASSERT_LE(*mx - *mn, 1);
  }
}

TEST(VideoAlloc, MultiLevelBoundaries) {
  auto s = identical(4);
  auto one = technique_multi_level(c_min_b(s) + 500.0, s);
  EXPECT_EQ(one.M_2, 1);
  EXPECT_EQ(one.layers, (std::vector<int>{10, 0, 0, 0}));
  auto all = technique_multi_level(c_max_b(s), s);
  EXPECT_EQ(all.M_2, 4);
  auto partial = technique_multi_level(c_min_b(s) + 720.0, s);
  EXPECT_EQ(partial.M_2, 1);
  EXPECT_EQ(partial.layers, (std::vector<int>{10, 4, 0, 0}));
}

TEST(VideoAlloc, TechniquesConsumeTheSameBudget) {
  Rng rng = make_rng(21);
  for (int trial = 0; trial < 1000; ++trial) {
    int n = 1 + static_cast<int>(uniform_index(rng, 12));
    auto s = identical(n, 500.0, 50.0, 10, static_cast<int>(uniform_index(rng, 4)));
    double lo = c_min_b(s), hi = c_max_b(s);
    double budget = lo + (hi - lo) * uniform01(rng);
    auto a = technique_two_level(budget, s);
    auto b = technique_multi_level(budget, s);
    ASSERT_NEAR(a.used, b.used, 1e-9);
    ASSERT_NEAR(a.used, total(s, a), 1e-9);
    ASSERT_LE(a.used, budget + 1e-9);
    // Maximal: one more layer on the cheapest session would not fit.
    if (a.used < hi - 1e-9) {
      ASSERT_GT(a.used + 50.0, budget + 1e-9);
    }
    // Multi-level output is full sessions, at most one partial, then minimum sessions.
    for (std::size_t k = 0; k < b.layers.size(); ++k) {
      int expect_hi = s[0].max_layers, expect_lo = s[0].min_layers;
      if (static_cast<int>(k) < b.M_2) {
        ASSERT_EQ(b.layers[k], expect_hi);
      } else if (static_cast<int>(k) > b.M_2) {
        ASSERT_EQ(b.layers[k], expect_lo);
      }
    }
    for (int l : a.layers) ASSERT_GE(l, s[0].min_layers);
  }
}

TEST(VideoAlloc, PerSessionAllocationGrowsWithBudget) {
  Rng rng = make_rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<MbsSession> s;
    int n = 2 + static_cast<int>(uniform_index(rng, 8));
    for (int m = 1; m <= n; ++m) {
      int mx = 2 + static_cast<int>(uniform_index(rng, 8));
      s.push_back({m, m, 100.0 + 100.0 * uniform_index(rng, 5), 25.0 * (1 + uniform_index(rng, 3)), mx, static_cast<int>(uniform_index(rng, mx)), mx, 0});
    }
    double lo = c_min_b(s), hi = c_max_b(s);
    double b1 = lo + (hi - lo) * uniform01(rng), b2 = b1 + (hi - b1) * uniform01(rng);
    for (auto f : {technique_two_level, technique_multi_level}) {
      auto x = f(b1, s), y = f(b2, s);
      for (std::size_t k = 0; k < x.layers.size(); ++k) ASSERT_LE(x.layers[k], y.layers[k]);
      ASSERT_LE(x.used, b1 + 1e-9);
    }
  }
}

TEST(VideoAlloc, RankTiesBreakById) {
  auto s = identical(3);
  for (auto &x : s) x.rank = 1;
  std::swap(s[0], s[2]);
  auto r = technique_two_level(2450.0, s);
  EXPECT_EQ(r.ids, (std::vector<int>{1, 2, 3}));
  EXPECT_EQ(r.layers, (std::vector<int>{7, 6, 6}));
}

TEST(VideoAlloc, PopularityWorkedExample) {
  auto a = allocate_popularity(2.0, 2.0, 0.6, {150, 50});
  EXPECT_TRUE(a.congested);
  EXPECT_NEAR(a.a, 0.004, 1e-15);
  EXPECT_NEAR(a.beta[0], 1.2, 1e-12);
  EXPECT_NEAR(a.beta[1], 0.8, 1e-12);
  EXPECT_NEAR(a.total(), 2.0, 1e-12);
  auto s = satisfaction(a);
  EXPECT_NEAR(s.per_rank[0], 0.6, 1e-12);
  EXPECT_NEAR(s.per_rank[1], 0.4, 1e-12);
  EXPECT_NEAR(s.average, 0.55, 1e-12);
  EXPECT_NEAR(s.baseline, 0.5, 1e-12);
}

TEST(VideoAlloc, PopularityUncongested) {
  auto a = allocate_popularity(30.0, 2.0, 0.6, std::vector<long>(15, 10));
  EXPECT_FALSE(a.congested);
  for (double b : a.beta) EXPECT_DOUBLE_EQ(b, 2.0);
  auto s = satisfaction(a);
  EXPECT_EQ(s.average, 1.0);
  EXPECT_EQ(s.baseline, 1.0);
  for (double x : s.per_rank) EXPECT_EQ(x, 1.0);
}

TEST(VideoAlloc, UniformPopularityIsEqualShare) {
  auto a = allocate_popularity(30.0, 2.0, 0.6, std::vector<long>(20, 7));
  for (double b : a.beta) EXPECT_NEAR(b, equal_share(30.0, 2.0, 20), 1e-12);
  auto s = satisfaction(a);
  EXPECT_NEAR(s.average, s.baseline, 1e-12);
}

TEST(VideoAlloc, PopularityCarriesOverflowDownTheRanks) {
  auto a = allocate_popularity(3.0, 2.0, 0.2, {100, 1, 1});
  EXPECT_DOUBLE_EQ(a.beta[0], 2.0);
  EXPECT_GT(a.carry[0], 0.0);
  EXPECT_NEAR(a.total(), 3.0, 1e-12);
  EXPECT_GE(a.beta[1], a.beta[2]);
}

TEST(VideoAlloc, PopularityProperties) {
  Rng rng = make_rng(88);
  int strict = 0, unequal = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::size_t M = 1 + uniform_index(rng, 40);
    std::vector<long> k(M);
    for (auto &x : k) x = static_cast<long>(uniform_index(rng, 100));
    if (uniform01(rng) < 0.1) std::fill(k.begin(), k.end(), 5);
    k[0] += 1;
    std::sort(k.rbegin(), k.rend());
    double bmin = 0.2 + uniform01(rng), bmax = bmin + 2.0 * uniform01(rng);
    double C = M * bmin + (M * bmax - M * bmin) * 1.2 * uniform01(rng);
    auto a = allocate_popularity(C, bmax, bmin, k);
    for (std::size_t m = 0; m < M; ++m) {
      ASSERT_GE(a.beta[m], bmin - 1e-9);
      ASSERT_LE(a.beta[m], bmax + 1e-9);
      if (m > 0) {
        ASSERT_GE(a.beta[m - 1], a.beta[m] - 1e-9);
      }
    }
    if (a.congested) {
      ASSERT_NEAR(a.total(), C, 1e-9 * std::max(1.0, C));
    }
    auto s = satisfaction(a);
    ASSERT_GE(s.average, s.baseline - 1e-12);
    for (std::size_t m = 0; m < M; ++m) {
      ASSERT_LE(s.per_rank[m], 1.0 + 1e-12);
      ASSERT_GE(s.per_rank[m], bmin / bmax - 1e-12);
    }
    if (k.front() == k.back()) {
      ASSERT_NEAR(s.average, s.baseline, 1e-9);
    } else if (a.congested) {
      ++unequal;
      strict += s.average > s.baseline + 1e-12;
    }
  }
  // Strict gain whenever popularity differs and the cell is congested.
  EXPECT_EQ(strict, unequal);
}

TEST(VideoAlloc, PopularityErrors) {
  EXPECT_THROW(allocate_popularity(1.0, 2.0, 0.6, {5, 3}), InfeasibleAllocation);
  EXPECT_THROW(allocate_popularity(10.0, 2.0, 0.6, {3, 5}), InvalidArgument);
  EXPECT_THROW(allocate_popularity(10.0, 0.5, 0.6, {3}), InvalidArgument);
  EXPECT_THROW(allocate_popularity(10.0, 2.0, 0.6, {}), InvalidArgument);
  EXPECT_THROW(allocate_popularity(2.0, 2.0, 0.6, {0, 0}), InvalidArgument);
}

TEST(VideoAlloc, PopularityLayerGrid) {
  auto a = allocate_popularity(2.0, 2.0, 0.6, {150, 50}, LayerGrid{0.5, 0.1});
  EXPECT_EQ(a.layers, (std::vector<int>{7, 3}));
}

TEST(VideoAlloc, QualityCounts) {
  auto p = preset("table-8.1").popularity;
  auto c = counts_hq_lq(p.capacity_mbps, p.beta_max_mbps, p.beta_min_mbps);
  EXPECT_EQ(c.hq, 15);
  EXPECT_EQ(c.lq, 50);
  EXPECT_EQ(counts_hq_lq(1.5, 2.0, 0.6).hq, 0);
  auto e = counts_hq_lq(7.0, 1.0, 1.0);
  EXPECT_EQ(e.hq, e.lq);
  auto full = allocate_popularity(p.capacity_mbps, p.beta_max_mbps, p.beta_min_mbps, std::vector<long>(15, 13));
  EXPECT_FALSE(full.congested);
}

TEST(VideoAlloc, MulticastCellDimensions) {
  MulticastTraffic t = preset("table-7.1").mbs.traffic();
  // Per-call means from the preset: full 130, handover floor 86, new-call floor 115.6 kbps.
  EXPECT_NEAR(t.mean_full(), 0.5 * 64 + 0.1 * 500 + 0.4 * 120, 1e-12);
  EXPECT_NEAR(t.mean_hand_floor(), 0.5 * 64 + 0.1 * 300 + 0.4 * 60, 1e-12);
  EXPECT_NEAR(t.mean_new_floor(), 0.5 * 64 + 0.1 * 500 + 0.4 * 84, 1e-12);
  auto sc = multicast_schemes();
  ASSERT_EQ(sc.size(), 7u);
  auto q1 = multicast_dimensions(t, sc[0]);
  EXPECT_EQ(q1.M, 12);
  EXPECT_EQ(q1.N, 12 + static_cast<int>(8000 / 130.0));
  EXPECT_EQ(q1.N + q1.S, 12 + static_cast<int>(14000 / 86.0));
  EXPECT_EQ(q1.N + q1.L, 12 + static_cast<int>(14000 / 115.6));
  auto q2 = multicast_dimensions(t, sc[1]);
  EXPECT_EQ(q2.N + q2.S, 12 + static_cast<int>(8000 / 86.0));
  EXPECT_EQ(multicast_dimensions(t, sc[3]).S, 0);
  auto q5 = multicast_dimensions(t, sc[4]);
  EXPECT_EQ(q5.N, 12 + static_cast<int>(14000 / 130.0));
  for (const auto &s : sc) {
    auto q = multicast_dimensions(t, s);
    EXPECT_NO_THROW(q.validate()) << s.name();
    if (s.policy != NonMbsPolicy::prioritized) {
      EXPECT_EQ(q.L, q.S) << s.name();
    }
  }
}

TEST(VideoAlloc, StateAllocationMonotone) {
  MulticastTraffic t = preset("table-7.1").mbs.traffic();
  auto sc = multicast_schemes()[0];
  auto q = multicast_dimensions(t, sc);
  auto prev = multicast_state_allocation(t, sc, q.M);
  EXPECT_DOUBLE_EQ(prev.c_b, 12000.0);
  EXPECT_EQ(prev.unicast_layers, 10.0);
  for (int i = q.M + 1; i <= q.N + q.S; ++i) {
    auto a = multicast_state_allocation(t, sc, i);
    EXPECT_LE(a.c_b, prev.c_b + 1e-9) << i;
    EXPECT_GE(a.c_b, c_min_b(t.sessions) - 1e-9);
    EXPECT_LE(a.unicast_layers, prev.unicast_layers) << i;
    EXPECT_GE(a.unicast_layers, t.unicast_min_layers);
    for (std::size_t k = 0; k < a.mbs_layers.size(); ++k) EXPECT_LE(a.mbs_layers[k], prev.mbs_layers[k]);
    EXPECT_LE(a.c_b + a.c_nb, t.capacity_kbps + 1e-9);
    prev = a;
  }
  EXPECT_DOUBLE_EQ(prev.c_b, c_min_b(t.sessions));
  auto fixed = multicast_state_allocation(t, multicast_schemes()[1], q.N + q.S);
  EXPECT_DOUBLE_EQ(fixed.c_b, 12000.0);
}
