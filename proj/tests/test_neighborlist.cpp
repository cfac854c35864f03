#include <gtest/gtest.h>

#include <algorithm>

#include "femtonet/neighborlist.hpp"

using namespace femtonet;

namespace {

struct Scene {
  CellTopology topo{1000.0, 10.0, 60.0};
  SpectrumPlan plan = make_empty_plan(Scheme::static_reuse, {});
  CoordinationGraph coord;

  void add(int id, double x, double y, BandId band, Access access = Access::open) {
    FemtoSite s;
    s.id = id;
    s.position = {x, y};
    s.access = access;
    topo.add_femto(s);
    plan.femto_assignment[id] = {plan.partition.get(band), std::nullopt, Scheme::static_reuse};
  }
  void link(int a, int b) {
    coord[a].insert(b);
    coord[b].insert(a);
  }
};

std::vector<int> sorted(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  return v;
}

} // namespace

TEST(NeighborList, WorkedScan) {
  Scene s;
  s.add(0, 0, 0, BandId::m2);
  s.add(1, 20, 0, BandId::m3);
  s.add(2, 0, 25, BandId::m3);
  s.add(3, -50, 0, BandId::m3);
  s.link(0, 1);
  s.link(0, 2);
  s.link(0, 3);
  RssiScan scan;
  scan.level_dbm = {{1, -70.0}, {2, -80.0}, {3, -95.0}};
  ListContext ctx{{5.0, 0.0}, 40.0, {}, &s.coord};
  auto l = build_list_from_femto(scan, s.plan, s.topo, 0, ctx);
  EXPECT_EQ(sorted(l.ids()), (std::vector<int>{1, 2}));
  EXPECT_EQ(l.n_detected, 2);
  EXPECT_EQ(l.n_strong, 1);
  EXPECT_EQ(l.n_same_freq, 0);
  EXPECT_EQ(l.m_hidden, 1);
  EXPECT_EQ(l.n_f, 2);
  EXPECT_EQ(l.entries[0].id, 1);
  EXPECT_EQ(l.entries[1].provenance, Provenance::hidden_by_location);
}

TEST(NeighborList, EmptyScan) {
  Scene s;
  s.add(0, 0, 0, BandId::m2);
  RssiScan scan;
  ListContext ctx{{1.0, 0.0}, 40.0, {}, &s.coord};
  auto l = build_list_from_femto(scan, s.plan, s.topo, 0, ctx);
  EXPECT_TRUE(l.entries.empty());
  EXPECT_EQ(l.n_f, 0);
}

TEST(NeighborList, SameFrequencyStrongFapIsPrunedThenRecoveredByLocation) {
  Scene s;
  s.add(0, 0, 0, BandId::m2);
  s.add(1, 10, 0, BandId::m2);
  s.add(2, 200, 0, BandId::m2);
  s.link(0, 1);
  s.link(0, 2);
  RssiScan scan;
  scan.level_dbm = {{1, -60.0}, {2, -62.0}};
  ListContext ctx{{5.0, 0.0}, 40.0, {}, &s.coord};
  auto l = build_list_from_femto(scan, s.plan, s.topo, 0, ctx);
  // 1 is near enough to come back as a location candidate, 2 is not.
  EXPECT_EQ(l.ids(), std::vector<int>{1});
  EXPECT_EQ(l.n_same_freq, 2);
  EXPECT_EQ(l.n_f, l.n_strong - l.n_same_freq + l.m_hidden);
}

TEST(NeighborList, ClosedFapsNeedMembership) {
  Scene s;
  s.add(0, 0, 0, BandId::m2);
  s.add(1, 10, 0, BandId::m3, Access::closed);
  s.link(0, 1);
  RssiScan scan;
  scan.level_dbm = {{1, -60.0}};
  ListContext ctx{{5.0, 0.0}, 40.0, {}, &s.coord};
  EXPECT_TRUE(build_list_from_femto(scan, s.plan, s.topo, 0, ctx).entries.empty());
  EXPECT_TRUE(rssi_only_list(scan, s.topo, ctx, 0).empty());
  ctx.closed_member_of = {1};
  EXPECT_EQ(build_list_from_femto(scan, s.plan, s.topo, 0, ctx).ids(), std::vector<int>{1});
}

TEST(NeighborList, HiddenDiscoveryChainsThroughCoordination) {
  // 3 is only known to 2, which is only known through listed FAP 1.
  Scene s;
  s.add(0, 0, 0, BandId::m2);
  s.add(1, 15, 0, BandId::m3);
  s.add(2, 0, 20, BandId::m3);
  s.add(3, -10, 20, BandId::m3);
  s.link(0, 1);
  s.link(1, 2);
  s.link(2, 3);
  RssiScan scan;
  scan.level_dbm = {{1, -60.0}};
  ListContext ctx{{0.0, 5.0}, 40.0, {}, &s.coord};
  auto l = build_list_from_femto(scan, s.plan, s.topo, 0, ctx);
  EXPECT_EQ(sorted(l.ids()), (std::vector<int>{1, 2, 3}));
  EXPECT_EQ(l.m_hidden, 2);
}

TEST(NeighborList, MacroServedSingleStrongFap) {
  Scene s;
  s.add(0, 0, 0, BandId::m2);
  s.add(1, 500, 0, BandId::m3);
  RssiScan scan;
  scan.level_dbm = {{0, -60.0}};
  ListContext ctx{{3.0, 0.0}, 40.0, {}, &s.coord};
  auto l = build_list_from_macro(scan, s.plan, s.topo, ctx);
  EXPECT_TRUE(l.includes_macro);
  EXPECT_EQ(l.ids(), std::vector<int>{0});
}

TEST(NeighborList, MacroServedAllWeak) {
  Scene s;
  s.add(0, 300, 0, BandId::m2);
  RssiScan scan;
  scan.level_dbm = {{0, -100.0}};
  ListContext ctx{{0.0, 0.0}, 40.0, {}, &s.coord};
  auto l = build_list_from_macro(scan, s.plan, s.topo, ctx);
  EXPECT_TRUE(l.includes_macro);
  EXPECT_TRUE(l.entries.empty());
}

TEST(NeighborList, ThresholdValidation) {
  Scene s;
  s.add(0, 0, 0, BandId::m2);
  RssiScan scan;
  scan.s_t1_dbm = scan.s_t0_dbm;
  ListContext ctx{{0.0, 0.0}, 40.0, {}, &s.coord};
  EXPECT_THROW(build_list_from_femto(scan, s.plan, s.topo, 0, ctx), InvalidArgument);
  scan = {};
  ctx.d_max_m = 0.0;
  EXPECT_THROW(build_list_from_femto(scan, s.plan, s.topo, 0, ctx), InvalidArgument);
}

TEST(NeighborList, CountIdentityOnRandomScans) {
  Rng rng = make_rng(33);
  for (int trial = 0; trial < 1000; ++trial) {
    MacroGeometry g;
    g.macro_radius_m = 150.0;
    g.reference_fap_distance_m = 0.0;
    auto topo = place_femtocells(rng(), 2 + static_cast<int>(uniform_index(rng, 30)), g);
    auto plan = build_plan(Scheme::static_reuse, topo, {10e6, 0.333, 0.6, rng()});
    RssiScan scan;
    for (const auto &f : topo.femtocells)
      if (f.id != 0 && uniform01(rng) < 0.8) scan.level_dbm[f.id] = -100.0 + 50.0 * uniform01(rng);
    ListContext ctx{{uniform01(rng) * 10.0, 0.0}, 40.0, {}, nullptr};
    auto l = build_list_from_femto(scan, plan, topo, 0, ctx);
    // Independent recount of each category.
    auto serving = plan.assignment(0).center_band;
    int a = 0, b = 0, c = 0;
    for (auto &[id, lvl] : scan.level_dbm) {
      if (lvl < scan.s_t0_dbm) continue;
      ++a;
      if (lvl < scan.s_t1_dbm) continue;
      ++b;
      c += plan.assignment(id).center_band == serving;
    }
    int hidden = 0;
    for (const auto &e : l.entries) hidden += e.provenance == Provenance::hidden_by_location;
    ASSERT_EQ(l.n_detected, a);
    ASSERT_EQ(l.n_strong, b);
    ASSERT_EQ(l.n_same_freq, c);
    ASSERT_EQ(l.m_hidden, hidden);
    ASSERT_EQ(l.n_f, b - c + hidden);
    ASSERT_EQ(l.n_f, static_cast<int>(l.entries.size()));
    for (const auto &e : l.entries) ASSERT_TRUE(std::isnan(e.rssi_dbm) || e.rssi_dbm >= scan.s_t0_dbm);
  }
}

TEST(NeighborList, MacroListCoversEveryFapWithinReach) {
  Rng rng = make_rng(44);
  for (int trial = 0; trial < 100; ++trial) {
    MacroGeometry g;
    g.macro_radius_m = 200.0;
    g.reference_fap_distance_m = 0.0;
    auto topo = place_femtocells(rng(), 150, g);
    auto plan = build_plan(Scheme::static_reuse, topo, {10e6, 0.333, 0.6, rng()});
    RssiScan scan;
    for (const auto &f : topo.femtocells)
      if (uniform01(rng) < 0.5) scan.level_dbm[f.id] = -100.0 + 40.0 * uniform01(rng);
    Vec2 ue{100.0 * uniform01(rng) - 50.0, 100.0 * uniform01(rng) - 50.0};
    ListContext ctx{ue, 40.0, {}, nullptr};
    auto l = build_list_from_macro(scan, plan, topo, ctx);
    auto ids = l.ids();
    std::set<int> listed(ids.begin(), ids.end());
    for (const auto &f : topo.femtocells) {
      bool near = distance(ue, f.position) <= 40.0;
      auto it = scan.level_dbm.find(f.id);
      bool strong = it != scan.level_dbm.end() && it->second >= scan.s_t1_dbm;
      ASSERT_EQ(listed.count(f.id) == 1, near || strong) << "fap " << f.id;
    }
  }
}

TEST(NeighborList, NoObstructionMeansNothingMissing) {
  MissingTargetParams mp;
  mp.hidden_probability = 0.0;
  auto e = p_target_missing(20, 60, 5, mp);
  EXPECT_EQ(e.proposed.value, 0.0);
  EXPECT_EQ(e.baseline.value, 0.0);
}

TEST(NeighborList, BaselineMissesExactlyTheObstructedWeakTargets) {
  MissingTargetParams mp;
  Rng rng = make_rng(8);
  int checked = 0;
  while (checked < 200) {
    auto t = draw_missing_target_trial(20, rng, mp);
    if (t.target < 0) continue;
    ++checked;
    ListContext ctx{t.ue, mp.d_max_m, {}, &t.coordination};
    auto base = rssi_only_list(t.scan, t.topo, ctx, 0);
    bool missing = std::find(base.begin(), base.end(), t.target) == base.end();
    auto it = t.scan.level_dbm.find(t.target);
    bool below = it == t.scan.level_dbm.end() || it->second < mp.s_t0_dbm;
    ASSERT_EQ(missing, below);
    if (missing) {
      ASSERT_TRUE(t.obstructed.count(t.target));
    }
  }
}

TEST(NeighborList, ProposedNeverWorseThanBaseline) {
  for (int n : {5, 20, 60}) {
    auto e = p_target_missing(n, 200, 3);
    EXPECT_LE(e.proposed.value, e.baseline.value) << n;
  }
  EXPECT_THROW(p_target_missing(5, 0, 1), InvalidArgument);
}
