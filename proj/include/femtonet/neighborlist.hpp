#ifndef FEMTONET_NEIGHBORLIST_HPP
#define FEMTONET_NEIGHBORLIST_HPP

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <set>
#include <vector>

#include "femtonet/common.hpp"
#include "femtonet/radio.hpp"
#include "femtonet/spectrum.hpp"
#include "femtonet/topology.hpp"

namespace femtonet {

struct RssiScan {
  // Measured level per FAP; callers may include sub-threshold entries, they are ignored.
  std::map<int, double> level_dbm;
  double s_t0_dbm = -90.0;
  double s_t1_dbm = -75.0;
};

enum class Provenance { strong_signal, hidden_by_location };

struct NeighborEntry {
  int id = 0;
  // NaN when the FAP was not detected at all.
  double rssi_dbm = std::numeric_limits<double>::quiet_NaN();
  Provenance provenance = Provenance::strong_signal;
};

struct NeighborList {
  std::vector<NeighborEntry> entries;
  bool includes_macro = false;
  int n_detected = 0; // |A|
  int n_strong = 0;   // |B|
  int n_same_freq = 0; // |C|
  int m_hidden = 0;   // |D|
  int n_f = 0;

  std::vector<int> ids() const {
    std::vector<int> out;
    for (const auto &e : entries) out.push_back(e.id);
    return out;
  }
};

// Which FAPs each FAP can coordinate with (exchange location information).
using CoordinationGraph = std::map<int, std::set<int>>;

inline CoordinationGraph coordination_from_topology(const CellTopology &topo) {
  CoordinationGraph g;
  for (const auto &f : topo.femtocells) {
    auto n = neighbors_of(topo, f.id);
    g[f.id] = std::set<int>(n.begin(), n.end());
  }
  return g;
}

struct ListContext {
  Vec2 ue;
  double d_max_m = 40.0;
  // Closed FAPs this UE may use; open FAPs are always accessible.
  std::set<int> closed_member_of;
  // When null the topology neighbor relation is used.
  const CoordinationGraph *coordination = nullptr;
};

namespace detail {

inline std::vector<Band> occupied(const SpectrumPlan &plan, int id) {
  const auto &a = plan.assignment(id);
  std::vector<Band> out{a.center_band};
  if (a.edge_band) out.push_back(*a.edge_band);
  return out;
}

// True iff the spectrum used by `inner` lies inside the spectrum used by `outer`.
inline bool spectrum_within(const std::vector<Band> &inner, const std::vector<Band> &outer) {
  std::vector<std::pair<double, double>> iv;
  for (const auto &b : outer)
    if (!b.empty()) iv.push_back({b.lo_hz, b.hi_hz});
  std::sort(iv.begin(), iv.end());
  std::vector<std::pair<double, double>> merged;
  for (auto &x : iv) {
    if (!merged.empty() && x.first <= merged.back().second)
      merged.back().second = std::max(merged.back().second, x.second);
    else
      merged.push_back(x);
  }
  for (const auto &b : inner) {
    if (b.empty()) continue;
    bool covered = false;
    for (auto &m : merged)
      if (m.first <= b.lo_hz && b.hi_hz <= m.second) covered = true;
    if (!covered) return false;
  }
  return true;
}

inline bool accessible(const CellTopology &topo, const ListContext &ctx, int id) {
  return topo.site(id).access == Access::open || ctx.closed_member_of.count(id) != 0;
}

inline NeighborList build_list(const RssiScan &scan, const SpectrumPlan &plan, const CellTopology &topo, std::optional<int> serving, const ListContext &ctx) {
  if (!(ctx.d_max_m > 0.0)) throw InvalidArgument("d_max must be positive");
  if (!(scan.s_t1_dbm > scan.s_t0_dbm)) throw InvalidArgument("S_T1 must exceed S_T0");
  if (serving) topo.site(*serving);
  CoordinationGraph owned;
  const CoordinationGraph *coord = ctx.coordination;
  if (!coord) {
    owned = coordination_from_topology(topo);
    coord = &owned;
  }
  std::vector<Band> serving_bands;
  if (serving) serving_bands = occupied(plan, *serving);

  auto usable = [&](int id) { return (!serving || id != *serving) && topo.contains(id) && accessible(topo, ctx, id); };
  auto same_freq = [&](int id) { return serving && spectrum_within(occupied(plan, id), serving_bands); };
  auto rssi = [&](int id) {
    auto it = scan.level_dbm.find(id);
    return it == scan.level_dbm.end() || it->second < scan.s_t0_dbm ? -std::numeric_limits<double>::infinity() : it->second;
  };

  NeighborList out;
  std::set<int> listed;
  for (auto &[id, lvl] : scan.level_dbm) {
    if (!usable(id) || lvl < scan.s_t0_dbm) continue;
    ++out.n_detected;
    if (lvl < scan.s_t1_dbm) continue;
    ++out.n_strong;
    if (same_freq(id)) {
      ++out.n_same_freq;
      continue;
    }
    out.entries.push_back({id, lvl, Provenance::strong_signal});
    listed.insert(id);
  }

  // Hidden candidates are learned through coordination, spreading from the
  // serving FAP (or the macro BS, which knows every FAP) and each listed FAP.
  std::set<int> known;
  std::deque<int> frontier;
  auto learn_from = [&](int k) {
    auto it = coord->find(k);
    if (it == coord->end()) return;
    for (int m : it->second) known.insert(m);
  };
  if (serving) {
    learn_from(*serving);
  } else {
    for (const auto &f : topo.femtocells) known.insert(f.id);
  }
  for (int k : listed) frontier.push_back(k);
  std::set<int> hidden;
  while (true) {
    while (!frontier.empty()) {
      learn_from(frontier.front());
      frontier.pop_front();
    }
    bool grew = false;
    for (int m : known) {
      if (!usable(m) || listed.count(m) || hidden.count(m)) continue;
      double r = rssi(m);
      bool category2 = r < scan.s_t1_dbm || same_freq(m);
      if (!category2 || distance(ctx.ue, topo.site(m).position) > ctx.d_max_m) continue;
      hidden.insert(m);
      frontier.push_back(m);
      grew = true;
    }
    if (!grew) break;
  }
  for (int m : hidden) {
    double r = rssi(m);
    out.entries.push_back({m, std::isfinite(r) ? r : std::numeric_limits<double>::quiet_NaN(), Provenance::hidden_by_location});
  }
  out.m_hidden = static_cast<int>(hidden.size());
  out.n_f = out.n_strong - out.n_same_freq + out.m_hidden;

  auto key = [](const NeighborEntry &e) { return std::isnan(e.rssi_dbm) ? -std::numeric_limits<double>::infinity() : e.rssi_dbm; };
  std::stable_sort(out.entries.begin(), out.entries.end(), [&](const NeighborEntry &a, const NeighborEntry &b) {
    if (key(a) != key(b)) return key(a) > key(b);
    if (a.provenance != b.provenance) return a.provenance == Provenance::strong_signal;
    return a.id < b.id;
  });
  return out;
}

} // namespace detail

inline NeighborList build_list_from_femto(const RssiScan &scan, const SpectrumPlan &plan, const CellTopology &topo, int serving, const ListContext &ctx) {
  return detail::build_list(scan, plan, topo, serving, ctx);
}

// Macro-served variant: no same-frequency pruning, and the macro itself is kept as a
// fallback target outside the femto counts.
inline NeighborList build_list_from_macro(const RssiScan &scan, const SpectrumPlan &plan, const CellTopology &topo, const ListContext &ctx) {
  NeighborList l = detail::build_list(scan, plan, topo, std::nullopt, ctx);
  l.includes_macro = true;
  return l;
}

// Plain RSSI list: every detected, accessible FAP.
inline std::vector<int> rssi_only_list(const RssiScan &scan, const CellTopology &topo, const ListContext &ctx, std::optional<int> serving = std::nullopt) {
  std::vector<int> out;
  for (auto &[id, lvl] : scan.level_dbm)
    if (lvl >= scan.s_t0_dbm && topo.contains(id) && (!serving || id != *serving) && detail::accessible(topo, ctx, id)) out.push_back(id);
  return out;
}

struct MissingTargetParams {
  double area_radius_m = 100.0;
  double hidden_probability = 0.3;
  double obstruction_loss_db = 30.0;
  double d_max_m = 40.0;
  double s_t0_dbm = -90.0;
  double s_t1_dbm = -75.0;
  PropagationParams propagation;
};

struct MissingTargetEstimate {
  Estimate proposed;
  Estimate baseline;
  long trials_used = 0;
};

struct MissingTargetTrial {
  CellTopology topo;
  SpectrumPlan plan;
  Vec2 ue;
  int target = -1;
  std::set<int> obstructed;
  RssiScan scan;
  CoordinationGraph coordination;
};

// One draw of the hidden-target experiment: a serving FAP at the origin, `count` others
// scattered around it, a UE on the serving cell edge, and random obstructions. The target
// is the geometrically closest FAP whose unobstructed level reaches S_T1; -1 if none.
inline MissingTargetTrial draw_missing_target_trial(int count, Rng &rng, const MissingTargetParams &mp) {
  MacroGeometry g;
  g.macro_radius_m = mp.area_radius_m;
  g.pin_reference = true;
  g.reference_fap_distance_m = 0.0;
  MissingTargetTrial t;
  t.topo = place_femtocells(rng(), count, g);
  t.plan = build_plan(Scheme::static_reuse, t.topo, {10e6, 0.333, 0.6, rng()});
  double a = 2.0 * M_PI * uniform01(rng);
  t.ue = {t.topo.femto_radius_m * std::cos(a), t.topo.femto_radius_m * std::sin(a)};
  t.scan.s_t0_dbm = mp.s_t0_dbm;
  t.scan.s_t1_dbm = mp.s_t1_dbm;
  double best = INFINITY;
  t.coordination = coordination_from_topology(t.topo);
  for (const auto &f : t.topo.femtocells) {
    if (f.id == 0) continue;
    bool blocked = uniform01(rng) < mp.hidden_probability;
    double d = std::max(distance(t.ue, f.position), 1.0);
    LinkBudget lb{mp.propagation.femto_tx_w, d, t.topo.femto_walls};
    double clear_dbm = linear_to_db(received_power(mp.propagation, lb, LinkKind::femto_interferer)) + 30.0;
    double lvl = clear_dbm - (blocked ? mp.obstruction_loss_db : 0.0);
    if (lvl >= mp.s_t0_dbm) t.scan.level_dbm[f.id] = lvl;
    if (blocked) {
      t.obstructed.insert(f.id);
      t.coordination[0].erase(f.id);
      t.coordination[f.id].erase(0);
    }
    if (clear_dbm >= mp.s_t1_dbm && d < best) {
      best = d;
      t.target = f.id;
    }
  }
  return t;
}

// Probability that the best handover target is missing from the list, conditioned on a
// target existing, for the proposed list and the RSSI-only baseline. Trials that draw no
// target are redrawn.
inline MissingTargetEstimate p_target_missing(int femto_count, long trials, std::uint64_t seed, const MissingTargetParams &mp = {}) {
  if (trials < 1) throw InvalidArgument("trials must be >= 1");
  Rng rng = make_rng(seed, 0x6d6973);
  long miss_p = 0, miss_b = 0, used = 0, draws = 0;
  while (used < trials) {
    if (++draws > 100 * trials + 1000) throw NonConvergence("no handover target found in the sampled topologies");
    MissingTargetTrial t = draw_missing_target_trial(femto_count, rng, mp);
    if (t.target < 0) continue;
    ++used;
    ListContext ctx{t.ue, mp.d_max_m, {}, &t.coordination};
    auto prop = build_list_from_femto(t.scan, t.plan, t.topo, 0, ctx).ids();
    auto base = rssi_only_list(t.scan, t.topo, ctx, 0);
    if (std::find(prop.begin(), prop.end(), t.target) == prop.end()) ++miss_p;
    if (std::find(base.begin(), base.end(), t.target) == base.end()) ++miss_b;
  }
  auto est = [&](long k) {
    double p = static_cast<double>(k) / used;
    return Estimate{p, std::sqrt(p * (1 - p) / used)};
  };
  return {est(miss_p), est(miss_b), used};
}

} // namespace femtonet

#endif
