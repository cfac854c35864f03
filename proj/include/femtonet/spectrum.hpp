#ifndef FEMTONET_SPECTRUM_HPP
#define FEMTONET_SPECTRUM_HPP

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "femtonet/common.hpp"
#include "femtonet/topology.hpp"

namespace femtonet {

enum class Scheme { dedicated, shared, sub, static_reuse, dynamic_reuse };

inline const char *to_string(Scheme s) {
  switch (s) {
  case Scheme::dedicated: return "dedicated";
  case Scheme::shared: return "shared";
  case Scheme::sub: return "sub";
  case Scheme::static_reuse: return "static";
  case Scheme::dynamic_reuse: return "dynamic";
  }
  return "?";
}

inline Scheme scheme_from_string(const std::string &s) {
  for (Scheme k : {Scheme::dedicated, Scheme::shared, Scheme::sub, Scheme::static_reuse, Scheme::dynamic_reuse})
    if (s == to_string(k)) return k;
  throw ConfigError("unknown scheme '" + s + "'");
}

enum class BandId { none, full, femto_part, macro_part, m1, m2, m3, b1, b2, b3, b4, b5 };

inline const char *to_string(BandId b) {
  static const char *names[] = {"none", "full", "femto", "macro", "Bm1", "Bm2", "Bm3", "B1", "B2", "B3", "B4", "B5"};
  return names[static_cast<int>(b)];
}

// Half-open frequency interval [lo, hi).
struct Band {
  BandId id = BandId::none;
  double lo_hz = 0.0;
  double hi_hz = 0.0;
  double width() const { return hi_hz - lo_hz; }
  bool empty() const { return !(hi_hz > lo_hz); }
};

inline bool operator==(const Band &a, const Band &b) { return a.id == b.id && a.lo_hz == b.lo_hz && a.hi_hz == b.hi_hz; }

inline bool bands_overlap(const Band &a, const Band &b) {
  if (a.empty() || b.empty()) return false;
  return std::min(a.hi_hz, b.hi_hz) > std::max(a.lo_hz, b.lo_hz);
}

struct BandPartition {
  double total_hz = 0.0;
  std::array<Band, 3> macro_bands;
  std::array<Band, 3> edge_thirds;
  std::array<Band, 2> edge_halves;

  // Edge sub-bands live inside the third macro band, as seen from macro #1.
  explicit BandPartition(double total = 10e6) : total_hz(total) {
    if (!(total > 0.0)) throw ConfigError("total bandwidth must be positive");
    // Boundaries are multiples of total/18 so every tiling is exact in doubles.
    auto at = [&](int tick) { return tick == 18 ? total : total * tick / 18.0; };
    macro_bands = {Band{BandId::m1, at(0), at(6)}, Band{BandId::m2, at(6), at(12)}, Band{BandId::m3, at(12), at(18)}};
    edge_thirds = {Band{BandId::b1, at(12), at(14)}, Band{BandId::b2, at(14), at(16)}, Band{BandId::b3, at(16), at(18)}};
    edge_halves = {Band{BandId::b4, at(12), at(15)}, Band{BandId::b5, at(15), at(18)}};
  }

  Band full() const { return {BandId::full, 0.0, total_hz}; }

  Band get(BandId id) const {
    switch (id) {
    case BandId::full: return full();
    case BandId::m1: return macro_bands[0];
    case BandId::m2: return macro_bands[1];
    case BandId::m3: return macro_bands[2];
    case BandId::b1: return edge_thirds[0];
    case BandId::b2: return edge_thirds[1];
    case BandId::b3: return edge_thirds[2];
    case BandId::b4: return edge_halves[0];
    case BandId::b5: return edge_halves[1];
    default: throw InvalidArgument(std::string("band not part of the partition: ") + to_string(id));
    }
  }
};

struct FemtoBandAssignment {
  Band center_band;
  std::optional<Band> edge_band;
  Scheme scheme = Scheme::shared;
};

struct PartitionParams {
  double total_hz = 10e6;
  // Femto share of the band for the dedicated and sub schemes.
  double femto_fraction = 0.333;
  double edge_fraction = 0.6;
  std::uint64_t seed = 1;
};

enum class ConfigureBranch { none, one, two_mutual, two_separate, three, search };

inline const char *to_string(ConfigureBranch b) {
  static const char *names[] = {"none", "one", "two-mutual", "two-separate", "three", "search"};
  return names[static_cast<int>(b)];
}

struct SpectrumPlan {
  Scheme scheme = Scheme::shared;
  BandPartition partition;
  std::map<int, Band> macro_assignment;
  std::map<int, FemtoBandAssignment> femto_assignment;
  // Per-femto radius after any shrink events; absent means the topology default.
  std::map<int, double> radius_m;
  // Femtos whose edge band could not be configured even after shrinking; they serve
  // their whole area on the center band.
  std::vector<int> center_only;
  double edge_fraction = 0.6;

  double radius(const CellTopology &topo, int id) const {
    auto it = radius_m.find(id);
    return it == radius_m.end() ? topo.femto_radius_m : it->second;
  }

  const FemtoBandAssignment &assignment(int id) const {
    auto it = femto_assignment.find(id);
    if (it == femto_assignment.end()) throw NotFound("femto " + std::to_string(id) + " has no band assignment");
    return it->second;
  }

  // Band femto `id` uses for a UE at `dist_m` from it.
  Band band_at(const CellTopology &topo, int id, double dist_m) const {
    const auto &a = assignment(id);
    if (scheme == Scheme::dynamic_reuse && a.edge_band && dist_m > edge_fraction * radius(topo, id)) return *a.edge_band;
    return a.center_band;
  }
};

inline bool femtos_overlap(const SpectrumPlan &plan, const CellTopology &topo, int a, int b) {
  return distance(topo.site(a).position, topo.site(b).position) < plan.radius(topo, a) + plan.radius(topo, b);
}

// Assigned femtos whose coverage disc overlaps that of `id`.
inline std::vector<int> overlapping_assigned(const SpectrumPlan &plan, const CellTopology &topo, int id) {
  double reach = plan.radius(topo, id) + topo.femto_radius_m;
  for (auto &[k, r] : plan.radius_m) reach = std::max(reach, plan.radius(topo, id) + r);
  std::vector<int> out;
  for (int k : topo.within(id, reach))
    if (plan.femto_assignment.count(k) && femtos_overlap(plan, topo, id, k)) out.push_back(k);
  return out;
}

inline SpectrumPlan make_empty_plan(Scheme scheme, const PartitionParams &pp) {
  SpectrumPlan plan;
  plan.scheme = scheme;
  plan.partition = BandPartition(pp.total_hz);
  plan.edge_fraction = pp.edge_fraction;
  const auto &P = plan.partition;
  for (int m = 0; m < 7; ++m) {
    switch (scheme) {
    case Scheme::dedicated: plan.macro_assignment[m] = {BandId::macro_part, pp.femto_fraction * pp.total_hz, pp.total_hz}; break;
    case Scheme::shared:
    case Scheme::sub: plan.macro_assignment[m] = P.full(); break;
    case Scheme::static_reuse:
    case Scheme::dynamic_reuse:
      // Reference cell is macro #1; the first-tier ring alternates #2 and #3.
      plan.macro_assignment[m] = m == 0 ? P.macro_bands[0] : P.macro_bands[m % 2 == 1 ? 1 : 2];
      break;
    }
  }
  return plan;
}

struct ConfigureResult {
  FemtoBandAssignment assignment;
  ConfigureBranch branch = ConfigureBranch::none;
  // Which listed rule fired, e.g. "B4->B5" or "B4+B5"; empty for search/extension paths.
  std::string rule;
  int shrink_steps = 0;
};

namespace detail {

inline BandId one_interferer_rule(BandId e) {
  switch (e) {
  case BandId::b5: return BandId::b4;
  case BandId::b4: return BandId::b5;
  case BandId::b1: return BandId::b2;
  case BandId::b2: return BandId::b3;
  case BandId::b3: return BandId::b1;
  default: return BandId::none;
  }
}

inline BandId edge_id(const SpectrumPlan &plan, int id) {
  const auto &a = plan.assignment(id);
  return a.edge_band ? a.edge_band->id : BandId::none;
}

// True iff femto `id` holding `edge` conflicts with none of its overlapping neighbors,
// reading tentative edges from `pending` first.
inline bool edge_ok(const SpectrumPlan &plan, const CellTopology &topo, int id, BandId edge, const std::map<int, BandId> &pending) {
  Band mine = plan.partition.get(edge);
  for (int k : overlapping_assigned(plan, topo, id)) {
    auto it = pending.find(k);
    BandId theirs = it != pending.end() ? it->second : edge_id(plan, k);
    if (theirs == BandId::none) continue;
    if (bands_overlap(mine, plan.partition.get(theirs))) return false;
  }
  for (auto &[k, e] : pending) {
    if (k == id || plan.femto_assignment.count(k)) continue;
    if (femtos_overlap(plan, topo, id, k) && bands_overlap(mine, plan.partition.get(e))) return false;
  }
  return true;
}

inline bool all_ok(const SpectrumPlan &plan, const CellTopology &topo, const std::map<int, BandId> &pending) {
  for (auto &[k, e] : pending)
    if (!edge_ok(plan, topo, k, e, pending)) return false;
  return true;
}

// Minimal-change search over edges of the newcomer and its interferers. Used when the
// listed rules do not apply or would create a conflict further out.
inline std::optional<std::map<int, BandId>> search_edges(const SpectrumPlan &plan, const CellTopology &topo, int id, const std::vector<int> &interferers) {
  static const BandId options[] = {BandId::b1, BandId::b2, BandId::b3, BandId::b4, BandId::b5};
  std::vector<int> vars{id};
  vars.insert(vars.end(), interferers.begin(), interferers.end());
  std::optional<std::map<int, BandId>> best;
  int best_changes = 1 << 30;
  std::vector<int> choice(vars.size(), 0);
  while (true) {
    std::map<int, BandId> pending;
    int changes = 0;
    for (std::size_t v = 0; v < vars.size(); ++v) {
      pending[vars[v]] = options[choice[v]];
      if (v > 0 && edge_id(plan, vars[v]) != options[choice[v]]) ++changes;
    }
    if (changes < best_changes && all_ok(plan, topo, pending)) {
      best = pending;
      best_changes = changes;
      if (changes == 0) break;
    }
    std::size_t v = 0;
    while (v < vars.size() && ++choice[v] == 5) choice[v++] = 0;
    if (v == vars.size()) break;
  }
  return best;
}

} // namespace detail

// Chooses center/edge bands for a newly installed femto under dynamic reuse and
// applies them to `plan`. On failure the plan is left unchanged.
inline ConfigureResult configure_new_femto(SpectrumPlan &plan, const CellTopology &topo, int id) {
  if (plan.scheme != Scheme::dynamic_reuse) throw InvalidArgument("configure_new_femto requires a dynamic-reuse plan");
  topo.site(id);
  const auto &P = plan.partition;
  auto original_radius = plan.radius_m;
  std::optional<FemtoBandAssignment> original;
  if (auto it = plan.femto_assignment.find(id); it != plan.femto_assignment.end()) original = it->second;
  plan.femto_assignment.erase(id);

  ConfigureResult res;
  for (int step = 0; step <= 3; ++step) {
    if (step > 0) plan.radius_m[id] = topo.femto_radius_m * std::pow(0.8, step);
    res.shrink_steps = step;
    std::vector<int> I = overlapping_assigned(plan, topo, id);
    if (I.size() > 3) continue;

    std::map<int, BandId> pending;
    bool listed = true;
    if (I.empty()) {
      res.branch = ConfigureBranch::none;
      res.assignment = {P.macro_bands[1], P.macro_bands[2], Scheme::dynamic_reuse};
      plan.femto_assignment[id] = res.assignment;
      return res;
    }
    if (I.size() == 1) {
      res.branch = ConfigureBranch::one;
      BandId e = detail::edge_id(plan, I[0]);
      BandId mine = detail::one_interferer_rule(e);
      if (mine != BandId::none) {
        pending[id] = mine;
        res.rule = std::string(to_string(e)) + "->" + to_string(mine);
      } else {
        // Interferer was isolated and holds the whole third band: split it into halves.
        pending[I[0]] = BandId::b4;
        pending[id] = BandId::b5;
        res.rule = "split";
      }
    } else if (I.size() == 2) {
      BandId e1 = detail::edge_id(plan, I[0]);
      BandId e2 = detail::edge_id(plan, I[1]);
      if (femtos_overlap(plan, topo, I[0], I[1])) {
        res.branch = ConfigureBranch::two_mutual;
        auto is = [&](BandId a, BandId b) { return (e1 == a && e2 == b) || (e1 == b && e2 == a); };
        int h4 = e1 == BandId::b4 ? I[0] : I[1];
        int h5 = e1 == BandId::b4 ? I[1] : I[0];
        if (is(BandId::b4, BandId::b5)) {
          pending = {{id, BandId::b3}, {h4, BandId::b1}, {h5, BandId::b2}};
          res.rule = "B4+B5";
        } else if (is(BandId::b1, BandId::b2)) {
          pending[id] = BandId::b3;
          res.rule = "B1+B2";
        } else if (is(BandId::b2, BandId::b3)) {
          pending[id] = BandId::b1;
          res.rule = "B2+B3";
        } else if (is(BandId::b3, BandId::b1)) {
          pending[id] = BandId::b2;
          res.rule = "B3+B1";
        } else {
          listed = false;
        }
      } else {
        res.branch = ConfigureBranch::two_separate;
        // One-interferer rule against each, keeping the first candidate that clears both.
        for (BandId e : {e1, e2}) {
          BandId cand = detail::one_interferer_rule(e);
          if (cand != BandId::none && detail::edge_ok(plan, topo, id, cand, {{id, cand}})) {
            pending[id] = cand;
            res.rule = std::string(to_string(e)) + "->" + to_string(cand);
            break;
          }
        }
        if (pending.empty()) listed = false;
      }
    } else {
      res.branch = ConfigureBranch::three;
      for (const Band &t : P.edge_thirds)
        if (detail::edge_ok(plan, topo, id, t.id, {{id, t.id}})) {
          pending[id] = t.id;
          res.rule = std::string("free ") + to_string(t.id);
          break;
        }
      if (pending.empty()) listed = false;
    }

    if (listed && !detail::all_ok(plan, topo, pending)) listed = false;
    if (!listed) {
      res.rule.clear();
      auto found = detail::search_edges(plan, topo, id, I);
      if (!found) continue;
      pending = *found;
    }
    for (auto &[k, e] : pending) {
      if (k == id) continue;
      plan.femto_assignment[k].edge_band = P.get(e);
    }
    res.assignment = {P.macro_bands[1], P.get(pending.at(id)), Scheme::dynamic_reuse};
    plan.femto_assignment[id] = res.assignment;
    return res;
  }
  plan.radius_m = original_radius;
  if (original) plan.femto_assignment[id] = *original;
  throw InfeasibleAllocation("femto " + std::to_string(id) + " still overlaps too many cells after shrinking its radius");
}

// Drops `id` and lets each former overlapping neighbor re-select its own edge.
inline void remove_femto(SpectrumPlan &plan, const CellTopology &topo, int id) {
  if (!plan.femto_assignment.count(id)) throw NotFound("femto " + std::to_string(id) + " not in plan");
  std::vector<int> former = overlapping_assigned(plan, topo, id);
  plan.femto_assignment.erase(id);
  plan.radius_m.erase(id);
  if (plan.scheme != Scheme::dynamic_reuse) return;
  const auto &P = plan.partition;
  for (int k : former) {
    std::vector<int> I = overlapping_assigned(plan, topo, k);
    std::optional<BandId> want;
    if (I.empty()) {
      want = BandId::m3;
    } else if (I.size() == 1) {
      BandId r = detail::one_interferer_rule(detail::edge_id(plan, I[0]));
      if (r != BandId::none) want = r;
    }
    if (!want) continue;
    if (*want == BandId::m3) {
      plan.femto_assignment[k].edge_band = P.macro_bands[2];
      continue;
    }
    if (detail::edge_ok(plan, topo, k, *want, {{k, *want}})) plan.femto_assignment[k].edge_band = P.get(*want);
  }
}

inline SpectrumPlan build_plan(Scheme scheme, const CellTopology &topo, const PartitionParams &pp = {}) {
  if ((scheme == Scheme::dedicated || scheme == Scheme::sub) && !(pp.femto_fraction > 0.0 && pp.femto_fraction <= 1.0))
    throw ConfigError("femto fraction must lie in (0, 1]");
  if (scheme == Scheme::dedicated && pp.femto_fraction >= 1.0) throw ConfigError("dedicated scheme needs a nonempty macro band");
  SpectrumPlan plan = make_empty_plan(scheme, pp);
  const auto &P = plan.partition;
  Rng rng = make_rng(pp.seed, 0x737065);
  for (const auto &f : topo.femtocells) {
    switch (scheme) {
    case Scheme::dedicated:
    case Scheme::sub: plan.femto_assignment[f.id] = {Band{BandId::femto_part, 0.0, pp.femto_fraction * pp.total_hz}, std::nullopt, scheme}; break;
    case Scheme::shared: plan.femto_assignment[f.id] = {P.full(), std::nullopt, scheme}; break;
    case Scheme::static_reuse: {
      int use2 = 0, use3 = 0;
      for (int k : overlapping_assigned(plan, topo, f.id)) (plan.femto_assignment[k].center_band.id == BandId::m2 ? use2 : use3)++;
      bool pick2 = use2 != use3 ? use2 < use3 : (rng() & 1) == 0;
      plan.femto_assignment[f.id] = {pick2 ? P.macro_bands[1] : P.macro_bands[2], std::nullopt, scheme};
      break;
    }
    case Scheme::dynamic_reuse:
      try {
        configure_new_femto(plan, topo, f.id);
      } catch (const InfeasibleAllocation &) {
        plan.radius_m[f.id] = topo.femto_radius_m * std::pow(0.8, 3);
        plan.femto_assignment[f.id] = {P.macro_bands[1], std::nullopt, scheme};
        plan.center_only.push_back(f.id);
      }
      break;
    }
  }
  return plan;
}

// Pairs of overlapping femtos whose edge bands intersect; empty on a consistent plan.
inline std::vector<std::pair<int, int>> edge_conflicts(const SpectrumPlan &plan, const CellTopology &topo) {
  std::vector<std::pair<int, int>> out;
  for (auto &[a, fa] : plan.femto_assignment)
    for (int b : overlapping_assigned(plan, topo, a))
      if (a < b && fa.edge_band && plan.assignment(b).edge_band && bands_overlap(*fa.edge_band, *plan.assignment(b).edge_band)) out.push_back({a, b});
  return out;
}

} // namespace femtonet

#endif
