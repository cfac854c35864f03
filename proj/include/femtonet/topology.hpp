#ifndef FEMTONET_TOPOLOGY_HPP
#define FEMTONET_TOPOLOGY_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "femtonet/common.hpp"

namespace femtonet {

enum class Access { open, closed };

struct FemtoSite {
  int id = 0;
  Vec2 position;
  Access access = Access::open;
  // Overrides only; pairs not listed use CellTopology::femto_walls.
  std::map<int, int> walls_to;
};

struct MacroGeometry {
  double macro_radius_m = 1000.0;
  double femto_radius_m = 10.0;
  double neighbor_threshold_m = 60.0;
  double min_separation_m = 2.0;
  // When set, femto 0 is pinned on the x axis at this distance from the reference BS.
  bool pin_reference = true;
  double reference_fap_distance_m = 200.0;
  double closed_fraction = 0.0;
  int femto_walls = 1;
  int macro_indoor_walls = 1;
};

inline double distance(const Vec2 &a, const Vec2 &b) { return std::hypot(a.x - b.x, a.y - b.y); }

class CellTopology {
public:
  double macro_radius_m = 1000.0;
  double femto_radius_m = 10.0;
  double neighbor_threshold_m = 60.0;
  int cluster_size = 3;
  int femto_walls = 1;
  int macro_indoor_walls = 1;
  // Index 0 is the reference BS, 1..6 the first-tier ring.
  std::vector<Vec2> macro_sites;
  std::vector<FemtoSite> femtocells;

  CellTopology() = default;

  CellTopology(double r_m, double r_f, double threshold_m) : macro_radius_m(r_m), femto_radius_m(r_f), neighbor_threshold_m(threshold_m) {
    if (!(r_m > r_f && r_f > 0.0)) throw InvalidArgument("macro radius must exceed femto radius > 0");
    macro_sites = first_tier_ring(r_m);
  }

  static std::vector<Vec2> first_tier_ring(double r_m) {
    std::vector<Vec2> sites{{0.0, 0.0}};
    double reach = 2.0 * r_m * std::cos(M_PI / 6.0);
    for (int k = 0; k < 6; ++k) {
      double a = M_PI / 6.0 + k * M_PI / 3.0;
      sites.push_back({reach * std::cos(a), reach * std::sin(a)});
    }
    return sites;
  }

  void add_femto(FemtoSite site) {
    if (index_.count(site.id)) throw InvalidArgument("duplicate femto id " + std::to_string(site.id));
    if (distance(site.position, {0.0, 0.0}) > macro_radius_m) throw InvalidArgument("femto outside the reference macrocell");
    for (auto &[other, w] : site.walls_to)
      if (w < 0) throw InvalidArgument("negative wall count");
    index_[site.id] = femtocells.size();
    femtocells.push_back(std::move(site));
    dirty_ = true;
  }

  bool contains(int id) const { return index_.count(id) != 0; }

  const FemtoSite &site(int id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw NotFound("unknown femto id " + std::to_string(id));
    return femtocells[it->second];
  }

  int walls_between(int a, int b) const {
    if (a == b) return 0;
    const auto &sa = site(a);
    auto it = sa.walls_to.find(b);
    if (it != sa.walls_to.end()) return it->second;
    const auto &sb = site(b);
    auto jt = sb.walls_to.find(a);
    if (jt != sb.walls_to.end()) return jt->second;
    return femto_walls;
  }

  // Sorted ids within `radius` of femto `id`, excluding itself. Uses a uniform grid.
  std::vector<int> within(int id, double radius) const {
    const auto &s = site(id);
    return within_point(s.position, radius, id);
  }

  std::vector<int> within_point(const Vec2 &p, double radius, int exclude = INT32_MIN) const {
    std::vector<int> out;
    if (radius <= 0.0 || femtocells.empty()) return out;
    if (radius > grid_cell_) {
      for (const auto &f : femtocells)
        if (f.id != exclude && distance(f.position, p) <= radius) out.push_back(f.id);
    } else {
      ensure_grid();
      long cx = cell_coord(p.x), cy = cell_coord(p.y);
      for (long dx = -1; dx <= 1; ++dx)
        for (long dy = -1; dy <= 1; ++dy) {
          auto it = grid_.find(key(cx + dx, cy + dy));
          if (it == grid_.end()) continue;
          for (std::size_t idx : it->second) {
            const auto &f = femtocells[idx];
            if (f.id != exclude && distance(f.position, p) <= radius) out.push_back(f.id);
          }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

private:
  std::unordered_map<int, std::size_t> index_;
  mutable std::unordered_map<std::int64_t, std::vector<std::size_t>> grid_;
  mutable bool dirty_ = true;
  double grid_cell_ = 64.0;

  long cell_coord(double v) const { return static_cast<long>(std::floor(v / grid_cell_)); }
  static std::int64_t key(long cx, long cy) { return (static_cast<std::int64_t>(cx) << 32) ^ (static_cast<std::int64_t>(cy) & 0xffffffff); }

  void ensure_grid() const {
    if (!dirty_) return;
    grid_.clear();
    for (std::size_t i = 0; i < femtocells.size(); ++i)
      grid_[key(cell_coord(femtocells[i].position.x), cell_coord(femtocells[i].position.y))].push_back(i);
    dirty_ = false;
  }

public:
  // Grid cells must be at least as wide as the largest radius queried through the grid.
  void set_grid_cell(double w) {
    grid_cell_ = w;
    dirty_ = true;
  }
};

inline std::vector<int> neighbors_of(const CellTopology &topo, int id) { return topo.within(id, topo.neighbor_threshold_m); }

inline double distance(const CellTopology &, const Vec2 &a, const Vec2 &b) { return distance(a, b); }

// Upper bound on how many points with pairwise separation >= s fit in a disc of
// radius r (hexagonal packing density applied to the disc grown by s/2).
inline double packing_bound(double r, double s) {
  if (s <= 0.0) return INFINITY;
  double g = r + s / 2.0;
  return 0.9069 * (g * g) / ((s / 2.0) * (s / 2.0));
}

inline CellTopology place_femtocells(std::uint64_t seed, int count, const MacroGeometry &g = {}) {
  if (count < 0) throw InvalidArgument("femto count must be >= 0");
  CellTopology topo(g.macro_radius_m, g.femto_radius_m, g.neighbor_threshold_m);
  topo.femto_walls = g.femto_walls;
  topo.macro_indoor_walls = g.macro_indoor_walls;
  topo.set_grid_cell(std::max({g.neighbor_threshold_m, 2.0 * g.femto_radius_m, g.min_separation_m, 1.0}));
  if (count == 0) return topo;
  if (static_cast<double>(count) > packing_bound(g.macro_radius_m, g.min_separation_m))
    throw PlacementInfeasible("cannot place " + std::to_string(count) + " femtocells at separation " + std::to_string(g.min_separation_m) + " m");

  Rng rng = make_rng(seed, 0x70706f);
  const long max_attempts = 1000L * count + 10000L;
  long attempts = 0;
  int id = 0;
  auto accept = [&](Vec2 p) {
    FemtoSite s;
    s.id = id++;
    s.position = p;
    s.access = uniform01(rng) < g.closed_fraction ? Access::closed : Access::open;
    topo.add_femto(std::move(s));
  };
  if (g.pin_reference) {
    if (g.reference_fap_distance_m < 0.0 || g.reference_fap_distance_m > g.macro_radius_m) throw InvalidArgument("reference FAP outside macrocell");
    accept({g.reference_fap_distance_m, 0.0});
  }
  while (id < count) {
    if (++attempts > max_attempts) throw PlacementInfeasible("placement gave up after " + std::to_string(max_attempts) + " attempts");
    double r = g.macro_radius_m * std::sqrt(uniform01(rng));
    double a = 2.0 * M_PI * uniform01(rng);
    Vec2 p{r * std::cos(a), r * std::sin(a)};
    if (g.min_separation_m > 0.0 && !topo.within_point(p, g.min_separation_m).empty()) continue;
    accept(p);
  }
  return topo;
}

} // namespace femtonet

#endif
