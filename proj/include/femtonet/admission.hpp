#ifndef FEMTONET_ADMISSION_HPP
#define FEMTONET_ADMISSION_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "femtonet/common.hpp"

namespace femtonet {

enum class TrafficKind { real_time, non_real_time };
enum class CallKind { new_call, handover };

struct TrafficClass {
  int index = 1;
  TrafficKind kind = TrafficKind::real_time;
  double requested_bw = 0.0; // kbps
  double degrade_new = 0.0;
  double degrade_hand = 0.0;
  double arrival_share = 0.0;
  double duration_at_full_bw = 120.0; // s

  bool adaptive() const { return kind == TrafficKind::non_real_time; }
  double floor_new() const { return (1.0 - degrade_new) * requested_bw; }
  double floor_hand() const { return (1.0 - degrade_hand) * requested_bw; }

  void validate() const {
    if (!(requested_bw > 0.0)) throw ConfigError("class " + std::to_string(index) + ": requested bandwidth must be positive");
    if (!(degrade_new >= 0.0 && degrade_new <= degrade_hand && degrade_hand < 1.0))
      throw ConfigError("class " + std::to_string(index) + ": need 0 <= degrade_new <= degrade_hand < 1");
    if (kind == TrafficKind::real_time && (degrade_new != 0.0 || degrade_hand != 0.0))
      throw ConfigError("class " + std::to_string(index) + ": real-time classes cannot degrade");
    if (arrival_share < 0.0) throw ConfigError("class " + std::to_string(index) + ": negative arrival share");
  }
};

inline void validate_classes(const std::vector<TrafficClass> &cls) {
  if (cls.empty()) throw ConfigError("no traffic classes");
  double s = 0.0;
  for (const auto &c : cls) {
    c.validate();
    s += c.arrival_share;
  }
  if (std::abs(s - 1.0) > 1e-9) throw ConfigError("arrival shares must sum to 1");
}

// Seven-class mix used throughout the adaptive-bandwidth study (kbps, seconds).
inline std::vector<TrafficClass> table61_classes() {
  using K = TrafficKind;
  return {
      {1, K::real_time, 25, 0, 0, 0.35, 120},       {2, K::real_time, 128, 0, 0, 0.10, 120},      {3, K::real_time, 56, 0, 0, 0.05, 120},
      {4, K::non_real_time, 128, 0.4, 0.6, 0.15, 120}, {5, K::non_real_time, 13, 0.2, 0.3, 0.10, 120}, {6, K::non_real_time, 56, 0.2, 0.5, 0.15, 120},
      {7, K::non_real_time, 56, 0.5, 0.8, 0.10, 120},
  };
}

struct CellLoadState {
  double capacity = 0.0;
  std::vector<TrafficClass> classes;
  std::vector<int> counts;
  std::vector<double> allocated;

  CellLoadState() = default;
  CellLoadState(double c, std::vector<TrafficClass> cls) : capacity(c), classes(std::move(cls)), counts(classes.size(), 0), allocated(classes.size(), 0.0) {
    for (std::size_t m = 0; m < classes.size(); ++m) allocated[m] = classes[m].requested_bw;
  }

  int n_rt() const {
    int n = 0;
    for (std::size_t m = 0; m < classes.size(); ++m)
      if (!classes[m].adaptive()) n += counts[m];
    return n;
  }
  int n_nrt() const {
    int n = 0;
    for (std::size_t m = 0; m < classes.size(); ++m)
      if (classes[m].adaptive()) n += counts[m];
    return n;
  }
  double occupied() const {
    double s = 0.0;
    for (std::size_t m = 0; m < classes.size(); ++m) s += counts[m] * allocated[m];
    return s;
  }
  double rt_load() const {
    double s = 0.0;
    for (std::size_t m = 0; m < classes.size(); ++m)
      if (!classes[m].adaptive()) s += counts[m] * classes[m].requested_bw;
    return s;
  }
  std::size_t slot(int class_index) const {
    for (std::size_t m = 0; m < classes.size(); ++m)
      if (classes[m].index == class_index) return m;
    throw NotFound("unknown traffic class " + std::to_string(class_index));
  }
};

namespace detail {

// Splits `spare` over classes in proportion to their floors, capping each class at its
// request and handing the excess to the others. weight[m] is the call count (or expected
// count) of class m; classes with zero weight keep their cap.
inline std::vector<double> floor_weighted_split(double spare, const std::vector<double> &weight, const std::vector<double> &floor, const std::vector<double> &cap) {
  std::vector<double> out = cap;
  std::vector<bool> capped(cap.size(), false);
  while (true) {
    double rest = spare, floors = 0.0;
    for (std::size_t m = 0; m < cap.size(); ++m) {
      if (weight[m] <= 0.0) continue;
      if (capped[m])
        rest -= weight[m] * cap[m];
      else
        floors += weight[m] * floor[m];
    }
    if (floors <= 0.0) return out;
    double scale = rest / floors;
    bool changed = false;
    for (std::size_t m = 0; m < cap.size(); ++m) {
      if (weight[m] <= 0.0 || capped[m]) continue;
      if (scale * floor[m] > cap[m]) {
        capped[m] = true;
        changed = true;
      }
    }
    if (!changed) {
      for (std::size_t m = 0; m < cap.size(); ++m)
        if (weight[m] > 0.0 && !capped[m]) out[m] = scale * floor[m];
      return out;
    }
  }
}

} // namespace detail

inline double residual_fraction(const CellLoadState &s) {
  if (s.n_nrt() == 0) throw InvalidArgument("residual fraction undefined without non-real-time calls");
  double denom = 0.0;
  for (std::size_t m = 0; m < s.classes.size(); ++m)
    if (s.classes[m].adaptive()) denom += s.counts[m] * s.classes[m].requested_bw;
  double rt = 0.0;
  for (std::size_t m = 0; m < s.classes.size(); ++m)
    if (!s.classes[m].adaptive()) rt += s.counts[m] * s.allocated[m];
  return (s.capacity - rt) / denom;
}

inline CellLoadState rebalance(CellLoadState s) {
  for (std::size_t m = 0; m < s.classes.size(); ++m)
    if (!s.classes[m].adaptive()) s.allocated[m] = s.classes[m].requested_bw;
  if (s.n_nrt() == 0) {
    if (s.rt_load() > s.capacity * (1 + 1e-12)) throw InfeasibleAllocation("real-time load exceeds capacity");
    return s;
  }
  double X = residual_fraction(s);
  if (X >= 1.0) {
    for (std::size_t m = 0; m < s.classes.size(); ++m)
      if (s.classes[m].adaptive()) s.allocated[m] = s.classes[m].requested_bw;
    return s;
  }
  double floors = 0.0;
  for (std::size_t m = 0; m < s.classes.size(); ++m)
    if (s.classes[m].adaptive()) floors += s.counts[m] * s.classes[m].floor_hand();
  double spare = s.capacity - s.rt_load();
  if (floors > spare * (1 + 1e-12)) throw InfeasibleAllocation("non-real-time floors exceed the remaining capacity");
  std::vector<double> w(s.classes.size(), 0.0), fl(s.classes.size(), 0.0), cap(s.classes.size(), 0.0);
  for (std::size_t m = 0; m < s.classes.size(); ++m) {
    if (s.classes[m].adaptive()) w[m] = s.counts[m];
    fl[m] = s.classes[m].floor_hand();
    cap[m] = s.classes[m].requested_bw;
  }
  s.allocated = detail::floor_weighted_split(spare, w, fl, cap);
  return s;
}

inline double releasable(const CellLoadState &s, CallKind kind) {
  double r = 0.0;
  for (std::size_t m = 0; m < s.classes.size(); ++m) {
    if (!s.classes[m].adaptive()) continue;
    double floor = kind == CallKind::handover ? s.classes[m].floor_hand() : s.classes[m].floor_new();
    r += s.counts[m] * std::max(0.0, s.allocated[m] - floor);
  }
  return r;
}

inline double required_bw(const TrafficClass &c, CallKind kind) {
  if (!c.adaptive()) return c.requested_bw;
  return kind == CallKind::handover ? c.floor_hand() : c.floor_new();
}

enum class Outcome { accept, accept_femto, accept_macro, stay, block, drop };

inline const char *to_string(Outcome o) {
  static const char *names[] = {"accept", "accept-femto", "accept-macro", "stay", "block", "drop"};
  return names[static_cast<int>(o)];
}

struct Degradation {
  int class_index = 0;
  double old_bw = 0.0;
  double new_bw = 0.0;
};

struct AdmissionDecision {
  Outcome outcome = Outcome::block;
  std::vector<Degradation> degradations;
  std::string reason;
  double granted_bw = 0.0;
  bool accepted() const { return outcome == Outcome::accept || outcome == Outcome::accept_femto || outcome == Outcome::accept_macro; }
};

struct AdaptiveResult {
  AdmissionDecision decision;
  CellLoadState state;
};

// Bandwidth-adaptive CAC. The free-capacity test runs before the new-call floor test so
// a lightly loaded cell never turns away new calls.
inline AdaptiveResult admit_adaptive(const CellLoadState &state, int class_index, CallKind kind) {
  std::size_t m = state.slot(class_index);
  const TrafficClass &c = state.classes[m];
  double need = required_bw(c, kind);
  double free = state.capacity - state.occupied();
  AdaptiveResult r{{}, state};
  auto admit = [&](const char *why) {
    CellLoadState next = state;
    next.counts[m] += 1;
    next = rebalance(next);
    for (std::size_t k = 0; k < next.classes.size(); ++k)
      if (state.counts[k] > 0 && next.allocated[k] < state.allocated[k] - 1e-12) r.decision.degradations.push_back({next.classes[k].index, state.allocated[k], next.allocated[k]});
    r.decision.outcome = Outcome::accept;
    r.decision.reason = why;
    r.decision.granted_bw = next.allocated[m];
    r.state = std::move(next);
    return r;
  };
  if (need < free) return admit("free capacity");
  if (kind == CallKind::new_call) {
    for (std::size_t k = 0; k < state.classes.size(); ++k)
      if (state.classes[k].adaptive() && state.counts[k] > 0 && state.allocated[k] <= state.classes[k].floor_new()) {
        r.decision.outcome = Outcome::block;
        r.decision.reason = "non-real-time calls already at the new-call floor";
        return r;
      }
  }
  if (need <= free + releasable(state, kind) + 1e-9) return admit("released from non-real-time calls");
  r.decision.outcome = kind == CallKind::handover ? Outcome::drop : Outcome::block;
  r.decision.reason = "insufficient free plus releasable bandwidth";
  return r;
}

// ---- two-tier CAC (femto first, macro with optional degradation) ----

struct SnirThresholds {
  double t1_db = 10.0;
  double t2_db = 12.0;
  void validate() const {
    if (!(t2_db > t1_db)) throw ConfigError("second SNIR threshold must exceed the first");
  }
};

struct FemtoCellState {
  int max_calls = 4;
  int active = 0;
  bool has_room() const { return active < max_calls; }
};

struct MacroCellState {
  double capacity = 6000.0; // kbps
  double nonadaptive_bw = 64.0;
  double adaptive_max = 56.0;
  double adaptive_min = 28.0;
  int nonadaptive_calls = 0;
  // Current allocation of each adaptive call.
  std::vector<double> adaptive_alloc;

  double occupied() const {
    double s = nonadaptive_calls * nonadaptive_bw;
    for (double a : adaptive_alloc) s += a;
    return s;
  }
  double free() const { return capacity - occupied(); }
  double releasable() const {
    double r = 0.0;
    for (double a : adaptive_alloc) r += std::max(0.0, a - adaptive_min);
    return r;
  }
};

struct UeContext {
  bool adaptive = true;
};

struct TwoTierDecision {
  AdmissionDecision decision;
  FemtoCellState femto;
  MacroCellState macro;
};

namespace detail {

inline double request_of(const MacroCellState &m, const UeContext &ue) { return ue.adaptive ? m.adaptive_max : m.nonadaptive_bw; }
inline double floor_of(const MacroCellState &m, const UeContext &ue) { return ue.adaptive ? m.adaptive_min : m.nonadaptive_bw; }

inline void add_call(MacroCellState &m, const UeContext &ue, double bw) {
  if (ue.adaptive)
    m.adaptive_alloc.push_back(bw);
  else
    ++m.nonadaptive_calls;
}

// Macro admission. Without degradation the full request must fit; with it the request may
// shrink to its floor and existing adaptive calls give up bandwidth in proportion to
// their headroom above the floor.
inline std::optional<MacroCellState> try_macro(const MacroCellState &m, const UeContext &ue, bool allow_degradation, AdmissionDecision &d) {
  double want = request_of(m, ue);
  double free = m.free();
  MacroCellState next = m;
  if (want <= free) {
    add_call(next, ue, want);
    d.granted_bw = want;
    return next;
  }
  if (!allow_degradation) return std::nullopt;
  double floor = floor_of(m, ue);
  if (free >= floor) {
    add_call(next, ue, free);
    d.granted_bw = free;
    return next;
  }
  double need = floor - std::max(0.0, free);
  double head = m.releasable();
  if (need > head + 1e-9) return std::nullopt;
  double frac = need / head;
  for (double &a : next.adaptive_alloc) {
    double cut = (a - m.adaptive_min) * frac;
    if (cut > 0.0) {
      d.degradations.push_back({0, a, a - cut});
      a -= cut;
    }
  }
  add_call(next, ue, floor);
  d.granted_bw = floor;
  return next;
}

} // namespace detail

inline TwoTierDecision admit_new_call(const UeContext &ue, bool femto_available, double snir_tf_db, const SnirThresholds &thr, const FemtoCellState &femto, const MacroCellState &macro) {
  TwoTierDecision r{{}, femto, macro};
  if (femto_available && snir_tf_db >= thr.t2_db && femto.has_room()) {
    r.decision.outcome = Outcome::accept_femto;
    r.decision.reason = "femto coverage with SNIR above the second threshold";
    r.femto.active += 1;
    return r;
  }
  if (auto next = detail::try_macro(macro, ue, false, r.decision)) {
    r.decision.outcome = Outcome::accept_macro;
    r.decision.reason = "macro has the full request free";
    r.macro = *next;
    return r;
  }
  r.decision.outcome = Outcome::block;
  r.decision.reason = "no femto and macro lacks the full request";
  return r;
}

inline TwoTierDecision admit_macro_to_femto(const UeContext &, double snir_m_db, double snir_tf_db, const SnirThresholds &thr, const FemtoCellState &femto, const MacroCellState &macro) {
  TwoTierDecision r{{}, femto, macro};
  bool signal_ok = snir_tf_db >= thr.t2_db || snir_m_db <= snir_tf_db;
  if (signal_ok && femto.has_room()) {
    r.decision.outcome = Outcome::accept_femto;
    r.decision.reason = snir_tf_db >= thr.t2_db ? "target femto above the second threshold" : "target femto at least as good as the macro";
    r.femto.active += 1;
    return r;
  }
  r.decision.outcome = Outcome::stay;
  r.decision.reason = signal_ok ? "target femto full" : "macro link still better";
  return r;
}

// Handover of a femto-served call. Degrading macro calls is reserved for the case where
// the target femto is unusable (no target, SNIR below the first threshold, or full).
inline TwoTierDecision admit_from_femto(const UeContext &ue, std::optional<double> snir_tf_db, const SnirThresholds &thr, const FemtoCellState &femto, const MacroCellState &macro) {
  TwoTierDecision r{{}, femto, macro};
  auto to_femto = [&](const char *why) {
    r.decision.outcome = Outcome::accept_femto;
    r.decision.reason = why;
    r.femto.active += 1;
    return r;
  };
  auto to_macro = [&](bool degrade, const char *why) -> bool {
    AdmissionDecision d;
    auto next = detail::try_macro(macro, ue, degrade, d);
    if (!next) return false;
    r.decision = d;
    r.decision.outcome = Outcome::accept_macro;
    r.decision.reason = why;
    r.macro = *next;
    return true;
  };
  bool usable = snir_tf_db && *snir_tf_db >= thr.t1_db && femto.has_room();
  if (usable && *snir_tf_db >= thr.t2_db) return to_femto("target femto above the second threshold");
  if (usable) {
    if (to_macro(false, "macro preferred between thresholds")) return r;
    return to_femto("macro full, fall back to the target femto");
  }
  if (to_macro(true, "macro with degradation")) return r;
  r.decision.outcome = Outcome::drop;
  r.decision.reason = "macro cannot free the minimum bandwidth";
  return r;
}

} // namespace femtonet

#endif
