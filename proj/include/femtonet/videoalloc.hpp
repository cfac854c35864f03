#ifndef FEMTONET_VIDEOALLOC_HPP
#define FEMTONET_VIDEOALLOC_HPP

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "femtonet/common.hpp"
#include "femtonet/queueing.hpp"

namespace femtonet {

struct MbsSession {
  int id = 0;
  int rank = 1; // 1 = most popular
  double base_bw = 500.0;  // kbps
  double layer_bw = 50.0;  // kbps per enhancement layer
  int max_layers = 10;
  int min_layers = 0;
  int current_layers = 10;
  long popularity = 0;

  double bw(int layers) const { return base_bw + layers * layer_bw; }
  double min_bw() const { return bw(min_layers); }
  double max_bw() const { return bw(max_layers); }
  double allocated() const { return bw(current_layers); }
  void validate() const {
    if (!(base_bw >= 0.0 && layer_bw > 0.0)) throw InvalidArgument("session " + std::to_string(id) + ": bad bandwidths");
    if (!(0 <= min_layers && min_layers <= max_layers)) throw InvalidArgument("session " + std::to_string(id) + ": need 0 <= min_layers <= max_layers");
  }
};

inline std::vector<MbsSession> table71_sessions() {
  std::vector<MbsSession> s;
  for (int m = 1; m <= 12; ++m) s.push_back({m, m, 500.0, 50.0, 10, 0, 10, 0});
  return s;
}

// Sessions in rank order; equal ranks fall back to id.
inline std::vector<MbsSession> by_rank(std::vector<MbsSession> s) {
  std::stable_sort(s.begin(), s.end(), [](const MbsSession &a, const MbsSession &b) { return a.rank != b.rank ? a.rank < b.rank : a.id < b.id; });
  return s;
}

inline double c_min_b(const std::vector<MbsSession> &s) {
  double t = 0.0;
  for (const auto &x : s) t += x.min_bw();
  return t;
}

inline double c_max_b(const std::vector<MbsSession> &s) {
  double t = 0.0;
  for (const auto &x : s) t += x.max_bw();
  return t;
}

enum class Regime { lower_traffic, congested };

struct MbsBudget {
  Regime regime = Regime::lower_traffic;
  double c_b = 0.0;
};

inline MbsBudget allocate_mbs_budget(double C, double C_nB, const std::vector<MbsSession> &sessions) {
  if (sessions.empty()) throw InvalidArgument("no multicast sessions");
  if (C < C_nB) throw InvalidArgument("non-multicast load exceeds capacity");
  for (const auto &s : sessions) s.validate();
  double room = C - C_nB;
  double hi = c_max_b(sessions), lo = c_min_b(sessions);
  if (room >= hi) return {Regime::lower_traffic, hi};
  if (room < lo - 1e-9) throw InfeasibleAllocation("multicast floor of " + std::to_string(lo) + " exceeds the remaining " + std::to_string(room));
  return {Regime::congested, room};
}

struct TechniqueResult {
  // Layers per session in rank order, and the ids in that order.
  std::vector<int> ids;
  std::vector<int> layers;
  double c_b = 0.0;  // budget granted to the sessions
  double used = 0.0; // bandwidth the layer counts occupy
  int P = 0;         // two-level: layers removed from the top sessions
  int M_I = 0;       // two-level: sessions that keep N_max - P layers
  int M_2 = 0;       // multi-level: sessions at full quality
};

namespace detail {

inline void check_budget(double budget, const std::vector<MbsSession> &s) {
  if (s.empty()) throw InvalidArgument("no multicast sessions");
  for (const auto &x : s) x.validate();
  if (budget < c_min_b(s) - 1e-9) throw InfeasibleAllocation("budget below the multicast floor");
}

inline int level(const MbsSession &s, int removed) { return std::max(s.min_layers, s.max_layers - removed); }

} // namespace detail

// Equal degradation: every session loses P or P+1 layers, the more popular ones P.
inline TechniqueResult technique_two_level(double budget, const std::vector<MbsSession> &sessions) {
  detail::check_budget(budget, sessions);
  auto s = by_rank(sessions);
  const double eps = 1e-9;
  auto total = [&](int removed) {
    double t = 0.0;
    for (const auto &x : s) t += x.bw(detail::level(x, removed));
    return t;
  };
  TechniqueResult r;
  r.c_b = budget;
  for (const auto &x : s) r.ids.push_back(x.id);
  int span = 0;
  for (const auto &x : s) span = std::max(span, x.max_layers - x.min_layers);
  if (total(0) <= budget + eps) {
    for (const auto &x : s) r.layers.push_back(x.max_layers);
    r.P = 0;
    r.M_I = static_cast<int>(s.size());
  } else {
    int P = 0;
    while (P < span && total(P + 1) > budget + eps) ++P;
    double used = total(P + 1);
    int mi = 0;
    for (const auto &x : s) {
      double step = x.bw(detail::level(x, P)) - x.bw(detail::level(x, P + 1));
      if (used + step > budget + eps) break;
      used += step;
      ++mi;
    }
    // "Every session loses P+1" is the same allocation as "all M keep N_max - (P+1)".
    if (mi == 0) {
      ++P;
      mi = static_cast<int>(s.size());
    }
    for (std::size_t k = 0; k < s.size(); ++k) r.layers.push_back(detail::level(s[k], static_cast<int>(k) < mi ? P : P + 1));
    r.P = P;
    r.M_I = mi;
  }
  for (std::size_t k = 0; k < s.size(); ++k) r.used += s[k].bw(r.layers[k]);
  return r;
}

// Priority degradation: the least popular sessions drop to their minimum first. The
// first session that cannot be served in full keeps whatever whole layers still fit.
inline TechniqueResult technique_multi_level(double budget, const std::vector<MbsSession> &sessions) {
  detail::check_budget(budget, sessions);
  auto s = by_rank(sessions);
  const double eps = 1e-9;
  TechniqueResult r;
  r.c_b = budget;
  double used = c_min_b(s);
  for (const auto &x : s) {
    r.ids.push_back(x.id);
    r.layers.push_back(x.min_layers);
  }
  std::size_t k = 0;
  for (; k < s.size(); ++k) {
    double extra = s[k].max_bw() - s[k].min_bw();
    if (used + extra > budget + eps) break;
    used += extra;
    r.layers[k] = s[k].max_layers;
  }
  r.M_2 = static_cast<int>(k);
  if (k < s.size()) {
    int fit = static_cast<int>(std::floor((budget - used + eps) / s[k].layer_bw));
    fit = std::clamp(fit, 0, s[k].max_layers - s[k].min_layers);
    r.layers[k] += fit;
    used += fit * s[k].layer_bw;
  }
  r.used = used;
  return r;
}

// ---- popularity-driven allocation ----

struct LayerGrid {
  double base_bw = 0.0;
  double layer_bw = 0.0;
};

struct PopularityAllocation {
  double C = 0.0;
  double beta_max = 0.0;
  double beta_min = 0.0;
  std::vector<long> viewers;
  std::vector<double> beta;
  std::vector<double> carry; // X_m
  std::vector<int> layers;   // empty without a layer grid
  double a = 0.0;
  double beta_diff = 0.0;
  bool congested = false;

  double total() const { return std::accumulate(beta.begin(), beta.end(), 0.0); }
};

inline PopularityAllocation allocate_popularity(double C, double beta_max, double beta_min, const std::vector<long> &viewers, std::optional<LayerGrid> grid = std::nullopt) {
  const std::size_t M = viewers.size();
  if (M == 0) throw InvalidArgument("no sessions");
  if (!(beta_max >= beta_min && beta_min > 0.0)) throw InvalidArgument("need beta_max >= beta_min > 0");
  for (std::size_t m = 0; m < M; ++m) {
    if (viewers[m] < 0) throw InvalidArgument("negative viewer count");
    if (m > 0 && viewers[m] > viewers[m - 1]) throw InvalidArgument("viewer counts must be sorted non-increasing");
  }
  if (C < M * beta_min - 1e-9) throw InfeasibleAllocation("capacity below the minimum for every session");
  PopularityAllocation out;
  out.C = C;
  out.beta_max = beta_max;
  out.beta_min = beta_min;
  out.viewers = viewers;
  out.beta_diff = beta_max - beta_min;
  out.carry.assign(M, 0.0);
  if (M * beta_max <= C) {
    out.beta.assign(M, beta_max);
  } else {
    out.congested = true;
    long K = std::accumulate(viewers.begin(), viewers.end(), 0L);
    if (K == 0) throw InvalidArgument("no viewers to rank sessions by");
    out.a = (static_cast<double>(M) / K) * (C / M - beta_min);
    double carried = 0.0;
    for (std::size_t m = 0; m < M; ++m) {
      double share = out.a * viewers[m] + carried;
      if (share >= out.beta_diff) {
        out.beta.push_back(beta_max);
        std::size_t rest = M - (m + 1);
        out.carry[m] = rest > 0 ? (share - out.beta_diff) / rest : 0.0;
      } else {
        out.beta.push_back(beta_min + share);
      }
      carried += out.carry[m];
    }
  }
  if (grid) {
    if (!(grid->layer_bw > 0.0)) throw InvalidArgument("layer bandwidth must be positive");
    for (double b : out.beta) out.layers.push_back(std::max(0, static_cast<int>(std::floor((b - grid->base_bw) / grid->layer_bw + 1e-9))));
  }
  return out;
}

// Equal-share baseline.
inline double equal_share(double C, double beta_max, std::size_t M) { return M * beta_max <= C ? beta_max : C / M; }

struct Satisfaction {
  std::vector<double> per_rank;
  double average = 1.0;
  double baseline = 1.0;
};

inline Satisfaction satisfaction(const PopularityAllocation &al) {
  Satisfaction s;
  const std::size_t M = al.beta.size();
  if (!al.congested) {
    s.per_rank.assign(M, 1.0);
    return s;
  }
  long K = std::accumulate(al.viewers.begin(), al.viewers.end(), 0L);
  double acc = 0.0;
  for (std::size_t m = 0; m < M; ++m) {
    s.per_rank.push_back(al.beta[m] / al.beta_max);
    acc += s.per_rank[m] * al.viewers[m];
  }
  s.average = acc / K;
  s.baseline = al.C / (al.beta_max * M);
  return s;
}

struct QualityCounts {
  long hq = 0;
  long lq = 0;
};

inline QualityCounts counts_hq_lq(double C, double beta_max, double beta_min) {
  if (!(beta_max >= beta_min && beta_min > 0.0) || C < 0.0) throw InvalidArgument("need beta_max >= beta_min > 0 and C >= 0");
  using detail::to_rational;
  return {detail::floor_quotient(to_rational(C), to_rational(beta_max), C, beta_max), detail::floor_quotient(to_rational(C), to_rational(beta_min), C, beta_min)};
}

// ---- multicast cell dimensioning ----

struct MulticastTraffic {
  double capacity_kbps = 20000.0;
  double voice_bw = 64.0;
  double unicast_base = 300.0;
  double unicast_layer = 20.0;
  int unicast_max_layers = 10;
  int unicast_min_layers = 0;
  double back_max = 120.0;
  double back_hand_degrade = 0.5; // xi
  double back_new_degrade = 0.3;  // xi'
  double mean_call_s = 120.0;
  double dwell_s = 540.0;
  double share_voice = 0.5;
  double share_unicast = 0.1;
  double share_back = 0.4;
  std::vector<MbsSession> sessions = table71_sessions();

  double unicast_max() const { return unicast_base + unicast_max_layers * unicast_layer; }
  double unicast_min() const { return unicast_base + unicast_min_layers * unicast_layer; }
  double back_hand() const { return (1.0 - back_hand_degrade) * back_max; }
  double back_new() const { return (1.0 - back_new_degrade) * back_max; }
  double mean_full() const { return share_voice * voice_bw + share_unicast * unicast_max() + share_back * back_max; }
  double mean_hand_floor() const { return share_voice * voice_bw + share_unicast * unicast_min() + share_back * back_hand(); }
  // Unicast calls are only degraded for handovers.
  double mean_new_floor() const { return share_voice * voice_bw + share_unicast * unicast_max() + share_back * back_new(); }

  void validate() const {
    if (!(capacity_kbps > 0.0)) throw ConfigError("capacity must be positive");
    if (std::abs(share_voice + share_unicast + share_back - 1.0) > 1e-9) throw ConfigError("traffic shares must sum to 1");
    if (!(0.0 <= back_new_degrade && back_new_degrade <= back_hand_degrade && back_hand_degrade < 1.0)) throw ConfigError("need 0 <= xi' <= xi < 1");
    if (unicast_min_layers < 0 || unicast_min_layers > unicast_max_layers) throw ConfigError("bad unicast layer bounds");
    if (sessions.empty()) throw ConfigError("no multicast sessions");
    for (const auto &s : sessions) s.validate();
  }
};

enum class MbsBudgetPolicy { dynamic, fixed_max, fixed_min };
enum class NonMbsPolicy { prioritized, non_prioritized, non_degradable };

struct MulticastScheme {
  int number = 1;
  MbsBudgetPolicy budget = MbsBudgetPolicy::dynamic;
  NonMbsPolicy policy = NonMbsPolicy::prioritized;
  std::string name() const { return "scheme-" + std::to_string(number); }
};

// The proposed scheme and the six fixed-budget comparisons.
inline std::vector<MulticastScheme> multicast_schemes() {
  using B = MbsBudgetPolicy;
  using P = NonMbsPolicy;
  return {{1, B::dynamic, P::prioritized},     {2, B::fixed_max, P::prioritized}, {3, B::fixed_max, P::non_prioritized}, {4, B::fixed_max, P::non_degradable},
          {5, B::fixed_min, P::prioritized}, {6, B::fixed_min, P::non_prioritized}, {7, B::fixed_min, P::non_degradable}};
}

// State counts include the M always-on sessions. N: calls at full rate beside the
// multicast budget of the lightly loaded cell; N+S and N+L: handover and new-call floors
// beside the budget of the congested cell.
inline MulticastQueueParams multicast_dimensions(const MulticastTraffic &t, const MulticastScheme &sc) {
  t.validate();
  double hi = c_max_b(t.sessions), lo = c_min_b(t.sessions);
  if (t.capacity_kbps < hi && sc.budget != MbsBudgetPolicy::fixed_min) throw ConfigError("capacity below the full multicast demand");
  double b_n = sc.budget == MbsBudgetPolicy::fixed_min ? lo : hi;
  double b_x = sc.budget == MbsBudgetPolicy::fixed_max ? hi : lo;
  int M = static_cast<int>(t.sessions.size());
  auto calls = [&](double room, double per_call) { return static_cast<int>(std::floor(room / per_call + 1e-12)); };
  MulticastQueueParams q;
  q.M = M;
  q.N = M + calls(t.capacity_kbps - b_n, t.mean_full());
  int k_full = M + calls(t.capacity_kbps - b_x, t.mean_full());
  int k_hand = M + calls(t.capacity_kbps - b_x, t.mean_hand_floor());
  int k_new = M + calls(t.capacity_kbps - b_x, t.mean_new_floor());
  switch (sc.policy) {
  case NonMbsPolicy::prioritized:
    q.S = std::max(0, k_hand - q.N);
    q.L = std::clamp(k_new - q.N, 0, q.S);
    q.L_back = 0;
    break;
  case NonMbsPolicy::non_prioritized:
    q.S = std::max(0, k_hand - q.N);
    q.L = q.L_back = q.S;
    break;
  case NonMbsPolicy::non_degradable:
    q.S = std::max(0, k_full - q.N);
    q.L = q.L_back = q.S;
    break;
  }
  q.mu = 1.0 / t.mean_call_s;
  return q;
}

// What each traffic type holds when the cell carries i - M non-multicast calls in the
// expected mix. Multicast gives way first, then background, then unicast layers.
struct MulticastStateAllocation {
  double c_b = 0.0;
  double c_nb = 0.0;
  std::vector<int> mbs_layers; // rank order, two-level technique
  double unicast_layers = 0.0;
};

inline MulticastStateAllocation multicast_state_allocation(const MulticastTraffic &t, const MulticastScheme &sc, int state) {
  int M = static_cast<int>(t.sessions.size());
  double c = std::max(0, state - M);
  double hi = c_max_b(t.sessions), lo = c_min_b(t.sessions);
  double demand = c * t.mean_full();
  MulticastStateAllocation a;
  if (sc.budget == MbsBudgetPolicy::fixed_max)
    a.c_b = hi;
  else if (sc.budget == MbsBudgetPolicy::fixed_min)
    a.c_b = lo;
  else
    a.c_b = std::clamp(t.capacity_kbps - demand, lo, hi);
  a.mbs_layers = technique_two_level(a.c_b, t.sessions).layers;
  double room = t.capacity_kbps - a.c_b;
  double need = std::max(0.0, demand - room);
  double back_release = c * t.share_back * (t.back_max - t.back_hand());
  need = std::max(0.0, need - back_release);
  double uni_calls = c * t.share_unicast;
  double max_drop = t.unicast_max_layers - t.unicast_min_layers;
  double drop = uni_calls > 0.0 ? std::min(max_drop, std::ceil(need / uni_calls / t.unicast_layer - 1e-9)) : 0.0;
  a.unicast_layers = t.unicast_max_layers - std::max(0.0, drop);
  a.c_nb = std::min(demand, room);
  return a;
}

} // namespace femtonet

#endif
