#ifndef FEMTONET_QUEUEING_HPP
#define FEMTONET_QUEUEING_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "femtonet/admission.hpp"
#include "femtonet/common.hpp"

namespace femtonet {

// ---- generic single-cell chains ----

// An arrival stream is admitted while the cell holds fewer than `limit` calls.
struct ArrivalStream {
  double rate = 0.0;
  bool handover = false;
  int limit = 0;
};

// Birth-death chain over states lo..hi. `departure[i - lo]` is the total release rate
// out of state i (zero at lo).
struct ChainModel {
  int lo = 0;
  int hi = 0;
  std::vector<double> departure;
  std::vector<ArrivalStream> streams;

  int size() const { return hi - lo + 1; }
  double birth(int i) const {
    double b = 0.0;
    for (const auto &s : streams)
      if (i < s.limit) b += s.rate;
    return b;
  }
  void validate() const {
    if (hi < lo) throw InvalidArgument("chain has no states");
    if (static_cast<int>(departure.size()) != size()) throw InvalidArgument("departure table does not match the state range");
    for (int i = lo + 1; i <= hi; ++i)
      if (!(departure[i - lo] > 0.0)) throw InvalidArgument("release rate must be positive above the lowest state");
    for (const auto &s : streams)
      if (s.rate < 0.0) throw InvalidArgument("negative arrival rate");
  }
};

struct ChainSolution {
  int lo = 0;
  std::vector<double> p;
  double p_block = 0.0;
  double p_drop = 0.0;
  // Only filled by the multicast chain (new background calls).
  double p_block_back = 0.0;
  double utilization = 0.0;
  double handover_rate = 0.0;
  double forced_termination = 0.0;
  double mean_calls = 0.0;
  int iterations = 0;
  double residual = 0.0;

  double prob(int i) const {
    int k = i - lo;
    return k < 0 || k >= static_cast<int>(p.size()) ? 0.0 : p[k];
  }
  double tail(int from) const {
    double s = 0.0;
    for (int i = std::max(from, lo); i < lo + static_cast<int>(p.size()); ++i) s += p[i - lo];
    return s;
  }
};

// Stationary distribution by the product form, accumulated in log space so large
// chains neither overflow nor underflow.
inline std::vector<double> stationary(const ChainModel &m) {
  m.validate();
  std::vector<double> lw(m.size(), 0.0);
  for (int i = m.lo + 1; i <= m.hi; ++i) {
    double b = m.birth(i - 1);
    lw[i - m.lo] = b > 0.0 ? lw[i - 1 - m.lo] + std::log(b) - std::log(m.departure[i - m.lo]) : -std::numeric_limits<double>::infinity();
  }
  double top = *std::max_element(lw.begin(), lw.end());
  std::vector<double> p(lw.size());
  double z = 0.0;
  for (std::size_t k = 0; k < lw.size(); ++k) z += p[k] = std::exp(lw[k] - top);
  for (double &x : p) x /= z;
  return p;
}

inline double stream_loss(const ChainModel &m, const std::vector<double> &p, const ArrivalStream &s) {
  double t = 0.0;
  for (int i = std::max(s.limit, m.lo); i <= m.hi; ++i) t += p[i - m.lo];
  return t;
}

inline ChainSolution solve_chain(const ChainModel &m) {
  ChainSolution s;
  s.lo = m.lo;
  s.p = stationary(m);
  for (const auto &st : m.streams) {
    double loss = stream_loss(m, s.p, st);
    if (st.handover)
      s.p_drop = std::max(s.p_drop, loss);
    else
      s.p_block = std::max(s.p_block, loss);
  }
  for (int i = m.lo; i <= m.hi; ++i) s.mean_calls += i * s.p[i - m.lo];
  return s;
}

// Erlang-B by the standard stable recursion.
inline double erlang_b(int servers, double erlangs) {
  if (servers < 0 || erlangs < 0.0) throw InvalidArgument("Erlang-B needs servers >= 0 and load >= 0");
  double b = 1.0;
  for (int k = 1; k <= servers; ++k) b = erlangs * b / (k + erlangs * b);
  return b;
}

struct FixedPointOptions {
  double damping = 0.5;
  double tolerance = 1e-8;
  int max_iterations = 10000;
};

namespace detail {

inline std::string history_tail(const std::vector<double> &h) {
  std::ostringstream os;
  os << "residual history (last " << std::min<std::size_t>(h.size(), 5) << "):";
  for (std::size_t k = h.size() > 5 ? h.size() - 5 : 0; k < h.size(); ++k) os << ' ' << h[k];
  return os.str();
}

} // namespace detail

// ---- two-tier femto/macro model ----

struct TwoTierParams {
  double lam_o_f = 0.0; // new calls, all femtocells together (1/s)
  double lam_o_m = 0.0; // new calls, macro-only area (1/s)
  double mean_call_s = 120.0;
  double dwell_f_s = 360.0;
  double dwell_m_s = 240.0;
  int n = 0;
  double r_f = 10.0;
  double r_m = 1000.0;
  int K = 4;
  int N = 100;
  int S = 30;
  // Femto-to-femto SNIR branches: alpha above the second threshold, beta between the two.
  double alpha = 1.0;
  double beta = 0.0;

  double mu() const { return 1.0 / mean_call_s; }
  double eta_f() const { return 1.0 / dwell_f_s; }
  double eta_m() const { return 1.0 / dwell_m_s; }
  double coverage() const { return n * (r_f / r_m) * (r_f / r_m); }

  void validate() const {
    if (lam_o_f < 0.0 || lam_o_m < 0.0) throw InvalidArgument("arrival rates must be >= 0");
    if (!(mean_call_s > 0.0 && dwell_f_s > 0.0 && dwell_m_s > 0.0)) throw InvalidArgument("durations must be positive");
    if (n < 0 || K < 1 || N < 1 || S < 0) throw InvalidArgument("need n >= 0, K >= 1, N >= 1, S >= 0");
    if (!(r_f > 0.0 && r_m > r_f)) throw InvalidArgument("need 0 < r_f < r_m");
    if (alpha < 0.0 || beta < 0.0 || alpha + beta > 1.0 + 1e-12) throw InvalidArgument("need alpha, beta >= 0 and alpha + beta <= 1");
    if (coverage() > 1.0) throw InvalidArgument("femtocell coverage fraction exceeds one");
    if (n == 0 && lam_o_f > 0.0) throw InvalidArgument("femto arrivals without femtocells");
  }
};

// Probabilities that a call leaving its cell heads macro->macro, femto->macro,
// femto->femto and macro->femto.
struct HandoverProbabilities {
  double mm = 0.0;
  double fm = 0.0;
  double ff = 0.0;
  double mf = 0.0;
};

inline HandoverProbabilities handover_probabilities(const TwoTierParams &p) {
  p.validate();
  double mu = p.mu(), ef = p.eta_f(), em = p.eta_m();
  double cov = p.coverage();
  double a = (p.r_f / p.r_m) * (p.r_f / p.r_m);
  HandoverProbabilities h;
  h.mm = em / (em + mu);
  h.fm = (1.0 - cov) * ef / (ef + mu);
  h.ff = p.n >= 1 ? (p.n - 1) * a * ef / (ef + mu) : 0.0;
  double rn = std::sqrt(static_cast<double>(p.n));
  h.mf = p.n >= 1 ? cov * em * rn / (em * rn + mu) : 0.0;
  return h;
}

struct HandoverRates {
  double mm = 0.0;
  double mf = 0.0;
  double ff = 0.0;
  double fm = 0.0;
};

struct TwoTierSolution {
  ChainSolution femto;
  ChainSolution macro;
  HandoverRates rates;
  HandoverProbabilities probabilities;
  double mu_m = 0.0;
  double mu_f = 0.0;
  double lambda_total_f = 0.0;
  double lambda_h_m = 0.0;
  int iterations = 0;
  double residual = 0.0;
  std::vector<double> residual_history;
};

inline ChainModel femto_chain(const TwoTierParams &p, double lambda_total_f) {
  ChainModel m;
  m.lo = 0;
  m.hi = p.K;
  double mu_f = p.eta_f() + p.mu();
  for (int i = 0; i <= p.K; ++i) m.departure.push_back(i * mu_f);
  double per_cell = p.n > 0 ? lambda_total_f / p.n : 0.0;
  // A femtocell has no guard states, so new and handover calls share one limit.
  m.streams = {{per_cell, false, p.K}, {0.0, true, p.K}};
  return m;
}

inline ChainModel macro_chain(const TwoTierParams &p, double lambda_h_m) {
  ChainModel m;
  m.lo = 0;
  m.hi = p.N + p.S;
  double mu_m = p.eta_m() * (std::sqrt(static_cast<double>(p.n)) + 1.0) + p.mu();
  for (int i = 0; i <= m.hi; ++i) m.departure.push_back(i * mu_m);
  m.streams = {{p.lam_o_m, false, p.N}, {lambda_h_m, true, p.N + p.S}};
  return m;
}

namespace detail {

struct TwoTierState {
  ChainSolution femto, macro;
  double lt_f = 0.0, lh_m = 0.0;
};

inline TwoTierState evaluate_layers(const TwoTierParams &p, const HandoverRates &r, double pdm_prev, double pdf_prev) {
  TwoTierState st;
  st.lt_f = p.lam_o_f + r.mf + p.alpha * r.ff + pdm_prev * p.beta * r.ff;
  st.lh_m = r.mm + r.fm + p.alpha * pdf_prev * r.ff + (1.0 - p.alpha) * r.ff;
  st.femto = solve_chain(femto_chain(p, st.lt_f));
  // One shared limit, so new and handover losses coincide.
  st.femto.p_drop = st.femto.p_block = st.femto.tail(p.K);
  st.macro = solve_chain(macro_chain(p, st.lh_m));
  return st;
}

} // namespace detail

inline TwoTierSolution solve_two_tier(const TwoTierParams &p, const FixedPointOptions &opt = {}) {
  p.validate();
  HandoverProbabilities h = handover_probabilities(p);
  TwoTierSolution sol;
  sol.probabilities = h;
  sol.mu_m = p.eta_m() * (std::sqrt(static_cast<double>(p.n)) + 1.0) + p.mu();
  sol.mu_f = p.eta_f() + p.mu();
  HandoverRates r;
  double pbf = 0.0, pdf = 0.0, pbm = 0.0, pdm = 0.0;
  for (int it = 1; it <= opt.max_iterations; ++it) {
    detail::TwoTierState st = detail::evaluate_layers(p, r, pdm, pdf);
    pbf = pdf = st.femto.p_block;
    pbm = st.macro.p_block;
    pdm = st.macro.p_drop;
    double macro_in = (1.0 - pbm) * (p.lam_o_m + p.lam_o_f * pbf) + (1.0 - pdm) * (r.fm + r.ff * (1.0 - p.alpha + p.alpha * pdf));
    double macro_den = 1.0 - h.mm * (1.0 - pdm);
    double femto_in = p.lam_o_f * (1.0 - pbf) + r.mf * (1.0 - pdf);
    double femto_den = 1.0 - h.ff * (1.0 - pdf) * (p.alpha + (1.0 - p.alpha) * pdm);
    HandoverRates next{h.mm * macro_in / macro_den, h.mf * macro_in / macro_den, h.ff * femto_in / femto_den, h.fm * femto_in / femto_den};
    double res = std::max({std::abs(next.mm - r.mm), std::abs(next.mf - r.mf), std::abs(next.ff - r.ff), std::abs(next.fm - r.fm)});
    sol.residual_history.push_back(res);
    if (res < opt.tolerance) {
      r = next;
      st = detail::evaluate_layers(p, r, pdm, pdf);
      sol.femto = st.femto;
      sol.macro = st.macro;
      sol.rates = r;
      sol.lambda_total_f = st.lt_f;
      sol.lambda_h_m = st.lh_m;
      sol.iterations = it;
      sol.residual = res;
      // Share of calls handled by the macro layer that end in a dropped handover.
      double handled = p.lam_o_m * (1.0 - sol.macro.p_block) + sol.lambda_h_m;
      sol.macro.forced_termination = handled > 0.0 ? sol.lambda_h_m * sol.macro.p_drop / handled : 0.0;
      sol.macro.handover_rate = sol.lambda_h_m;
      sol.femto.handover_rate = r.mf + r.ff;
      return sol;
    }
    double d = opt.damping;
    r.mm += d * (next.mm - r.mm);
    r.mf += d * (next.mf - r.mf);
    r.ff += d * (next.ff - r.ff);
    r.fm += d * (next.fm - r.fm);
  }
  throw NonConvergence("two-tier fixed point did not converge in " + std::to_string(opt.max_iterations) + " iterations; " + detail::history_tail(sol.residual_history));
}

// Macro dimensioning from a bandwidth budget: N calls at full rate, N+S at the adaptive floor.
struct MacroDimensions {
  int N = 0;
  int S = 0;
};

inline MacroDimensions macro_dimensions(double capacity_kbps, double nonadaptive_bw, double adaptive_max, double adaptive_min, double adaptive_share) {
  if (!(capacity_kbps > 0.0) || adaptive_share < 0.0 || adaptive_share > 1.0) throw InvalidArgument("invalid macro dimensioning input");
  double full = (1 - adaptive_share) * nonadaptive_bw + adaptive_share * adaptive_max;
  double floor_bw = (1 - adaptive_share) * nonadaptive_bw + adaptive_share * adaptive_min;
  int n = static_cast<int>(std::floor(capacity_kbps / full + 1e-12));
  int k = static_cast<int>(std::floor(capacity_kbps / floor_bw + 1e-12));
  return {n, std::max(0, k - n)};
}

// ---- single-cell adaptive-bandwidth model ----

enum class AdaptiveScheme { proposed, non_prioritized, aqos, hard_qos, guard };

inline const char *to_string(AdaptiveScheme s) {
  static const char *names[] = {"proposed", "non-prioritized", "aqos", "hard-qos", "guard"};
  return names[static_cast<int>(s)];
}

struct AdaptiveQueueParams {
  double lambda_new = 0.0;
  double dwell_s = 240.0;
  double capacity_kbps = 5000.0;
  std::vector<TrafficClass> classes = table61_classes();
  // Guard scheme: `guard_channels` if >= 0, else round(guard_fraction * N).
  double guard_fraction = 0.05;
  int guard_channels = -1;

  double eta() const { return 1.0 / dwell_s; }
  double full_duration() const {
    double t = 0.0;
    for (const auto &c : classes) t += c.arrival_share * c.duration_at_full_bw;
    return t;
  }
};

struct AdaptiveDimensions {
  int N = 0;
  int S = 0;
  int L = 0;
  int G = 0;
};

namespace detail {

// Small exact rationals over __int128 for the floor boundaries of the state counts.
struct Rational {
  __int128 num = 0;
  __int128 den = 1;
};

inline __int128 gcd128(__int128 a, __int128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    __int128 t = a % b;
    a = b;
    b = t;
  }
  return a == 0 ? 1 : a;
}

inline Rational reduce(Rational r) {
  __int128 g = gcd128(r.num, r.den);
  r.num /= g;
  r.den /= g;
  if (r.den < 0) r.num = -r.num, r.den = -r.den;
  return r;
}

inline bool mul128(__int128 a, __int128 b, __int128 &out) { return !__builtin_mul_overflow(a, b, &out); }

inline std::optional<Rational> to_rational(double x) {
  double scaled = x * 1e6;
  if (!(std::abs(scaled) < 9e15)) return std::nullopt;
  long long k = std::llround(scaled);
  if (std::abs(static_cast<double>(k) / 1e6 - x) > 1e-12 * std::max(1.0, std::abs(x))) return std::nullopt;
  return reduce({k, 1000000});
}

inline std::optional<Rational> mul(const std::optional<Rational> &a, const std::optional<Rational> &b) {
  if (!a || !b) return std::nullopt;
  Rational r;
  if (!mul128(a->num, b->num, r.num) || !mul128(a->den, b->den, r.den)) return std::nullopt;
  return reduce(r);
}

inline std::optional<Rational> add(const std::optional<Rational> &a, const std::optional<Rational> &b) {
  if (!a || !b) return std::nullopt;
  __int128 x, y, d;
  if (!mul128(a->num, b->den, x) || !mul128(b->num, a->den, y) || !mul128(a->den, b->den, d)) return std::nullopt;
  if (__builtin_add_overflow(x, y, &x)) return std::nullopt;
  return reduce({x, d});
}

inline std::optional<long long> floor_div(const std::optional<Rational> &a, const std::optional<Rational> &b) {
  if (!a || !b || b->num == 0) return std::nullopt;
  __int128 x, y;
  if (!mul128(a->num, b->den, x) || !mul128(a->den, b->num, y)) return std::nullopt;
  if (y < 0) x = -x, y = -y;
  __int128 q = x / y;
  if ((x % y != 0) && (x < 0)) --q;
  return static_cast<long long>(q);
}

// floor(C / sum a*b) style quotients; falls back to a snapped double when the
// inputs are not short decimals.
inline int floor_quotient(const std::optional<Rational> &num, const std::optional<Rational> &den, double num_d, double den_d) {
  if (auto q = floor_div(num, den)) return static_cast<int>(*q);
  double q = num_d / den_d;
  double r = std::round(q);
  return static_cast<int>(std::abs(q - r) < 1e-9 * std::max(1.0, std::abs(q)) ? r : std::floor(q));
}

} // namespace detail

inline AdaptiveQueueParams scheme_params(AdaptiveQueueParams p, AdaptiveScheme s) {
  for (auto &c : p.classes) {
    if (s == AdaptiveScheme::non_prioritized) c.degrade_new = c.degrade_hand;
    if (s == AdaptiveScheme::aqos) c.degrade_new = 0.0;
    if (s == AdaptiveScheme::hard_qos || s == AdaptiveScheme::guard) c.degrade_new = c.degrade_hand = 0.0;
  }
  return p;
}

inline AdaptiveDimensions adaptive_dimensions(const AdaptiveQueueParams &p0, AdaptiveScheme s) {
  validate_classes(p0.classes);
  if (!(p0.capacity_kbps > 0.0)) throw InvalidArgument("capacity must be positive");
  AdaptiveQueueParams p = scheme_params(p0, s);
  using detail::add;
  using detail::mul;
  using detail::to_rational;
  std::optional<detail::Rational> C = to_rational(p.capacity_kbps), full = detail::Rational{0, 1}, dh = detail::Rational{0, 1}, fh = detail::Rational{0, 1},
                                  dn = detail::Rational{0, 1}, fn = detail::Rational{0, 1};
  double full_d = 0, dh_d = 0, fh_d = 0, dn_d = 0, fn_d = 0;
  for (const auto &c : p.classes) {
    auto ab = mul(to_rational(c.arrival_share), to_rational(c.requested_bw));
    full = add(full, ab);
    dh = add(dh, mul(ab, to_rational(c.degrade_hand)));
    fh = add(fh, mul(ab, to_rational(1.0 - c.degrade_hand)));
    dn = add(dn, mul(ab, to_rational(c.degrade_new)));
    fn = add(fn, mul(ab, to_rational(1.0 - c.degrade_new)));
    double abd = c.arrival_share * c.requested_bw;
    full_d += abd;
    dh_d += abd * c.degrade_hand;
    fh_d += abd * (1 - c.degrade_hand);
    dn_d += abd * c.degrade_new;
    fn_d += abd * (1 - c.degrade_new);
  }
  AdaptiveDimensions d;
  d.N = detail::floor_quotient(C, full, p.capacity_kbps, full_d);
  if (d.N < 1) throw InvalidArgument("capacity below one average call");
  if (s == AdaptiveScheme::hard_qos || s == AdaptiveScheme::guard) {
    d.S = d.L = 0;
    d.G = s == AdaptiveScheme::hard_qos ? 0 : p.guard_channels >= 0 ? p.guard_channels : static_cast<int>(std::lround(p.guard_fraction * d.N));
    if (d.G > d.N) throw InvalidArgument("more guard channels than channels");
    return d;
  }
  d.S = detail::floor_quotient(mul(C, dh), mul(fh, full), p.capacity_kbps * dh_d, fh_d * full_d);
  d.L = detail::floor_quotient(mul(C, dn), mul(fn, full), p.capacity_kbps * dn_d, fn_d * full_d);
  if (s == AdaptiveScheme::non_prioritized) d.L = d.S;
  if (s == AdaptiveScheme::aqos) d.L = 0;
  d.L = std::min(d.L, d.S);
  return d;
}

// Mean call duration at state i > N: non-real-time calls run longer in proportion to the
// bandwidth they lost, with the class mix at its expected value a_m * i.
inline double adaptive_duration_at(const AdaptiveQueueParams &p, int i, int N) {
  if (i <= N) return p.full_duration();
  double rt = 0.0, nrt_full = 0.0;
  for (const auto &c : p.classes) {
    if (c.adaptive()) {
      nrt_full += c.arrival_share * i * c.requested_bw;
    } else {
      rt += c.arrival_share * i * c.requested_bw;
    }
  }
  if (nrt_full <= 0.0) return p.full_duration();
  double X = (p.capacity_kbps - rt) / nrt_full;
  if (X >= 1.0) return p.full_duration();
  std::vector<double> w, fl, cap;
  for (const auto &c : p.classes) {
    w.push_back(c.adaptive() ? c.arrival_share * i : 0.0);
    fl.push_back(c.floor_hand());
    cap.push_back(c.requested_bw);
  }
  auto alloc = detail::floor_weighted_split(p.capacity_kbps - rt, w, fl, cap);
  double t = 0.0;
  for (std::size_t m = 0; m < p.classes.size(); ++m) {
    const auto &c = p.classes[m];
    if (c.adaptive())
      t += c.arrival_share * c.duration_at_full_bw * c.requested_bw / alloc[m];
    else
      t += c.arrival_share * c.duration_at_full_bw;
  }
  return t;
}

inline ChainModel adaptive_chain(const AdaptiveQueueParams &p0, AdaptiveScheme s, double lambda_h) {
  AdaptiveQueueParams p = scheme_params(p0, s);
  AdaptiveDimensions d = adaptive_dimensions(p0, s);
  ChainModel m;
  m.lo = 0;
  m.hi = d.N + d.S;
  for (int i = 0; i <= m.hi; ++i) m.departure.push_back(i * (p.eta() + 1.0 / adaptive_duration_at(p, i, d.N)));
  m.streams = {{p.lambda_new, false, d.N + d.L - d.G}, {lambda_h, true, d.N + d.S}};
  return m;
}

inline double adaptive_handover_probability(const AdaptiveQueueParams &p) { return p.eta() / (p.eta() + 1.0 / p.full_duration()); }

inline ChainSolution solve_adaptive(const AdaptiveQueueParams &p, AdaptiveScheme s, const FixedPointOptions &opt = {}) {
  if (p.lambda_new < 0.0 || !(p.dwell_s > 0.0)) throw InvalidArgument("need lambda_new >= 0 and dwell > 0");
  double ph = adaptive_handover_probability(p);
  AdaptiveQueueParams ps = scheme_params(p, s);
  double mean_bw = 0.0;
  for (const auto &c : ps.classes) mean_bw += c.arrival_share * c.requested_bw;
  double lh = ph * p.lambda_new / (1.0 - ph);
  std::vector<double> hist;
  for (int it = 1; it <= opt.max_iterations; ++it) {
    ChainModel m = adaptive_chain(p, s, lh);
    ChainSolution sol = solve_chain(m);
    double next = ph * (1.0 - sol.p_block) * p.lambda_new / (1.0 - ph * (1.0 - sol.p_drop));
    double res = std::abs(next - lh);
    hist.push_back(res);
    if (res < opt.tolerance) {
      sol = solve_chain(adaptive_chain(p, s, next));
      sol.iterations = it;
      sol.residual = res;
      sol.handover_rate = next;
      sol.forced_termination = ph * sol.p_drop / (1.0 - ph * (1.0 - sol.p_drop));
      for (int i = sol.lo; i <= m.hi; ++i) sol.utilization += sol.prob(i) * std::min(1.0, i * mean_bw / p.capacity_kbps);
      return sol;
    }
    lh += opt.damping * (next - lh);
  }
  throw NonConvergence("handover-rate fixed point did not converge; " + detail::history_tail(hist));
}

// ---- multicast cell: M always-on sessions plus unicast, voice and background calls ----

struct MulticastQueueParams {
  int M = 12;
  int N = 0;
  int S = 0;
  int L = 0;
  int L_back = 0; // background new calls are admitted below N + L_back
  double lambda_voice = 0.0;
  double lambda_unicast = 0.0;
  double lambda_back = 0.0;
  double lambda_h = 0.0;
  double mu = 1.0 / 120.0;

  void validate() const {
    if (M < 0 || N < M || S < 0 || L < 0 || L > S || L_back < 0 || L_back > S) throw InvalidArgument("need 0 <= M <= N, 0 <= L, L_back <= S");
    if (lambda_voice < 0 || lambda_unicast < 0 || lambda_back < 0 || lambda_h < 0 || !(mu > 0)) throw InvalidArgument("rates must be >= 0 and mu > 0");
  }
};

inline ChainModel multicast_chain(const MulticastQueueParams &p) {
  p.validate();
  ChainModel m;
  m.lo = p.M;
  m.hi = p.N + p.S;
  for (int i = m.lo; i <= m.hi; ++i) m.departure.push_back((i - p.M) * p.mu);
  m.streams = {{p.lambda_voice + p.lambda_unicast, false, p.N + p.L}, {p.lambda_back, false, p.N + p.L_back}, {p.lambda_h, true, p.N + p.S}};
  return m;
}

inline ChainSolution solve_multicast(const MulticastQueueParams &p) {
  ChainModel m = multicast_chain(p);
  ChainSolution s;
  s.lo = m.lo;
  s.p = stationary(m);
  s.p_drop = s.tail(p.N + p.S);
  s.p_block = s.tail(p.N + p.L);
  s.p_block_back = s.tail(p.N + p.L_back);
  for (int i = m.lo; i <= m.hi; ++i) s.mean_calls += (i - p.M) * s.prob(i);
  return s;
}

// Same handover balance as the single-cell model, over the three new-call streams.
inline ChainSolution solve_multicast_fixed(MulticastQueueParams p, double dwell_s, const FixedPointOptions &opt = {}) {
  double eta = 1.0 / dwell_s;
  double ph = eta / (eta + p.mu);
  p.mu += eta;
  std::vector<double> hist;
  p.lambda_h = 0.0;
  for (int it = 1; it <= opt.max_iterations; ++it) {
    ChainSolution s = solve_multicast(p);
    double admitted = (p.lambda_voice + p.lambda_unicast) * (1 - s.p_block) + p.lambda_back * (1 - s.p_block_back);
    double next = ph * admitted / (1.0 - ph * (1.0 - s.p_drop));
    double res = std::abs(next - p.lambda_h);
    hist.push_back(res);
    if (res < opt.tolerance) {
      p.lambda_h = next;
      s = solve_multicast(p);
      s.iterations = it;
      s.residual = res;
      s.handover_rate = next;
      s.forced_termination = ph * s.p_drop / (1.0 - ph * (1.0 - s.p_drop));
      return s;
    }
    p.lambda_h += opt.damping * (next - p.lambda_h);
  }
  throw NonConvergence("multicast-cell fixed point did not converge; " + detail::history_tail(hist));
}

// ---- discrete-event oracle ----

struct Interval {
  double value = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double x, double slack = 0.0) const { return x >= lo - slack && x <= hi + slack; }
};

struct DesOptions {
  double horizon_s = 0.0; // 0: no time limit
  long max_calls = 1000000; // 0: no call limit
  int batches = 20;
  std::uint64_t seed = 1;
};

struct DesResult {
  std::vector<Interval> stream_loss; // one per ArrivalStream, in model order
  Interval utilization;              // mean occupancy divided by the top state
  long calls = 0;
  double simulated_s = 0.0;
};

namespace detail {

inline double t975(int dof) {
  static const double t[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228, 2.201, 2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086,
                             2.080, 2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042};
  return dof >= 1 && dof <= 30 ? t[dof - 1] : 1.96;
}

// Union of the batch-means interval and the Wilson score interval on pooled counts;
// the latter keeps rare events (few or no losses) honest.
inline Interval loss_interval(const std::vector<long> &offered, const std::vector<long> &lost) {
  long n = 0, k = 0;
  for (std::size_t b = 0; b < offered.size(); ++b) n += offered[b], k += lost[b];
  Interval out;
  if (n == 0) return out;
  out.value = static_cast<double>(k) / n;
  double z = 1.96, ph = out.value;
  double den = 1 + z * z / n;
  double centre = (ph + z * z / (2.0 * n)) / den;
  double half = z * std::sqrt(ph * (1 - ph) / n + z * z / (4.0 * n * n)) / den;
  out.lo = std::max(0.0, centre - half);
  out.hi = std::min(1.0, centre + half);
  std::vector<double> r;
  for (std::size_t b = 0; b < offered.size(); ++b)
    if (offered[b] > 0) r.push_back(static_cast<double>(lost[b]) / offered[b]);
  if (r.size() >= 2) {
    double mean = std::accumulate(r.begin(), r.end(), 0.0) / r.size();
    double var = 0.0;
    for (double x : r) var += (x - mean) * (x - mean);
    var /= (r.size() - 1);
    double h = t975(static_cast<int>(r.size()) - 1) * std::sqrt(var / r.size());
    out.lo = std::min(out.lo, mean - h);
    out.hi = std::max(out.hi, mean + h);
  }
  return out;
}

} // namespace detail

// Event-driven simulation of one cell: Poisson arrivals per stream, admission by the
// stream's state limit, each call released after an exponential holding time whose
// rate depends on the occupancy.
inline DesResult simulate_des(const ChainModel &m, const DesOptions &opt) {
  m.validate();
  if (opt.horizon_s <= 0.0 && opt.max_calls <= 0) throw InvalidArgument("DES needs a horizon or a call budget");
  if (opt.batches < 1) throw InvalidArgument("DES needs at least one batch");
  Rng rng = make_rng(opt.seed, 0x646573);
  double lambda = 0.0;
  for (const auto &s : m.streams) lambda += s.rate;
  std::size_t ns = m.streams.size();
  long budget = opt.max_calls > 0 ? opt.max_calls : std::numeric_limits<long>::max();
  double horizon = opt.horizon_s > 0.0 ? opt.horizon_s : std::numeric_limits<double>::infinity();
  // Batches split the call budget when there is one, otherwise the horizon.
  auto batch_of = [&](long calls, double t) {
    int b = opt.max_calls > 0 ? static_cast<int>(calls * opt.batches / budget) : static_cast<int>(t * opt.batches / horizon);
    return std::min(b, opt.batches - 1);
  };
  std::vector<std::vector<long>> offered(ns, std::vector<long>(opt.batches, 0)), lost(ns, std::vector<long>(opt.batches, 0));
  std::vector<double> occ_area(opt.batches, 0.0), occ_time(opt.batches, 0.0);
  DesResult res;
  int state = m.lo;
  double t = 0.0;
  long calls = 0;
  while (calls < budget) {
    double dep = m.departure[state - m.lo];
    double total = lambda + dep;
    if (!(total > 0.0)) {
      t = horizon;
      break;
    }
    double dt = exponential(rng, total);
    if (t + dt > horizon) {
      int b = batch_of(calls, t);
      occ_area[b] += (horizon - t) * state;
      occ_time[b] += horizon - t;
      t = horizon;
      break;
    }
    int b = batch_of(calls, t);
    occ_area[b] += dt * state;
    occ_time[b] += dt;
    t += dt;
    double u = uniform01(rng) * total;
    if (u < lambda) {
      std::size_t k = 0;
      double acc = m.streams[0].rate;
      while (k + 1 < ns && u >= acc) acc += m.streams[++k].rate;
      b = batch_of(calls, t);
      ++offered[k][b];
      ++calls;
      if (state < m.streams[k].limit && state < m.hi)
        ++state;
      else
        ++lost[k][b];
    } else {
      --state;
    }
  }
  for (std::size_t k = 0; k < ns; ++k) res.stream_loss.push_back(detail::loss_interval(offered[k], lost[k]));
  std::vector<double> occ;
  double area = 0.0, time = 0.0;
  for (int b = 0; b < opt.batches; ++b) {
    area += occ_area[b];
    time += occ_time[b];
    if (occ_time[b] > 0.0) occ.push_back(occ_area[b] / occ_time[b] / m.hi);
  }
  res.utilization.value = time > 0.0 ? area / time / m.hi : 0.0;
  res.utilization.lo = res.utilization.hi = res.utilization.value;
  if (occ.size() >= 2) {
    double mean = std::accumulate(occ.begin(), occ.end(), 0.0) / occ.size(), var = 0.0;
    for (double x : occ) var += (x - mean) * (x - mean);
    double h = detail::t975(static_cast<int>(occ.size()) - 1) * std::sqrt(var / (occ.size() - 1) / occ.size());
    res.utilization.lo = mean - h;
    res.utilization.hi = mean + h;
  }
  res.calls = calls;
  res.simulated_s = t;
  return res;
}

struct TwoTierDes {
  DesResult femto;
  DesResult macro;
};

// Simulates one representative femtocell and the macro layer at the solver's converged rates.
inline TwoTierDes simulate_des(const TwoTierParams &p, const TwoTierSolution &sol, const DesOptions &opt) {
  DesOptions fo = opt, mo = opt;
  fo.seed = derive_seed(opt.seed, 1);
  mo.seed = derive_seed(opt.seed, 2);
  return {simulate_des(femto_chain(p, sol.lambda_total_f), fo), simulate_des(macro_chain(p, sol.lambda_h_m), mo)};
}

// ---- CSV rows ----

struct QueueRow {
  std::string scheme;
  double load = 0.0;
  double p_block = 0.0;
  double p_drop = 0.0;
  double utilization = 0.0;
  double handover_rate = 0.0;
};

inline std::string to_csv(const std::vector<QueueRow> &rows) {
  std::ostringstream os;
  os.precision(17);
  os << "scheme,load,p_block,p_drop,utilization,handover_rate\n";
  for (const auto &r : rows) os << r.scheme << ',' << r.load << ',' << r.p_block << ',' << r.p_drop << ',' << r.utilization << ',' << r.handover_rate << '\n';
  return os.str();
}

} // namespace femtonet

#endif
