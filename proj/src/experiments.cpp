#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <thread>

#include "femtonet/harness.hpp"
#include "femtonet/neighborlist.hpp"
#include "femtonet/spectrum.hpp"

namespace femtonet {

namespace {

// Runs fn(0..n-1) on a small pool. Each task writes only its own slot, so results
// merge by index regardless of scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)> &fn) {
  unsigned workers = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(), static_cast<unsigned>(n)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n && !failed; i = next++) {
        try {
          fn(i);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
        }
      }
    });
  for (auto &t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

struct Moments {
  double sum = 0.0;
  double sq = 0.0;
  long n = 0;
  void add(double v) {
    sum += v;
    sq += v * v;
    ++n;
  }
  double mean() const { return n ? sum / n : 0.0; }
  double stderr_() const {
    if (n < 2) return 0.0;
    double m = mean();
    double var = std::max(0.0, (sq - n * m * m) / (n - 1));
    return std::sqrt(var / n);
  }
};

struct Emitter {
  const Scenario &s;
  std::vector<Row> &rows;
  void operator()(const std::string &scheme, double x, const std::string &metric, double value, double se = 0.0) const {
    rows.push_back({s.name, scheme, x, metric, value, se, s.seed});
  }
};

const std::vector<Scheme> fig4_schemes{Scheme::dedicated, Scheme::shared, Scheme::sub, Scheme::static_reuse, Scheme::dynamic_reuse};

// Femto UE at a fixed distance from the reference FAP, random bearing per trial.
void run_fig4(const Scenario &s, bool throughput, std::vector<Row> &rows) {
  const auto &counts = s.spectrum.femto_counts;
  const long T = s.trials;
  const std::size_t S = fig4_schemes.size();
  std::vector<double> thr(counts.size() * T * S), out(counts.size() * T * S);
  PropagationParams prop = s.radio.propagation();
  prop.validate();
  MacroGeometry geo = s.topology.geometry();
  double gamma = db_to_linear(s.radio.gamma_db);
  parallel_for(counts.size() * T, [&](std::size_t task) {
    std::size_t ci = task / T;
    long t = static_cast<long>(task % T);
    std::uint64_t seed = derive_seed(derive_seed(s.seed, static_cast<std::uint64_t>(counts[ci])), static_cast<std::uint64_t>(t));
    CellTopology topo = place_femtocells(seed, counts[ci], geo);
    Rng rng = make_rng(seed, 0x756570);
    double a = 2.0 * M_PI * uniform01(rng);
    Vec2 ref = topo.site(0).position;
    Vec2 ue{ref.x + s.radio.ue_distance_m * std::cos(a), ref.y + s.radio.ue_distance_m * std::sin(a)};
    for (std::size_t k = 0; k < S; ++k) {
      SpectrumPlan plan = build_plan(fig4_schemes[k], topo, {s.spectrum.total_hz, s.spectrum.femto_fraction, s.spectrum.edge_fraction, seed});
      Rng draws = make_rng(seed, 0x736864);
      LinkMetrics m = evaluate_link(topo, plan, ue, 0, gamma, prop, &draws);
      std::size_t idx = (ci * T + t) * S + k;
      thr[idx] = m.throughput_bps / 1e6;
      out[idx] = m.outage;
    }
  });
  Emitter emit{s, rows};
  for (std::size_t ci = 0; ci < counts.size(); ++ci)
    for (std::size_t k = 0; k < S; ++k) {
      Moments mt, mo;
      for (long t = 0; t < T; ++t) {
        std::size_t idx = (ci * T + t) * S + k;
        mt.add(thr[idx]);
        mo.add(out[idx]);
      }
      if (throughput)
        emit(to_string(fig4_schemes[k]), counts[ci], "throughput_mbps", mt.mean(), mt.stderr_());
      else
        emit(to_string(fig4_schemes[k]), counts[ci], "outage", mo.mean(), mo.stderr_());
    }
}

void run_fig5_mobility(const Scenario &s, std::vector<Row> &rows) {
  Emitter emit{s, rows};
  TwoTierSolution base = solve_two_tier(s.two_tier.params(0));
  for (int n : s.two_tier.femto_counts) {
    TwoTierParams p = s.two_tier.params(n);
    TwoTierSolution sol = solve_two_tier(p);
    const std::string sc = "two-tier";
    emit(sc, n, "macro_p_block", sol.macro.p_block);
    emit(sc, n, "macro_p_drop", sol.macro.p_drop);
    emit(sc, n, "macro_forced_termination", sol.macro.forced_termination);
    emit(sc, n, "femto_p_block", sol.femto.p_block);
    emit(sc, n, "rate_mm", sol.rates.mm);
    emit(sc, n, "rate_mf", sol.rates.mf);
    emit(sc, n, "rate_fm", sol.rates.fm);
    emit(sc, n, "rate_ff", sol.rates.ff);
    emit(sc, n, "macro_release_rate", sol.mu_m);
    emit(sc, n, "iterations", sol.iterations);
    emit("macro-only", n, "macro_p_block", base.macro.p_block);
    emit("macro-only", n, "macro_forced_termination", base.macro.forced_termination);
  }
}

void run_fig5_neighborlist(const Scenario &s, std::vector<Row> &rows) {
  const auto &dens = s.neighbor.densities;
  MissingTargetParams mp;
  mp.area_radius_m = s.neighbor.area_radius_m;
  mp.hidden_probability = s.neighbor.hidden_probability;
  mp.obstruction_loss_db = s.neighbor.obstruction_loss_db;
  mp.d_max_m = s.neighbor.d_max_m;
  mp.s_t0_dbm = s.neighbor.s_t0_dbm;
  mp.s_t1_dbm = s.neighbor.s_t1_dbm;
  mp.propagation = s.radio.propagation();
  struct Acc {
    long miss_p = 0, miss_b = 0, used = 0;
    Moments size_p, size_b;
  };
  std::vector<Acc> acc(dens.size());
  parallel_for(dens.size(), [&](std::size_t i) {
    Rng rng = make_rng(derive_seed(s.seed, static_cast<std::uint64_t>(dens[i])), 0x666e6c);
    Acc &a = acc[i];
    long draws = 0;
    while (a.used < s.trials) {
      if (++draws > 100 * s.trials + 1000) throw NonConvergence("no handover target found in the sampled topologies");
      MissingTargetTrial t = draw_missing_target_trial(dens[i], rng, mp);
      if (t.target < 0) continue;
      ++a.used;
      ListContext ctx{t.ue, mp.d_max_m, {}, &t.coordination};
      auto prop = build_list_from_femto(t.scan, t.plan, t.topo, 0, ctx).ids();
      auto base = rssi_only_list(t.scan, t.topo, ctx, 0);
      a.miss_p += std::find(prop.begin(), prop.end(), t.target) == prop.end();
      a.miss_b += std::find(base.begin(), base.end(), t.target) == base.end();
      a.size_p.add(static_cast<double>(prop.size()));
      a.size_b.add(static_cast<double>(base.size()));
    }
  });
  Emitter emit{s, rows};
  for (std::size_t i = 0; i < dens.size(); ++i) {
    const Acc &a = acc[i];
    auto binom = [&](long k) {
      double p = static_cast<double>(k) / a.used;
      return std::pair{p, std::sqrt(p * (1 - p) / a.used)};
    };
    auto [pp, sp] = binom(a.miss_p);
    auto [pb, sb] = binom(a.miss_b);
    emit("proposed", dens[i], "p_target_missing", pp, sp);
    emit("rssi-only", dens[i], "p_target_missing", pb, sb);
    emit("proposed", dens[i], "list_size", a.size_p.mean(), a.size_p.stderr_());
    emit("rssi-only", dens[i], "list_size", a.size_b.mean(), a.size_b.stderr_());
  }
}

void run_fig6(const Scenario &s, std::vector<Row> &rows) {
  const std::vector<AdaptiveScheme> schemes{AdaptiveScheme::proposed, AdaptiveScheme::hard_qos, AdaptiveScheme::guard, AdaptiveScheme::non_prioritized, AdaptiveScheme::aqos};
  const auto &loads = s.cac.loads;
  std::vector<ChainSolution> sols(loads.size() * schemes.size());
  parallel_for(sols.size(), [&](std::size_t i) { sols[i] = solve_adaptive(s.cac.params(loads[i / schemes.size()]), schemes[i % schemes.size()]); });
  Emitter emit{s, rows};
  for (std::size_t i = 0; i < sols.size(); ++i) {
    double x = loads[i / schemes.size()];
    std::string sc = to_string(schemes[i % schemes.size()]);
    emit(sc, x, "p_block", sols[i].p_block);
    emit(sc, x, "p_drop", sols[i].p_drop);
    emit(sc, x, "utilization", sols[i].utilization);
    emit(sc, x, "handover_rate", sols[i].handover_rate);
    emit(sc, x, "forced_termination", sols[i].forced_termination);
  }
}

void run_fig7(const Scenario &s, std::vector<Row> &rows) {
  MulticastTraffic tr = s.mbs.traffic();
  tr.validate();
  auto schemes = multicast_schemes();
  const auto &loads = s.mbs.loads;
  struct Point {
    ChainSolution sol;
    double c_b = 0, c_nb = 0, uni = 0, mean_layers = 0, top2 = 0, bot2 = 0, topm = 0, botm = 0;
  };
  std::vector<Point> pts(loads.size() * schemes.size());
  parallel_for(pts.size(), [&](std::size_t i) {
    const MulticastScheme &sc = schemes[i % schemes.size()];
    double lam = loads[i / schemes.size()];
    MulticastQueueParams q = multicast_dimensions(tr, sc);
    q.lambda_voice = lam * tr.share_voice;
    q.lambda_unicast = lam * tr.share_unicast;
    q.lambda_back = lam * tr.share_back;
    Point &pt = pts[i];
    pt.sol = solve_multicast_fixed(q, tr.dwell_s);
    for (int st = q.M; st <= q.N + q.S; ++st) {
      double w = pt.sol.prob(st);
      if (w == 0.0) continue;
      MulticastStateAllocation a = multicast_state_allocation(tr, sc, st);
      TechniqueResult ml = technique_multi_level(a.c_b, tr.sessions);
      pt.c_b += w * a.c_b;
      pt.c_nb += w * a.c_nb;
      pt.uni += w * a.unicast_layers;
      double mean = 0.0;
      for (int l : a.mbs_layers) mean += l;
      pt.mean_layers += w * mean / a.mbs_layers.size();
      pt.top2 += w * a.mbs_layers.front();
      pt.bot2 += w * a.mbs_layers.back();
      pt.topm += w * ml.layers.front();
      pt.botm += w * ml.layers.back();
    }
  });
  Emitter emit{s, rows};
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Point &p = pts[i];
    double x = loads[i / schemes.size()];
    std::string sc = schemes[i % schemes.size()].name();
    emit(sc, x, "p_block", p.sol.p_block);
    emit(sc, x, "p_drop", p.sol.p_drop);
    emit(sc, x, "p_block_background", p.sol.p_block_back);
    emit(sc, x, "mbs_kbps", p.c_b);
    emit(sc, x, "non_mbs_kbps", p.c_nb);
    emit(sc, x, "unicast_layers", p.uni);
    emit(sc, x, "mbs_layers", p.mean_layers);
    emit(sc, x, "mbs_layers_top_two_level", p.top2);
    emit(sc, x, "mbs_layers_bottom_two_level", p.bot2);
    emit(sc, x, "mbs_layers_top_multi_level", p.topm);
    emit(sc, x, "mbs_layers_bottom_multi_level", p.botm);
  }
}

// Viewer counts for M sessions: every session has at least one viewer, the rest pick at
// random; in "half" mode the first session holds half of all users.
std::vector<long> draw_viewers(const PopularitySetup &p, int M, Rng &rng) {
  std::vector<long> k(M, 1);
  long rest = p.users - M;
  int from = 0;
  if (p.mode == "half" && M > 1) {
    long half = std::max<long>(1, p.users / 2);
    k[0] = half;
    rest = p.users - half - (M - 1);
    from = 1;
  }
  for (long u = 0; u < rest; ++u) k[from + uniform_index(rng, static_cast<std::uint64_t>(M - from))]++;
  std::sort(k.begin(), k.end(), std::greater<>());
  return k;
}

void run_fig8(const Scenario &s, std::vector<Row> &rows) {
  const auto &p = s.popularity;
  const auto &Ms = p.session_counts;
  struct Acc {
    Moments prop, base, improved;
  };
  std::vector<Acc> acc(Ms.size());
  parallel_for(Ms.size(), [&](std::size_t i) {
    int M = Ms[i];
    Rng rng = make_rng(derive_seed(s.seed, static_cast<std::uint64_t>(M)), 0x706f70);
    for (long t = 0; t < s.trials; ++t) {
      auto k = draw_viewers(p, M, rng);
      PopularityAllocation al = allocate_popularity(p.capacity_mbps, p.beta_max_mbps, p.beta_min_mbps, k);
      Satisfaction sat = satisfaction(al);
      acc[i].prop.add(sat.average);
      acc[i].base.add(sat.baseline);
      double eq = equal_share(p.capacity_mbps, p.beta_max_mbps, static_cast<std::size_t>(M));
      long better = 0;
      for (int m = 0; m < M; ++m)
        if (al.beta[m] > eq + 1e-12) better += k[m];
      acc[i].improved.add(static_cast<double>(better));
    }
  });
  Emitter emit{s, rows};
  for (std::size_t i = 0; i < Ms.size(); ++i) {
    emit("proposed", Ms[i], "satisfaction_avg", acc[i].prop.mean(), acc[i].prop.stderr_());
    emit("equal-share", Ms[i], "satisfaction_avg", acc[i].base.mean(), acc[i].base.stderr_());
    emit("proposed", Ms[i], "users_improved", acc[i].improved.mean(), acc[i].improved.stderr_());
  }
}

const std::map<std::string, std::pair<std::string, std::function<void(const Scenario &, std::vector<Row> &)>>> &experiments() {
  static const std::map<std::string, std::pair<std::string, std::function<void(const Scenario &, std::vector<Row> &)>>> e = {
      {"fig4-throughput", {"table-4.3", [](const Scenario &s, std::vector<Row> &r) { run_fig4(s, true, r); }}},
      {"fig4-outage", {"table-4.3", [](const Scenario &s, std::vector<Row> &r) { run_fig4(s, false, r); }}},
      {"fig5-mobility", {"table-5.1", run_fig5_mobility}},
      {"fig5-neighborlist", {"table-5.1", run_fig5_neighborlist}},
      {"fig6-cac", {"table-6.1", run_fig6}},
      {"fig7-mbs", {"table-7.1", run_fig7}},
      {"fig8-popularity", {"table-8.1", run_fig8}},
  };
  return e;
}

} // namespace

std::vector<std::string> experiment_names() {
  std::vector<std::string> out;
  for (const auto &[k, v] : experiments()) out.push_back(k);
  return out;
}

std::string default_preset(const std::string &experiment) {
  auto it = experiments().find(experiment);
  if (it == experiments().end()) throw ConfigError("unknown experiment '" + experiment + "'");
  return it->second.first;
}

ExperimentResult run_experiment(const std::string &name, const Scenario &s) {
  auto it = experiments().find(name);
  if (it == experiments().end()) throw ConfigError("unknown experiment '" + name + "'");
  validate(s);
  ExperimentResult r;
  r.experiment = name;
  r.scenario = s.name;
  r.seed = s.seed;
  r.version = version;
  auto t0 = std::chrono::steady_clock::now();
  if (s.trials > 0) it->second.second(s, r.rows);
  r.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

} // namespace femtonet
