#ifndef FEMTONET_RADIO_HPP
#define FEMTONET_RADIO_HPP

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "femtonet/common.hpp"
#include "femtonet/spectrum.hpp"
#include "femtonet/topology.hpp"

namespace femtonet {

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

// Hata urban loss written as L = A + B·log10(d_km), folded into P0·d^-eta with d in metres.
struct PowerLaw {
  double p0 = 1.0;
  double eta = 2.0;
};

inline PowerLaw hata_urban(double carrier_hz, double bs_height_m, double ue_height_m) {
  double f = carrier_hz / 1e6;
  double a_hm = (1.1 * std::log10(f) - 0.7) * ue_height_m - (1.56 * std::log10(f) - 0.8);
  double A = 69.55 + 26.16 * std::log10(f) - 13.82 * std::log10(bs_height_m) - a_hm;
  double B = 44.9 - 6.55 * std::log10(bs_height_m);
  return {db_to_linear(-(A - 3.0 * B)), B / 10.0};
}

// Free-space loss at the 1 m reference distance of the indoor log-distance model.
inline double indoor_reference_gain(double carrier_hz) {
  double lambda = 299792458.0 / carrier_hz;
  return std::pow(lambda / (4.0 * M_PI), 2.0);
}

struct PropagationParams {
  double carrier_hz = 900e6;
  double p0_macro = hata_urban(900e6, 50.0, 2.0).p0;
  double p0_femto = indoor_reference_gain(900e6);
  double path_loss_exp_serving = 2.0;
  double path_loss_exp_femto_interf = 3.0;
  double path_loss_exp_macro_interf = hata_urban(900e6, 50.0, 2.0).eta;
  double shadow_sigma_db_macro = 8.0;
  double shadow_sigma_db_femto = 4.0;
  double wall_loss_db = 20.0;
  double macro_tx_w = 1500.0;
  double femto_tx_w = 0.01;
  double sir_cap_db = 30.0;
  bool shadow_serving = false;

  void validate() const {
    if (path_loss_exp_serving < 2.0 || path_loss_exp_femto_interf < 2.0 || path_loss_exp_macro_interf < 2.0) throw ConfigError("path-loss exponents must be >= 2");
    if (shadow_sigma_db_macro < 0.0 || shadow_sigma_db_femto < 0.0) throw ConfigError("shadowing sigma must be >= 0");
    if (wall_loss_db < 0.0) throw ConfigError("wall loss must be >= 0");
    if (!(p0_macro > 0.0 && p0_femto > 0.0)) throw ConfigError("link constants must be positive");
  }
};

struct LinkBudget {
  double tx_power_w = 1.0;
  double distance_m = 1.0;
  int walls = 0;
  double shadowing = 1.0;
  double fast_fade = 1.0;
};

enum class LinkKind { macro, femto_serving, femto_interferer };

inline double received_power(const PropagationParams &p, const LinkBudget &l, LinkKind kind) {
  if (!(l.distance_m > 0.0)) throw DegenerateGeometry("zero link distance");
  if (!(l.tx_power_w > 0.0) || l.fast_fade < 0.0 || !(l.shadowing > 0.0) || l.walls < 0) throw InvalidArgument("invalid link budget");
  double p0 = kind == LinkKind::macro ? p.p0_macro : p.p0_femto;
  double eta = kind == LinkKind::macro ? p.path_loss_exp_macro_interf : kind == LinkKind::femto_serving ? p.path_loss_exp_serving : p.path_loss_exp_femto_interf;
  double wall = db_to_linear(-p.wall_loss_db * l.walls);
  return l.tx_power_w * p0 * std::pow(l.distance_m, -eta) * l.shadowing * l.fast_fade * wall;
}

struct SourcePower {
  bool macro = false;
  int id = 0;
  double power_w = 0.0;
};

struct SirReport {
  double signal_w = 0.0;
  double femto_interf_w = 0.0;
  double macro_interf_w = 0.0;
  std::vector<SourcePower> per_source;
  Band serving_band;

  bool interference_free() const { return !(femto_interf_w + macro_interf_w > 0.0); }
  // Empty when interference-free.
  std::optional<double> sir_linear() const {
    if (interference_free()) return std::nullopt;
    return signal_w / (femto_interf_w + macro_interf_w);
  }
  double sir_capped(double cap_db) const {
    double cap = db_to_linear(cap_db);
    auto s = sir_linear();
    return s ? std::min(*s, cap) : cap;
  }
};

// Draws for one evaluation: when `rng` is null every shadowing and fading factor is 1.
struct FadingDraws {
  Rng *rng = nullptr;
  bool fade_serving = true;
  bool fade_interferers = true;
};

inline double draw_shadow(Rng *rng, double sigma_db) {
  if (!rng || sigma_db <= 0.0) return 1.0;
  return db_to_linear(sigma_db * standard_normal(*rng));
}

inline double draw_fade(Rng *rng, bool on) { return rng && on ? exponential(*rng, 1.0) : 1.0; }

// SIR at `ue` served by femto `serving`. Only sources whose band at the UE overlaps the
// serving band contribute; femto interferers are the serving FAP's neighbor set and macros
// are the reference cell plus its first tier.
inline SirReport sir(const CellTopology &topo, const SpectrumPlan &plan, const Vec2 &ue, int serving, const PropagationParams &p, FadingDraws draws = {}) {
  const auto &s = topo.site(serving);
  SirReport rep;
  double d0 = distance(ue, s.position);
  rep.serving_band = plan.band_at(topo, serving, d0);
  LinkBudget sl{p.femto_tx_w, d0, 0, p.shadow_serving ? draw_shadow(draws.rng, p.shadow_sigma_db_femto) : 1.0, draw_fade(draws.rng, draws.fade_serving)};
  rep.signal_w = received_power(p, sl, LinkKind::femto_serving);

  for (int k : neighbors_of(topo, serving)) {
    double dk = distance(ue, topo.site(k).position);
    Band bk = plan.band_at(topo, k, dk);
    if (!bands_overlap(rep.serving_band, bk)) continue;
    LinkBudget lb{p.femto_tx_w, dk, topo.walls_between(serving, k), draw_shadow(draws.rng, p.shadow_sigma_db_femto), draw_fade(draws.rng, draws.fade_interferers)};
    double pw = received_power(p, lb, LinkKind::femto_interferer);
    rep.femto_interf_w += pw;
    rep.per_source.push_back({false, k, pw});
  }
  for (std::size_t j = 0; j < topo.macro_sites.size(); ++j) {
    auto it = plan.macro_assignment.find(static_cast<int>(j));
    if (it == plan.macro_assignment.end() || !bands_overlap(rep.serving_band, it->second)) continue;
    LinkBudget lb{p.macro_tx_w, distance(ue, topo.macro_sites[j]), topo.macro_indoor_walls, draw_shadow(draws.rng, p.shadow_sigma_db_macro), draw_fade(draws.rng, draws.fade_interferers)};
    double pw = received_power(p, lb, LinkKind::macro);
    rep.macro_interf_w += pw;
    rep.per_source.push_back({true, static_cast<int>(j), pw});
  }
  return rep;
}

inline double outage_probability_closed_form(double mean_signal, double gamma_linear, double interference) {
  if (!(mean_signal > 0.0) || !(gamma_linear > 0.0) || interference < 0.0) throw InvalidArgument("outage needs S > 0, gamma > 0, I >= 0");
  return -std::expm1(-gamma_linear * interference / mean_signal);
}

// Fraction of serving-link fades Z0 ~ Exp(1) with S·Z0 / I < gamma, interference fixed.
inline Estimate outage_probability_mc(double mean_signal, double gamma_linear, double interference, long trials, std::uint64_t seed) {
  if (trials < 1) throw InvalidArgument("trials must be >= 1");
  Rng rng = make_rng(seed, 0x6f7574);
  long hits = 0;
  for (long t = 0; t < trials; ++t)
    if (mean_signal * exponential(rng, 1.0) < gamma_linear * interference) ++hits;
  double p = static_cast<double>(hits) / trials;
  return {p, std::sqrt(p * (1.0 - p) / trials)};
}

// Topology-level estimator. Interference is held at its shadowed mean, drawn once per
// seed, while the serving link fades per trial.
inline Estimate outage_probability_mc(const CellTopology &topo, const SpectrumPlan &plan, const Vec2 &ue, int serving, double gamma_linear, long trials, std::uint64_t seed,
                                      const PropagationParams &p = {}) {
  Rng rng = make_rng(seed, 0x746f70);
  SirReport mean = sir(topo, plan, ue, serving, p, {&rng, false, false});
  return outage_probability_mc(mean.signal_w, gamma_linear, mean.femto_interf_w + mean.macro_interf_w, trials, seed);
}

inline double shannon_throughput(double bandwidth_hz, double sir_linear) {
  if (bandwidth_hz < 0.0 || sir_linear < 0.0) throw InvalidArgument("bandwidth and SIR must be >= 0");
  if (bandwidth_hz == 0.0) return 0.0;
  return bandwidth_hz * std::log2(1.0 + sir_linear);
}

struct LinkMetrics {
  double bandwidth_hz = 0.0;
  double sir_linear = 0.0;
  double throughput_bps = 0.0;
  double outage = 0.0;
};

// Throughput over the serving band (SIR capped) and closed-form outage for one UE.
inline LinkMetrics evaluate_link(const CellTopology &topo, const SpectrumPlan &plan, const Vec2 &ue, int serving, double gamma_linear, const PropagationParams &p, Rng *rng) {
  SirReport r = sir(topo, plan, ue, serving, p, {rng, false, false});
  LinkMetrics m;
  m.bandwidth_hz = r.serving_band.width();
  m.sir_linear = r.sir_capped(p.sir_cap_db);
  m.throughput_bps = shannon_throughput(m.bandwidth_hz, m.sir_linear);
  m.outage = outage_probability_closed_form(r.signal_w, gamma_linear, r.femto_interf_w + r.macro_interf_w);
  return m;
}

} // namespace femtonet

#endif
