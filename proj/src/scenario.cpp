#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "femtonet/harness.hpp"
#include "presets_embedded.hpp"

namespace femtonet {

using json = nlohmann::json;

PropagationParams RadioSetup::propagation() const {
  PropagationParams p;
  p.carrier_hz = carrier_hz;
  PowerLaw macro = hata_urban(carrier_hz, bs_height_m, fap_height_m);
  p.p0_macro = macro.p0;
  p.path_loss_exp_macro_interf = macro.eta;
  p.p0_femto = indoor_reference_gain(carrier_hz);
  p.path_loss_exp_serving = path_loss_exp_serving;
  p.path_loss_exp_femto_interf = path_loss_exp_femto_interf;
  p.shadow_sigma_db_macro = shadow_sigma_db_macro;
  p.shadow_sigma_db_femto = shadow_sigma_db_femto;
  p.wall_loss_db = wall_loss_db;
  p.macro_tx_w = macro_tx_w;
  p.femto_tx_w = femto_tx_w;
  p.sir_cap_db = sir_cap_db;
  return p;
}

MacroGeometry TopologySetup::geometry() const {
  MacroGeometry g;
  g.macro_radius_m = macro_radius_m;
  g.femto_radius_m = femto_radius_m;
  g.neighbor_threshold_m = neighbor_threshold_m;
  g.min_separation_m = min_separation_m;
  g.pin_reference = true;
  g.reference_fap_distance_m = reference_fap_distance_m;
  g.closed_fraction = closed_fraction;
  g.femto_walls = femto_walls;
  g.macro_indoor_walls = macro_indoor_walls;
  return g;
}

TwoTierParams TwoTierSetup::params(int n) const {
  TwoTierParams p;
  MacroDimensions d = macro_dimensions(capacity_kbps, nonadaptive_kbps, adaptive_max_kbps, adaptive_min_kbps, adaptive_share);
  p.N = d.N;
  p.S = d.S;
  p.K = femto_call_limit;
  p.n = n;
  p.mean_call_s = mean_call_s;
  p.dwell_f_s = dwell_f_s;
  p.dwell_m_s = dwell_m_s;
  // Arrival density is uniform outside femtocells and density_ratio times higher inside.
  double a = p.coverage();
  p.lam_o_m = arrival_rate * (1.0 - a);
  p.lam_o_f = arrival_rate * density_ratio * a;
  return p;
}

AdaptiveQueueParams CacSetup::params(double lambda_new) const {
  AdaptiveQueueParams p;
  p.lambda_new = lambda_new;
  p.dwell_s = dwell_s;
  p.capacity_kbps = capacity_kbps;
  p.classes = classes;
  p.guard_fraction = guard_fraction;
  return p;
}

MulticastTraffic MbsSetup::traffic() const {
  MulticastTraffic t;
  t.capacity_kbps = capacity_kbps;
  t.voice_bw = voice_kbps;
  t.unicast_layer = unicast_layer_kbps;
  t.unicast_max_layers = unicast_max_layers;
  t.unicast_min_layers = unicast_min_layers;
  t.unicast_base = unicast_max_kbps - unicast_max_layers * unicast_layer_kbps;
  t.back_max = back_max_kbps;
  t.back_hand_degrade = xi;
  t.back_new_degrade = xi_new;
  t.mean_call_s = mean_call_s;
  t.dwell_s = dwell_s;
  double total = ratio.at(0) + ratio.at(1) + ratio.at(2);
  t.share_voice = ratio[0] / total;
  t.share_unicast = ratio[1] / total;
  t.share_back = ratio[2] / total;
  t.sessions.clear();
  double base = mbs_min_kbps - mbs_min_layers * mbs_layer_kbps;
  for (int m = 1; m <= mbs_sessions; ++m) t.sessions.push_back({m, m, base, mbs_layer_kbps, mbs_max_layers, mbs_min_layers, mbs_max_layers, 0});
  return t;
}

// ---- JSON conversions for structured fields ----

void to_json(json &j, const TrafficClass &c) {
  j = json{{"kind", c.kind == TrafficKind::real_time ? "real-time" : "non-real-time"},
           {"requested_kbps", c.requested_bw},
           {"degrade_new", c.degrade_new},
           {"degrade_hand", c.degrade_hand},
           {"share", c.arrival_share},
           {"duration_s", c.duration_at_full_bw}};
}

void to_json(json &j, const FixtureSite &f) {
  j = json{{"id", f.id}, {"x", f.x}, {"y", f.y}, {"band", f.band}, {"closed", f.closed}};
  j["rssi_dbm"] = f.rssi_dbm ? json(*f.rssi_dbm) : json(nullptr);
}

namespace {

std::string line_col(const std::string &text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

void check_keys(const json &j, const std::string &path, const std::set<std::string> &allowed, const std::set<std::string> &required) {
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
  for (auto &[k, v] : j.items())
    if (!allowed.count(k)) throw ConfigError(path + "." + k + ": unknown key");
  for (const auto &k : required)
    if (!j.contains(k)) throw ConfigError(path + "." + k + ": missing required field");
}

double number_at(const json &j, const std::string &path) {
  if (!j.is_number()) throw ConfigError(path + ": expected a number");
  return j.get<double>();
}

template <class T> T get_as(const json &j, const std::string &path);

template <> double get_as<double>(const json &j, const std::string &path) { return number_at(j, path); }

template <> int get_as<int>(const json &j, const std::string &path) {
  if (!j.is_number_integer()) throw ConfigError(path + ": expected an integer");
  return j.get<int>();
}

template <> long get_as<long>(const json &j, const std::string &path) {
  if (!j.is_number_integer()) throw ConfigError(path + ": expected an integer");
  return j.get<long>();
}

template <> std::uint64_t get_as<std::uint64_t>(const json &j, const std::string &path) {
  if (!j.is_number_unsigned()) throw ConfigError(path + ": expected a non-negative integer");
  return j.get<std::uint64_t>();
}

template <> bool get_as<bool>(const json &j, const std::string &path) {
  if (!j.is_boolean()) throw ConfigError(path + ": expected true or false");
  return j.get<bool>();
}

template <> std::string get_as<std::string>(const json &j, const std::string &path) {
  if (!j.is_string()) throw ConfigError(path + ": expected a string");
  return j.get<std::string>();
}

template <> std::vector<int> get_as<std::vector<int>>(const json &j, const std::string &path) {
  if (!j.is_array()) throw ConfigError(path + ": expected a list of integers");
  std::vector<int> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(get_as<int>(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

template <> std::vector<double> get_as<std::vector<double>>(const json &j, const std::string &path) {
  if (!j.is_array()) throw ConfigError(path + ": expected a list of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number_at(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

template <> std::vector<std::vector<int>> get_as<std::vector<std::vector<int>>>(const json &j, const std::string &path) {
  if (!j.is_array()) throw ConfigError(path + ": expected a list of pairs");
  std::vector<std::vector<int>> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    auto p = get_as<std::vector<int>>(j[i], path + "[" + std::to_string(i) + "]");
    if (p.size() != 2) throw ConfigError(path + "[" + std::to_string(i) + "]: expected two ids");
    out.push_back(p);
  }
  return out;
}

template <> std::vector<TrafficClass> get_as<std::vector<TrafficClass>>(const json &j, const std::string &path) {
  if (!j.is_array()) throw ConfigError(path + ": expected a list of classes");
  std::vector<TrafficClass> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    std::string at = path + "[" + std::to_string(i) + "]";
    const json &c = j[i];
    check_keys(c, at, {"kind", "requested_kbps", "degrade_new", "degrade_hand", "share", "duration_s"}, {"kind", "requested_kbps", "share"});
    TrafficClass t;
    t.index = static_cast<int>(i) + 1;
    std::string kind = get_as<std::string>(c["kind"], at + ".kind");
    if (kind == "real-time")
      t.kind = TrafficKind::real_time;
    else if (kind == "non-real-time")
      t.kind = TrafficKind::non_real_time;
    else
      throw ConfigError(at + ".kind: expected real-time or non-real-time");
    t.requested_bw = number_at(c["requested_kbps"], at + ".requested_kbps");
    t.arrival_share = number_at(c["share"], at + ".share");
    if (c.contains("degrade_new")) t.degrade_new = number_at(c["degrade_new"], at + ".degrade_new");
    if (c.contains("degrade_hand")) t.degrade_hand = number_at(c["degrade_hand"], at + ".degrade_hand");
    if (c.contains("duration_s")) t.duration_at_full_bw = number_at(c["duration_s"], at + ".duration_s");
    out.push_back(t);
  }
  return out;
}

template <> std::vector<FixtureSite> get_as<std::vector<FixtureSite>>(const json &j, const std::string &path) {
  if (!j.is_array()) throw ConfigError(path + ": expected a list of sites");
  std::vector<FixtureSite> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    std::string at = path + "[" + std::to_string(i) + "]";
    const json &c = j[i];
    check_keys(c, at, {"id", "x", "y", "band", "rssi_dbm", "closed"}, {"id", "x", "y"});
    FixtureSite f;
    f.id = get_as<int>(c["id"], at + ".id");
    f.x = number_at(c["x"], at + ".x");
    f.y = number_at(c["y"], at + ".y");
    if (c.contains("band")) f.band = get_as<std::string>(c["band"], at + ".band");
    if (c.contains("rssi_dbm") && !c["rssi_dbm"].is_null()) f.rssi_dbm = number_at(c["rssi_dbm"], at + ".rssi_dbm");
    if (c.contains("closed")) f.closed = get_as<bool>(c["closed"], at + ".closed");
    out.push_back(f);
  }
  return out;
}

struct Field {
  std::function<void(Scenario &, const json &, const std::string &)> set;
  std::function<json(const Scenario &)> get;
};

template <class Access> Field field(Access acc) {
  using T = std::remove_reference_t<decltype(acc(std::declval<Scenario &>()))>;
  return {[acc](Scenario &s, const json &j, const std::string &path) { acc(s) = get_as<T>(j, path); },
          [acc](const Scenario &s) { return json(acc(const_cast<Scenario &>(s))); }};
}

#define FN_FIELD(path, member) {path, field([](Scenario &s) -> auto & { return s.member; })}

const std::map<std::string, Field> &registry() {
  static const std::map<std::string, Field> r = {
      FN_FIELD("seed", seed),
      FN_FIELD("trials", trials),
      FN_FIELD("radio.carrier_hz", radio.carrier_hz),
      FN_FIELD("radio.bs_height_m", radio.bs_height_m),
      FN_FIELD("radio.fap_height_m", radio.fap_height_m),
      FN_FIELD("radio.macro_tx_w", radio.macro_tx_w),
      FN_FIELD("radio.femto_tx_w", radio.femto_tx_w),
      FN_FIELD("radio.gamma_db", radio.gamma_db),
      FN_FIELD("radio.wall_loss_db", radio.wall_loss_db),
      FN_FIELD("radio.shadow_sigma_db_macro", radio.shadow_sigma_db_macro),
      FN_FIELD("radio.shadow_sigma_db_femto", radio.shadow_sigma_db_femto),
      FN_FIELD("radio.path_loss_exp_serving", radio.path_loss_exp_serving),
      FN_FIELD("radio.path_loss_exp_femto_interf", radio.path_loss_exp_femto_interf),
      FN_FIELD("radio.sir_cap_db", radio.sir_cap_db),
      FN_FIELD("radio.ue_distance_m", radio.ue_distance_m),
      FN_FIELD("topology.macro_radius_m", topology.macro_radius_m),
      FN_FIELD("topology.femto_radius_m", topology.femto_radius_m),
      FN_FIELD("topology.neighbor_threshold_m", topology.neighbor_threshold_m),
      FN_FIELD("topology.min_separation_m", topology.min_separation_m),
      FN_FIELD("topology.reference_fap_distance_m", topology.reference_fap_distance_m),
      FN_FIELD("topology.closed_fraction", topology.closed_fraction),
      FN_FIELD("topology.femto_walls", topology.femto_walls),
      FN_FIELD("topology.macro_indoor_walls", topology.macro_indoor_walls),
      FN_FIELD("spectrum.total_hz", spectrum.total_hz),
      FN_FIELD("spectrum.femto_fraction", spectrum.femto_fraction),
      FN_FIELD("spectrum.edge_fraction", spectrum.edge_fraction),
      FN_FIELD("spectrum.femto_counts", spectrum.femto_counts),
      FN_FIELD("neighbor.s_t0_dbm", neighbor.s_t0_dbm),
      FN_FIELD("neighbor.s_t1_dbm", neighbor.s_t1_dbm),
      FN_FIELD("neighbor.d_max_m", neighbor.d_max_m),
      FN_FIELD("neighbor.area_radius_m", neighbor.area_radius_m),
      FN_FIELD("neighbor.hidden_probability", neighbor.hidden_probability),
      FN_FIELD("neighbor.obstruction_loss_db", neighbor.obstruction_loss_db),
      FN_FIELD("neighbor.densities", neighbor.densities),
      FN_FIELD("two_tier.capacity_kbps", two_tier.capacity_kbps),
      FN_FIELD("two_tier.nonadaptive_kbps", two_tier.nonadaptive_kbps),
      FN_FIELD("two_tier.adaptive_max_kbps", two_tier.adaptive_max_kbps),
      FN_FIELD("two_tier.adaptive_min_kbps", two_tier.adaptive_min_kbps),
      FN_FIELD("two_tier.adaptive_share", two_tier.adaptive_share),
      FN_FIELD("two_tier.snir_t1_db", two_tier.snir_t1_db),
      FN_FIELD("two_tier.snir_t2_db", two_tier.snir_t2_db),
      FN_FIELD("two_tier.femto_count", two_tier.femto_count),
      FN_FIELD("two_tier.femto_call_limit", two_tier.femto_call_limit),
      FN_FIELD("two_tier.mean_call_s", two_tier.mean_call_s),
      FN_FIELD("two_tier.dwell_f_s", two_tier.dwell_f_s),
      FN_FIELD("two_tier.dwell_m_s", two_tier.dwell_m_s),
      FN_FIELD("two_tier.arrival_rate", two_tier.arrival_rate),
      FN_FIELD("two_tier.density_ratio", two_tier.density_ratio),
      FN_FIELD("two_tier.femto_counts", two_tier.femto_counts),
      FN_FIELD("cac.capacity_kbps", cac.capacity_kbps),
      FN_FIELD("cac.dwell_s", cac.dwell_s),
      FN_FIELD("cac.guard_fraction", cac.guard_fraction),
      FN_FIELD("cac.user_speed_kmh", cac.user_speed_kmh),
      FN_FIELD("cac.cell_radius_m", cac.cell_radius_m),
      FN_FIELD("cac.background_file_mbit", cac.background_file_mbit),
      FN_FIELD("cac.classes", cac.classes),
      FN_FIELD("cac.loads", cac.loads),
      FN_FIELD("mbs.capacity_kbps", mbs.capacity_kbps),
      FN_FIELD("mbs.voice_kbps", mbs.voice_kbps),
      FN_FIELD("mbs.unicast_max_kbps", mbs.unicast_max_kbps),
      FN_FIELD("mbs.unicast_max_layers", mbs.unicast_max_layers),
      FN_FIELD("mbs.unicast_min_layers", mbs.unicast_min_layers),
      FN_FIELD("mbs.unicast_layer_kbps", mbs.unicast_layer_kbps),
      FN_FIELD("mbs.mbs_max_kbps", mbs.mbs_max_kbps),
      FN_FIELD("mbs.mbs_min_kbps", mbs.mbs_min_kbps),
      FN_FIELD("mbs.mbs_max_layers", mbs.mbs_max_layers),
      FN_FIELD("mbs.mbs_min_layers", mbs.mbs_min_layers),
      FN_FIELD("mbs.mbs_layer_kbps", mbs.mbs_layer_kbps),
      FN_FIELD("mbs.mbs_sessions", mbs.mbs_sessions),
      FN_FIELD("mbs.back_max_kbps", mbs.back_max_kbps),
      FN_FIELD("mbs.back_min_kbps", mbs.back_min_kbps),
      FN_FIELD("mbs.xi", mbs.xi),
      FN_FIELD("mbs.xi_new", mbs.xi_new),
      FN_FIELD("mbs.mean_call_s", mbs.mean_call_s),
      FN_FIELD("mbs.dwell_s", mbs.dwell_s),
      FN_FIELD("mbs.ratio", mbs.ratio),
      FN_FIELD("mbs.loads", mbs.loads),
      FN_FIELD("popularity.capacity_mbps", popularity.capacity_mbps),
      FN_FIELD("popularity.beta_max_mbps", popularity.beta_max_mbps),
      FN_FIELD("popularity.beta_min_mbps", popularity.beta_min_mbps),
      FN_FIELD("popularity.users", popularity.users),
      FN_FIELD("popularity.mode", popularity.mode),
      FN_FIELD("popularity.session_counts", popularity.session_counts),
      FN_FIELD("fixture.femtocells", fixture.femtocells),
      FN_FIELD("fixture.serving", fixture.serving),
      FN_FIELD("fixture.ue", fixture.ue),
      FN_FIELD("fixture.coordination", fixture.coordination),
  };
  return r;
}

#undef FN_FIELD

void set_path(Scenario &s, const std::string &path, const json &v) {
  const auto &r = registry();
  auto it = r.find(path);
  if (it == r.end()) throw ConfigError(path + ": unknown key");
  it->second.set(s, v, path);
}

void apply_tree(Scenario &s, const json &j, const std::string &prefix) {
  for (auto &[k, v] : j.items()) {
    std::string path = prefix.empty() ? k : prefix + "." + k;
    if (prefix.empty() && (k == "name" || k == "preset")) continue;
    if (v.is_object())
      apply_tree(s, v, path);
    else
      set_path(s, path, v);
  }
}

json parse_json(const std::string &text, const std::string &origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error &e) {
    std::string msg = e.what();
    auto colon = msg.find("syntax error");
    throw ConfigError(origin + ": parse error at " + line_col(text, e.byte) + ": " + (colon == std::string::npos ? msg : msg.substr(colon)));
  }
}

void require(bool ok, const std::string &path, const std::string &what) {
  if (!ok) throw ConfigError(path + ": " + what);
}

} // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto &p : embedded_presets) out.push_back(p.name);
  return out;
}

Scenario preset(const std::string &name) {
  for (const auto &p : embedded_presets)
    if (name == p.name) return parse_scenario(p.text, "preset " + name);
  throw ConfigError("unknown preset '" + name + "'");
}

Scenario parse_scenario(const std::string &text, const std::string &origin) {
  json j = parse_json(text, origin);
  if (!j.is_object()) throw ConfigError(origin + ": top level must be an object");
  if (!j.contains("name")) throw ConfigError("name: missing required field");
  if (!j["name"].is_string()) throw ConfigError("name: expected a string");
  Scenario s;
  if (j.contains("preset")) {
    if (!j["preset"].is_string()) throw ConfigError("preset: expected a string");
    s = preset(j["preset"].get<std::string>());
    s.preset = j["preset"].get<std::string>();
  }
  s.name = j["name"].get<std::string>();
  apply_tree(s, j, "");
  validate(s);
  return s;
}

Scenario load_scenario(const std::string &name_or_path) {
  for (const auto &p : embedded_presets)
    if (name_or_path == p.name) return preset(name_or_path);
  std::ifstream in(name_or_path);
  if (!in) throw ConfigError("no preset or readable file named '" + name_or_path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), name_or_path);
}

void apply_override(Scenario &s, const std::string &key, const std::string &value) {
  if (key == "name") {
    s.name = value;
    return;
  }
  json v;
  try {
    v = json::parse(value);
  } catch (const json::parse_error &) {
    v = value;
  }
  if (v.is_object())
    apply_tree(s, v, key);
  else
    set_path(s, key, v);
  validate(s);
}

std::vector<std::string> scenario_keys() {
  std::vector<std::string> out{"name", "preset"};
  for (const auto &[k, f] : registry()) out.push_back(k);
  return out;
}

std::string to_json(const Scenario &s) {
  json j;
  j["name"] = s.name;
  if (!s.preset.empty()) j["preset"] = s.preset;
  for (const auto &[k, f] : registry()) j[json::json_pointer("/" + [&] {
      std::string p = k;
      for (auto &c : p)
        if (c == '.') c = '/';
      return p;
    }())] = f.get(s);
  return j.dump(2);
}

void validate(const Scenario &s) {
  require(!s.name.empty(), "name", "must not be empty");
  require(s.trials >= 0, "trials", "must be >= 0");

  const auto &r = s.radio;
  require(r.carrier_hz >= 150e6 && r.carrier_hz <= 2000e6, "radio.carrier_hz", "outside the 150-2000 MHz range of the macro model");
  require(r.bs_height_m > 0.0, "radio.bs_height_m", "must be positive");
  require(r.fap_height_m > 0.0, "radio.fap_height_m", "must be positive");
  require(r.macro_tx_w > 0.0, "radio.macro_tx_w", "must be positive");
  require(r.femto_tx_w > 0.0, "radio.femto_tx_w", "must be positive");
  require(std::isfinite(r.gamma_db), "radio.gamma_db", "must be finite");
  require(r.wall_loss_db >= 0.0, "radio.wall_loss_db", "must be >= 0");
  require(r.shadow_sigma_db_macro >= 0.0, "radio.shadow_sigma_db_macro", "must be >= 0");
  require(r.shadow_sigma_db_femto >= 0.0, "radio.shadow_sigma_db_femto", "must be >= 0");
  require(r.path_loss_exp_serving >= 2.0, "radio.path_loss_exp_serving", "must be >= 2");
  require(r.path_loss_exp_femto_interf >= 2.0, "radio.path_loss_exp_femto_interf", "must be >= 2");
  require(r.ue_distance_m > 0.0, "radio.ue_distance_m", "must be positive");

  const auto &t = s.topology;
  require(t.femto_radius_m > 0.0, "topology.femto_radius_m", "must be positive");
  require(t.macro_radius_m > t.femto_radius_m, "topology.macro_radius_m", "must exceed the femto radius");
  require(t.neighbor_threshold_m > 0.0, "topology.neighbor_threshold_m", "must be positive");
  require(t.min_separation_m >= 0.0, "topology.min_separation_m", "must be >= 0");
  require(t.reference_fap_distance_m >= 0.0 && t.reference_fap_distance_m <= t.macro_radius_m, "topology.reference_fap_distance_m", "must lie inside the macrocell");
  require(t.closed_fraction >= 0.0 && t.closed_fraction <= 1.0, "topology.closed_fraction", "must lie in [0, 1]");
  require(t.femto_walls >= 0, "topology.femto_walls", "must be >= 0");
  require(t.macro_indoor_walls >= 0, "topology.macro_indoor_walls", "must be >= 0");
  require(r.ue_distance_m <= t.femto_radius_m, "radio.ue_distance_m", "must lie inside the femtocell");

  const auto &sp = s.spectrum;
  require(sp.total_hz > 0.0, "spectrum.total_hz", "must be positive");
  require(sp.femto_fraction > 0.0 && sp.femto_fraction < 1.0, "spectrum.femto_fraction", "must lie in (0, 1)");
  require(sp.edge_fraction > 0.0 && sp.edge_fraction < 1.0, "spectrum.edge_fraction", "must lie in (0, 1)");
  for (int c : sp.femto_counts) require(c >= 1, "spectrum.femto_counts", "counts must be >= 1");

  const auto &n = s.neighbor;
  require(n.s_t1_dbm > n.s_t0_dbm, "neighbor.s_t1_dbm", "must exceed neighbor.s_t0_dbm");
  require(n.d_max_m > 0.0, "neighbor.d_max_m", "must be positive");
  require(n.area_radius_m > 0.0, "neighbor.area_radius_m", "must be positive");
  require(n.hidden_probability >= 0.0 && n.hidden_probability <= 1.0, "neighbor.hidden_probability", "must lie in [0, 1]");
  require(n.obstruction_loss_db >= 0.0, "neighbor.obstruction_loss_db", "must be >= 0");
  for (int d : n.densities) require(d >= 1, "neighbor.densities", "densities must be >= 1");

  const auto &tt = s.two_tier;
  require(tt.capacity_kbps > 0.0, "two_tier.capacity_kbps", "must be positive");
  require(tt.adaptive_max_kbps >= tt.adaptive_min_kbps && tt.adaptive_min_kbps > 0.0, "two_tier.adaptive_min_kbps", "need 0 < min <= max");
  require(tt.nonadaptive_kbps > 0.0, "two_tier.nonadaptive_kbps", "must be positive");
  require(tt.adaptive_share >= 0.0 && tt.adaptive_share <= 1.0, "two_tier.adaptive_share", "must lie in [0, 1]");
  require(tt.snir_t2_db >= tt.snir_t1_db, "two_tier.snir_t2_db", "must be >= two_tier.snir_t1_db");
  require(tt.femto_count >= 0, "two_tier.femto_count", "must be >= 0");
  require(tt.femto_call_limit >= 1, "two_tier.femto_call_limit", "must be >= 1");
  require(tt.mean_call_s > 0.0, "two_tier.mean_call_s", "must be positive");
  require(tt.dwell_f_s > 0.0, "two_tier.dwell_f_s", "must be positive");
  require(tt.dwell_m_s > 0.0, "two_tier.dwell_m_s", "must be positive");
  require(tt.arrival_rate >= 0.0, "two_tier.arrival_rate", "must be >= 0");
  require(tt.density_ratio >= 0.0, "two_tier.density_ratio", "must be >= 0");
  double cover = (t.femto_radius_m / t.macro_radius_m) * (t.femto_radius_m / t.macro_radius_m);
  for (int c : tt.femto_counts) require(c >= 0 && c * cover <= 1.0, "two_tier.femto_counts", "counts must be >= 0 and fit in the macrocell");

  const auto &c = s.cac;
  require(c.capacity_kbps > 0.0, "cac.capacity_kbps", "must be positive");
  require(c.dwell_s > 0.0, "cac.dwell_s", "must be positive");
  require(c.guard_fraction >= 0.0 && c.guard_fraction < 1.0, "cac.guard_fraction", "must lie in [0, 1)");
  require(c.user_speed_kmh > 0.0, "cac.user_speed_kmh", "must be positive");
  require(c.cell_radius_m > 0.0, "cac.cell_radius_m", "must be positive");
  require(c.background_file_mbit > 0.0, "cac.background_file_mbit", "must be positive");
  try {
    validate_classes(c.classes);
  } catch (const ConfigError &e) {
    throw ConfigError(std::string("cac.classes: ") + e.what());
  }
  for (double l : c.loads) require(l >= 0.0, "cac.loads", "loads must be >= 0");

  const auto &m = s.mbs;
  require(m.capacity_kbps > 0.0, "mbs.capacity_kbps", "must be positive");
  require(m.mbs_sessions >= 1, "mbs.mbs_sessions", "must be >= 1");
  require(m.mbs_min_layers >= 0 && m.mbs_min_layers <= m.mbs_max_layers, "mbs.mbs_min_layers", "need 0 <= min <= max layers");
  require(m.unicast_min_layers >= 0 && m.unicast_min_layers <= m.unicast_max_layers, "mbs.unicast_min_layers", "need 0 <= min <= max layers");
  require(m.mbs_layer_kbps > 0.0, "mbs.mbs_layer_kbps", "must be positive");
  require(m.unicast_layer_kbps > 0.0, "mbs.unicast_layer_kbps", "must be positive");
  require(std::abs(m.mbs_max_kbps - m.mbs_min_kbps - (m.mbs_max_layers - m.mbs_min_layers) * m.mbs_layer_kbps) < 1e-9, "mbs.mbs_max_kbps",
          "must equal mbs_min_kbps plus the enhancement layers");
  require(m.unicast_max_kbps - m.unicast_max_layers * m.unicast_layer_kbps >= 0.0, "mbs.unicast_max_kbps", "smaller than its enhancement layers");
  require(std::abs(m.back_min_kbps - (1.0 - m.xi) * m.back_max_kbps) < 1e-9, "mbs.back_min_kbps", "must equal (1 - xi) * back_max_kbps");
  require(m.xi_new >= 0.0 && m.xi_new <= m.xi && m.xi < 1.0, "mbs.xi_new", "need 0 <= xi_new <= xi < 1");
  require(m.mean_call_s > 0.0, "mbs.mean_call_s", "must be positive");
  require(m.dwell_s > 0.0, "mbs.dwell_s", "must be positive");
  require(m.ratio.size() == 3 && m.ratio[0] >= 0 && m.ratio[1] >= 0 && m.ratio[2] >= 0 && m.ratio[0] + m.ratio[1] + m.ratio[2] > 0, "mbs.ratio",
          "expected three non-negative weights (voice, unicast, background)");
  require(m.capacity_kbps >= m.mbs_sessions * m.mbs_max_kbps, "mbs.capacity_kbps", "must cover the full multicast demand");
  for (double l : m.loads) require(l >= 0.0, "mbs.loads", "loads must be >= 0");

  const auto &p = s.popularity;
  require(p.beta_min_mbps > 0.0, "popularity.beta_min_mbps", "must be positive");
  require(p.beta_max_mbps >= p.beta_min_mbps, "popularity.beta_max_mbps", "must be >= beta_min_mbps");
  require(p.capacity_mbps > 0.0, "popularity.capacity_mbps", "must be positive");
  require(p.users >= 1, "popularity.users", "must be >= 1");
  require(p.mode == "random" || p.mode == "half", "popularity.mode", "expected random or half");
  for (int M : p.session_counts) {
    require(M >= 1, "popularity.session_counts", "counts must be >= 1");
    require(M * p.beta_min_mbps <= p.capacity_mbps + 1e-9, "popularity.session_counts", "more sessions than the capacity can carry at minimum quality");
    require(M <= p.users, "popularity.session_counts", "more sessions than users");
  }

  const auto &f = s.fixture;
  require(f.ue.size() == 2, "fixture.ue", "expected [x, y]");
  std::set<int> ids;
  for (std::size_t i = 0; i < f.femtocells.size(); ++i) {
    const auto &site = f.femtocells[i];
    std::string at = "fixture.femtocells[" + std::to_string(i) + "]";
    require(ids.insert(site.id).second, at + ".id", "duplicate id");
    require(site.band == "m1" || site.band == "m2" || site.band == "m3" || site.band == "full", at + ".band", "expected m1, m2, m3 or full");
  }
  if (!f.femtocells.empty()) require(ids.count(f.serving) != 0, "fixture.serving", "not among fixture.femtocells");
  for (const auto &e : f.coordination) require(ids.count(e[0]) && ids.count(e[1]), "fixture.coordination", "unknown id in pair");
}

FixtureResult evaluate_fixture(const Scenario &s) {
  const auto &f = s.fixture;
  if (f.femtocells.empty()) throw ConfigError("fixture.femtocells: scenario has no fixture");
  CellTopology topo(s.topology.macro_radius_m, s.topology.femto_radius_m, s.topology.neighbor_threshold_m);
  for (const auto &site : f.femtocells) {
    FemtoSite fs;
    fs.id = site.id;
    fs.position = {site.x, site.y};
    fs.access = site.closed ? Access::closed : Access::open;
    topo.add_femto(fs);
  }
  SpectrumPlan plan = make_empty_plan(Scheme::static_reuse, {s.spectrum.total_hz, s.spectrum.femto_fraction, s.spectrum.edge_fraction, s.seed});
  RssiScan scan;
  scan.s_t0_dbm = s.neighbor.s_t0_dbm;
  scan.s_t1_dbm = s.neighbor.s_t1_dbm;
  for (const auto &site : f.femtocells) {
    BandId id = site.band == "m1" ? BandId::m1 : site.band == "m2" ? BandId::m2 : site.band == "m3" ? BandId::m3 : BandId::full;
    plan.femto_assignment[site.id] = {plan.partition.get(id), std::nullopt, Scheme::static_reuse};
    if (site.rssi_dbm) scan.level_dbm[site.id] = *site.rssi_dbm;
  }
  CoordinationGraph g;
  for (const auto &site : f.femtocells) g[site.id];
  for (const auto &e : f.coordination) {
    g[e[0]].insert(e[1]);
    g[e[1]].insert(e[0]);
  }
  ListContext ctx{{f.ue[0], f.ue[1]}, s.neighbor.d_max_m, {}, &g};
  FixtureResult out;
  out.list = build_list_from_femto(scan, plan, topo, f.serving, ctx);
  out.rssi_only = rssi_only_list(scan, topo, ctx, f.serving);
  return out;
}

} // namespace femtonet
