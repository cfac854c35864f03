#ifndef FEMTONET_HARNESS_HPP
#define FEMTONET_HARNESS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "femtonet/admission.hpp"
#include "femtonet/neighborlist.hpp"
#include "femtonet/queueing.hpp"
#include "femtonet/radio.hpp"
#include "femtonet/videoalloc.hpp"

namespace femtonet {

struct RadioSetup {
  double carrier_hz = 900e6;
  double bs_height_m = 50.0;
  double fap_height_m = 2.0;
  double macro_tx_w = 1500.0;
  double femto_tx_w = 0.01;
  double gamma_db = 9.0;
  double wall_loss_db = 20.0;
  double shadow_sigma_db_macro = 8.0;
  double shadow_sigma_db_femto = 4.0;
  double path_loss_exp_serving = 2.0;
  double path_loss_exp_femto_interf = 3.0;
  double sir_cap_db = 30.0;
  double ue_distance_m = 5.0;

  PropagationParams propagation() const;
};

struct TopologySetup {
  double macro_radius_m = 1000.0;
  double femto_radius_m = 10.0;
  double neighbor_threshold_m = 60.0;
  double min_separation_m = 2.0;
  double reference_fap_distance_m = 200.0;
  double closed_fraction = 0.0;
  int femto_walls = 1;
  int macro_indoor_walls = 1;

  MacroGeometry geometry() const;
};

struct SpectrumSetup {
  double total_hz = 10e6;
  double femto_fraction = 0.333;
  double edge_fraction = 0.6;
  std::vector<int> femto_counts{10, 50, 100, 250, 500, 1000};
};

struct NeighborSetup {
  double s_t0_dbm = -90.0;
  double s_t1_dbm = -75.0;
  double d_max_m = 40.0;
  double area_radius_m = 100.0;
  double hidden_probability = 0.3;
  double obstruction_loss_db = 30.0;
  std::vector<int> densities{5, 10, 20, 40, 80};
};

struct TwoTierSetup {
  double capacity_kbps = 6000.0;
  double nonadaptive_kbps = 64.0;
  double adaptive_max_kbps = 56.0;
  double adaptive_min_kbps = 28.0;
  double adaptive_share = 0.5;
  double snir_t1_db = 10.0;
  double snir_t2_db = 12.0;
  int femto_count = 1000;
  int femto_call_limit = 4;
  double mean_call_s = 120.0;
  double dwell_f_s = 360.0;
  double dwell_m_s = 240.0;
  // New calls per second over the whole macrocell area, before femtocells take their share.
  double arrival_rate = 1.0;
  double density_ratio = 20.0;
  std::vector<int> femto_counts{0, 100, 200, 300, 400, 500, 600, 700, 800, 900, 1000};

  TwoTierParams params(int n) const;
};

struct CacSetup {
  double capacity_kbps = 5000.0;
  double dwell_s = 240.0;
  double guard_fraction = 0.05;
  // Environment notes carried with the class table; the model does not read them.
  double user_speed_kmh = 7.5;
  double cell_radius_m = 1000.0;
  double background_file_mbit = 6.0;
  std::vector<TrafficClass> classes = table61_classes();
  std::vector<double> loads{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};

  AdaptiveQueueParams params(double lambda_new) const;
};

struct MbsSetup {
  double capacity_kbps = 20000.0;
  double voice_kbps = 64.0;
  double unicast_max_kbps = 500.0;
  int unicast_max_layers = 10;
  int unicast_min_layers = 0;
  double unicast_layer_kbps = 20.0;
  double mbs_max_kbps = 1000.0;
  double mbs_min_kbps = 500.0;
  int mbs_max_layers = 10;
  int mbs_min_layers = 0;
  double mbs_layer_kbps = 50.0;
  int mbs_sessions = 12;
  double back_max_kbps = 120.0;
  double back_min_kbps = 60.0;
  double xi = 0.5;
  double xi_new = 0.3;
  double mean_call_s = 120.0;
  double dwell_s = 540.0;
  std::vector<double> ratio{5.0, 1.0, 4.0};
  std::vector<double> loads{0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.8, 1.0, 1.2};

  MulticastTraffic traffic() const;
};

struct PopularitySetup {
  double capacity_mbps = 30.0;
  double beta_max_mbps = 2.0;
  double beta_min_mbps = 0.6;
  long users = 200;
  // "random": viewers spread at random; "half": one session holds half of them.
  std::string mode = "random";
  std::vector<int> session_counts{5, 10, 15, 20, 25, 30, 35, 40, 45, 50};
};

// Hand-placed neighbor-list scene: explicit sites, bands, scan levels and coordination.
struct FixtureSite {
  int id = 0;
  double x = 0.0;
  double y = 0.0;
  std::string band = "m3";
  std::optional<double> rssi_dbm; // empty: not detected
  bool closed = false;

  bool operator==(const FixtureSite &) const = default;
};

struct FixtureSetup {
  std::vector<FixtureSite> femtocells;
  int serving = 0;
  std::vector<double> ue{0.0, 0.0};
  std::vector<std::vector<int>> coordination; // undirected pairs
};

struct Scenario {
  std::string name;
  std::string preset;
  std::uint64_t seed = 1;
  long trials = 20;
  RadioSetup radio;
  TopologySetup topology;
  SpectrumSetup spectrum;
  NeighborSetup neighbor;
  TwoTierSetup two_tier;
  CacSetup cac;
  MbsSetup mbs;
  PopularitySetup popularity;
  FixtureSetup fixture;
};

// Presets ship as JSON files embedded at build time.
std::vector<std::string> preset_names();
Scenario preset(const std::string &name);
// Preset name or path to a JSON file.
Scenario load_scenario(const std::string &name_or_path);
Scenario parse_scenario(const std::string &text, const std::string &origin = "<string>");
// `key` is a dotted path such as radio.gamma_db; `value` is JSON or a bare string.
void apply_override(Scenario &s, const std::string &key, const std::string &value);
void validate(const Scenario &s);
std::string to_json(const Scenario &s);
std::vector<std::string> scenario_keys();

struct FixtureResult {
  NeighborList list;
  std::vector<int> rssi_only;
};

FixtureResult evaluate_fixture(const Scenario &s);

struct Row {
  std::string scenario;
  std::string scheme;
  double x = 0.0;
  std::string metric;
  double value = 0.0;
  double stderr_ = 0.0;
  std::uint64_t seed = 0;

  bool operator==(const Row &) const = default;
};

struct ExperimentResult {
  std::string experiment;
  std::string scenario;
  std::uint64_t seed = 0;
  std::string version;
  double runtime_s = 0.0;
  std::vector<Row> rows;
};

std::vector<std::string> experiment_names();
std::string default_preset(const std::string &experiment);
ExperimentResult run_experiment(const std::string &name, const Scenario &s);

std::string to_csv(const std::vector<Row> &rows);
std::vector<Row> parse_csv(const std::string &text);
std::string plot_script(const std::vector<Row> &rows, const std::string &title = "");
// Writes `text` to `path`, throwing ConfigError when the destination is unwritable.
void write_file(const std::string &path, const std::string &text);
std::string read_file(const std::string &path);

inline constexpr const char *version = "1.0.0";

} // namespace femtonet

#endif
