#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "femtonet/harness.hpp"

using namespace femtonet;

namespace {

void apply_sets(Scenario &s, const std::vector<std::string> &sets) {
  for (const auto &kv : sets) {
    auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + kv + "'");
    apply_override(s, kv.substr(0, eq), kv.substr(eq + 1));
  }
}

void output(const std::string &out, const std::string &text) {
  if (out.empty() || out == "-")
    std::cout << text;
  else
    write_file(out, text);
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Femtocell network models and experiment sweeps"};
  app.require_subcommand(1);
  app.set_version_flag("--version", version);

  auto *list = app.add_subcommand("list", "List experiments, presets and scenario keys");
  bool keys = false;
  list->add_flag("--keys", keys, "Also list every scenario key");

  auto *val = app.add_subcommand("validate", "Load and validate a scenario, then print it");
  std::string val_src;
  std::vector<std::string> val_sets;
  val->add_option("scenario", val_src, "Preset name or JSON file")->required();
  val->add_option("--set", val_sets, "Override key=value");

  auto *run = app.add_subcommand("run", "Run one experiment sweep and write CSV");
  std::string experiment, scenario_src, run_out;
  std::optional<std::uint64_t> seed;
  std::optional<long> trials;
  std::vector<std::string> run_sets;
  run->add_option("experiment", experiment, "Experiment name")->required();
  run->add_option("--scenario", scenario_src, "Preset name or JSON file (default: the experiment's preset)");
  run->add_option("--seed", seed, "Master seed");
  run->add_option("--trials", trials, "Monte Carlo trials per sweep point");
  run->add_option("--set", run_sets, "Override key=value");
  run->add_option("--out", run_out, "Output CSV path (default: stdout)");

  auto *emit = app.add_subcommand("emit", "Convert a results CSV");
  std::string emit_in, format = "csv", emit_out, title;
  emit->add_option("csv", emit_in, "Results CSV")->required();
  emit->add_option("--format", format, "csv or plot-script")->check(CLI::IsMember({"csv", "plot-script"}));
  emit->add_option("--title", title, "Plot title prefix");
  emit->add_option("--out", emit_out, "Output path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (list->parsed()) {
      std::cout << "experiments:\n";
      for (const auto &e : experiment_names()) std::cout << "  " << e << " (preset " << default_preset(e) << ")\n";
      std::cout << "presets:\n";
      for (const auto &p : preset_names()) std::cout << "  " << p << "\n";
      if (keys) {
        std::cout << "keys:\n";
        for (const auto &k : scenario_keys()) std::cout << "  " << k << "\n";
      }
    } else if (val->parsed()) {
      Scenario s = load_scenario(val_src);
      apply_sets(s, val_sets);
      validate(s);
      std::cout << to_json(s) << "\n";
    } else if (run->parsed()) {
      Scenario s = load_scenario(scenario_src.empty() ? default_preset(experiment) : scenario_src);
      if (seed) s.seed = *seed;
      if (trials) s.trials = *trials;
      apply_sets(s, run_sets);
      ExperimentResult r = run_experiment(experiment, s);
      output(run_out, to_csv(r.rows));
      std::fprintf(stderr, "%s scenario=%s seed=%llu version=%s rows=%zu runtime=%.3fs\n", r.experiment.c_str(), r.scenario.c_str(), static_cast<unsigned long long>(r.seed),
                   r.version.c_str(), r.rows.size(), r.runtime_s);
    } else if (emit->parsed()) {
      auto rows = parse_csv(read_file(emit_in));
      output(emit_out, format == "csv" ? to_csv(rows) : plot_script(rows, title));
    }
  } catch (const NonConvergence &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
