// edgecache: proactive edge-caching experiments.
//
//   edgecache storage-sweep  [--config FILE] [--set key=value ...]
//   edgecache backhaul-sweep [--config FILE] [--set key=value ...]
//   edgecache density-sweep  [--config FILE] [--set key=value ...]
//   edgecache stats          [--config FILE] [--set key=value ...] [--csv]
//   edgecache synth          [--config FILE] [--set key=value ...] [-o FILE]

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "edgecache/config.hpp"
#include "edgecache/experiments.hpp"
#include "edgecache/trace.hpp"

namespace {

using namespace edgecache;

struct CommonOptions {
  std::string config_file;
  std::vector<std::string> settings;
  std::string output_dir;
  bool serial = false;
  bool header = false;
  bool print_config = false;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("-c,--config", opts.config_file, "key=value config file")->check(CLI::ExistingFile);
  cmd->add_option("-s,--set", opts.settings, "override a config key (key=value), repeatable");
  cmd->add_flag("--print-config", opts.print_config, "print the effective config to stderr");
}

void add_sweep_flags(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("-o,--output-dir", opts.output_dir, "directory for the CSV files");
  cmd->add_flag("--serial", opts.serial, "run grid points one after another");
  cmd->add_flag("--header", opts.header, "write an x,y header line");
}

ExperimentConfig resolve(const CommonOptions& opts) {
  ExperimentConfig config;
  if (!opts.config_file.empty()) load_config_file(opts.config_file, config);
  for (const std::string& kv : opts.settings) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ParseError("--set expects key=value, got '" + kv + "'");
    apply_setting(config, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!opts.output_dir.empty()) config.output_dir = opts.output_dir;
  if (opts.header) config.csv_header = true;
  config.validate();
  if (opts.print_config) write_config(std::cerr, config);
  return config;
}

Scenario load_scenario(const ExperimentConfig& config) {
  std::cerr << "preparing trace ("
            << (config.trace_file.empty() ? std::string("synthetic") : config.trace_file) << ")\n";
  Scenario s = prepare_scenario(config);
  if (s.skipped_rows > 0) std::cerr << "skipped " << s.skipped_rows << " malformed trace rows\n";
  std::cerr << "trace: " << s.log.size() << " requests, " << s.catalog.size() << " contents, "
            << config.num_cells << " cells\n";
  return s;
}

void report(const std::vector<std::filesystem::path>& paths) {
  for (const auto& p : paths) std::cerr << "wrote " << p.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trace-driven simulator of proactive caching at cache-enabled base stations"};
  app.require_subcommand(1);

  CommonOptions storage_opts, backhaul_opts, density_opts, stats_opts, synth_opts;
  auto* storage = app.add_subcommand("storage-sweep", "satisfaction and backhaul load vs storage size");
  add_common(storage, storage_opts);
  add_sweep_flags(storage, storage_opts);
  auto* backhaul = app.add_subcommand("backhaul-sweep", "satisfaction vs backhaul/wireless capacity ratio");
  add_common(backhaul, backhaul_opts);
  add_sweep_flags(backhaul, backhaul_opts);
  auto* density = app.add_subcommand("density-sweep", "satisfaction RMSE vs CF training density");
  add_common(density, density_opts);
  add_sweep_flags(density, density_opts);

  auto* stats = app.add_subcommand("stats", "descriptive statistics of the (assigned) trace");
  add_common(stats, stats_opts);
  bool stats_csv = false;
  stats->add_flag("--csv", stats_csv, "print a CSV header and row instead of key=value lines");

  auto* synth = app.add_subcommand("synth", "write a synthetic final-traces file");
  add_common(synth, synth_opts);
  std::string synth_out;
  synth->add_option("-o,--output", synth_out, "output file (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (storage->parsed()) {
      const ExperimentConfig config = resolve(storage_opts);
      const Scenario s = load_scenario(config);
      const StorageSweep sweep =
          run_storage_sweep(s, config, storage_opts.serial ? Exec::Serial : Exec::Parallel);
      report(emit_csv(sweep.satisfaction, config.output_dir, config.csv_header));
      report(emit_csv(sweep.backhaul, config.output_dir, config.csv_header));
    } else if (backhaul->parsed()) {
      const ExperimentConfig config = resolve(backhaul_opts);
      const Scenario s = load_scenario(config);
      const SweepCurve curve =
          run_backhaul_ratio_sweep(s, config, backhaul_opts.serial ? Exec::Serial : Exec::Parallel);
      report(emit_csv(curve, config.output_dir, config.csv_header));
    } else if (density->parsed()) {
      const ExperimentConfig config = resolve(density_opts);
      const Scenario s = load_scenario(config);
      const SweepCurve curve = run_density_sweep(s, config, density_opts.serial ? Exec::Serial : Exec::Parallel);
      report(emit_csv(curve, config.output_dir, config.csv_header));
    } else if (stats->parsed()) {
      const ExperimentConfig config = resolve(stats_opts);
      const Scenario s = load_scenario(config);
      const TraceStats st = trace_stats(s.catalog, s.log, config.num_cells, s.skipped_rows);
      if (stats_csv) {
        std::cout << stats_csv_header() << '\n' << stats_csv_row(st) << '\n';
      } else {
        write_stats_kv(std::cout, st);
      }
    } else if (synth->parsed()) {
      ExperimentConfig config = resolve(synth_opts);
      SyntheticTraceParams params = config.synthetic;
      params.bitrate = config.bitrate;
      params.seed = child_seed(config.seed, SeedStream::SyntheticTrace);
      const ParsedTrace t = generate_synthetic_trace(params);
      if (synth_out.empty()) {
        write_final_traces(std::cout, t.catalog, t.log);
      } else {
        std::ofstream out(synth_out);
        if (!out) throw std::runtime_error("cannot open '" + synth_out + "' for writing");
        write_final_traces(out, t.catalog, t.log);
        if (!out) throw std::runtime_error("write failed for '" + synth_out + "'");
        std::cerr << "wrote " << t.log.size() << " requests to " << synth_out << '\n';
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "edgecache: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
