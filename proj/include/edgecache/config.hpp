#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "edgecache/error.hpp"
#include "edgecache/popularity.hpp"
#include "edgecache/simcore.hpp"
#include "edgecache/trace.hpp"

namespace edgecache {

/// Everything one experiment run needs. Defaults reproduce the operator
/// setup: 16 cells, 4 MByte/s bitrate, 3.8 MByte/s total backhaul, 120 MByte/s
/// total wireless, 30% training ratings.
struct ExperimentConfig {
  /// final-traces file; empty selects the synthetic generator.
  std::string trace_file;
  SyntheticTraceParams synthetic;
  BytesPerSec bitrate = 4e6;

  std::size_t num_cells = 16;
  BytesPerSec backhaul_total = 3.8e6;
  BytesPerSec wireless_total = 120e6;
  BackhaulMode backhaul_mode = BackhaulMode::PerCell;

  std::vector<double> storage_grid = default_storage_grid();
  /// Storage used by the backhaul-ratio sweep.
  double storage_fraction = 0.4;
  double train_fraction = 0.3;
  CfHyperParams cf;
  EstimateScope estimate_scope = EstimateScope::HeldOut;
  bool normalize_ratings = false;
  std::vector<double> density_grid{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  std::vector<double> backhaul_ratio_grid{0.01, 0.02, 0.05, 0.1, 0.25, 0.5, 1.0};

  std::uint64_t seed = 1;
  std::string output_dir = ".";
  bool csv_header = false;

  /// 0%, 5%, ..., 100%.
  static std::vector<double> default_storage_grid();

  /// Throws std::invalid_argument describing the first violated constraint.
  void validate() const;
};

/// Applies one key=value setting. Throws ParseError for an unknown key or a
/// malformed value.
void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value);

/// Reads flat key=value lines ('#' starts a comment) on top of `config`.
void load_config(std::istream& in, ExperimentConfig& config);
void load_config_file(const std::string& path, ExperimentConfig& config);

/// Writes every key in the format load_config accepts.
void write_config(std::ostream& out, const ExperimentConfig& config);

/// Byte counts with optional KB/MB/GB/TB suffix (powers of ten); rates may add "/s".
double parse_byte_quantity(const std::string& text);

}  // namespace edgecache
