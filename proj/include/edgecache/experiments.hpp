#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "edgecache/config.hpp"
#include "edgecache/placement.hpp"
#include "edgecache/popularity.hpp"
#include "edgecache/simcore.hpp"
#include "edgecache/trace.hpp"

namespace edgecache {

/// Child seed streams derived from the master seed with derive_seed().
enum class SeedStream : std::uint64_t { SyntheticTrace = 0, CellAssignment = 1, RatingSplit = 2, CfInit = 3 };

std::uint64_t child_seed(std::uint64_t master, SeedStream stream);

/// Method names used in curves and output file names.
inline constexpr const char* kGroundTruth = "ground";
inline constexpr const char* kCollaborativeFiltering = "cf";

/// Trace, cell assignment and ground-truth counts shared by every method and
/// grid point of a run.
struct Scenario {
  Catalog catalog;
  RequestLog log;  // assigned
  RatingMatrix ground;
  std::size_t skipped_rows = 0;
};

/// Loads or synthesizes the trace and assigns it to cells.
Scenario prepare_scenario(const ExperimentConfig& config);

/// Collaborative-filtering popularity from a `train_fraction` split of the
/// ground truth. With the held-out scope and nothing held out, returns the
/// ground truth without training.
DenseMatrix cf_popularity(const Scenario& scenario, const ExperimentConfig& config, double train_fraction);

/// Ground-truth popularity (optionally per-cell normalized).
DenseMatrix ground_popularity(const Scenario& scenario, const ExperimentConfig& config);

struct SweepCurve {
  std::string name;  // "{sweep}-{metric}"
  std::string x_label;
  std::string y_label;
  std::vector<double> x;
  std::vector<std::pair<std::string, std::vector<double>>> series;  // method -> y

  const std::vector<double>& y(const std::string& method) const;
};

struct StorageSweep {
  SweepCurve satisfaction;
  SweepCurve backhaul;
};

/// Satisfaction and backhaul load for each storage fraction, for both methods.
/// x is storage in percent.
StorageSweep run_storage_sweep(const ExperimentConfig& config, Exec exec = Exec::Parallel);
StorageSweep run_storage_sweep(const Scenario& scenario, const ExperimentConfig& config, Exec exec = Exec::Parallel);

/// Satisfaction against backhaul/wireless capacity ratio (x in percent) at
/// config.storage_fraction. Throws std::invalid_argument for a ratio outside (0, 1].
SweepCurve run_backhaul_ratio_sweep(const ExperimentConfig& config, Exec exec = Exec::Parallel);
SweepCurve run_backhaul_ratio_sweep(const Scenario& scenario, const ExperimentConfig& config,
                                    Exec exec = Exec::Parallel);

/// RMSE between ground-truth and CF satisfaction curves over the storage grid,
/// per training density (x in percent). Needs at least two storage points.
SweepCurve run_density_sweep(const ExperimentConfig& config, Exec exec = Exec::Parallel);
SweepCurve run_density_sweep(const Scenario& scenario, const ExperimentConfig& config, Exec exec = Exec::Parallel);

/// sqrt(mean((a_i - b_i)^2)). Throws on length mismatch or empty input.
double curve_rmse(const std::vector<double>& a, const std::vector<double>& b);

/// Writes `{dir}/{curve.name}-{method}.csv` per method: x,y rows with six
/// significant digits, optional header. Throws std::invalid_argument on an
/// empty curve and std::runtime_error (with the path) on I/O failure.
std::vector<std::filesystem::path> emit_csv(const SweepCurve& curve, const std::filesystem::path& dir,
                                            bool header = false);

/// Reads an x,y file written by emit_csv.
std::vector<std::pair<double, double>> read_curve_csv(const std::filesystem::path& path);

}  // namespace edgecache
