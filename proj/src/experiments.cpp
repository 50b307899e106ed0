#include "edgecache/experiments.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "edgecache/error.hpp"
#include "edgecache/parallel.hpp"
#include "edgecache/rng.hpp"

namespace edgecache {

std::uint64_t child_seed(std::uint64_t master, SeedStream stream) {
  return derive_seed(master, static_cast<std::uint64_t>(stream));
}

const std::vector<double>& SweepCurve::y(const std::string& method) const {
  for (const auto& [name, values] : series)
    if (name == method) return values;
  throw std::out_of_range("SweepCurve: no series named '" + method + "'");
}

Scenario prepare_scenario(const ExperimentConfig& config) {
  config.validate();
  Scenario s;
  if (config.trace_file.empty()) {
    SyntheticTraceParams params = config.synthetic;
    params.bitrate = config.bitrate;
    params.seed = child_seed(config.seed, SeedStream::SyntheticTrace);
    ParsedTrace t = generate_synthetic_trace(params);
    s.catalog = std::move(t.catalog);
    s.log = std::move(t.log);
  } else {
    std::ifstream in(config.trace_file);
    if (!in) throw ParseError("cannot open trace file '" + config.trace_file + "'");
    ParsedTrace t = parse_final_traces(in, config.bitrate);
    s.catalog = std::move(t.catalog);
    s.log = std::move(t.log);
    s.skipped_rows = t.skipped_rows;
  }
  s.log = assign_requests_to_cells(s.log, config.num_cells, child_seed(config.seed, SeedStream::CellAssignment));
  s.ground = build_rating_matrix(s.log, config.num_cells, s.catalog.size());
  return s;
}

namespace {

RatingMatrix rating_input(const Scenario& s, const ExperimentConfig& config) {
  return config.normalize_ratings ? normalize_per_cell(s.ground) : s.ground;
}

LinkConfig links_for(const ExperimentConfig& config, double backhaul_total) {
  return LinkConfig::from_totals(config.num_cells, backhaul_total, config.wireless_total, config.backhaul_mode);
}

// Satisfaction and backhaul load for one (popularity, storage, links) point.
std::pair<double, double> evaluate(const Scenario& s, const DenseMatrix& popularity, double storage,
                                   const LinkConfig& links, Exec exec) {
  const StorageBudget budget = StorageBudget::of_library(storage, s.catalog.total_bytes());
  const CachePlacement placement = greedy_place(popularity, s.catalog, budget, exec);
  const SimResult r = simulate(s.log, s.catalog, placement, links, exec);
  return {satisfaction(r), backhaul_load(r)};
}

std::vector<double> percent(const std::vector<double>& fractions) {
  std::vector<double> out;
  out.reserve(fractions.size());
  for (double f : fractions) out.push_back(100.0 * f);
  return out;
}

// Metrics per storage point for each popularity matrix in `methods`. Grid
// points are the parallel unit; kernels inside a point run serially. Results
// land in grid order whatever the completion order.
std::vector<std::vector<std::pair<double, double>>> storage_grid_metrics(
    const Scenario& s, const std::vector<const DenseMatrix*>& methods, const std::vector<double>& grid,
    const LinkConfig& links, Exec exec) {
  std::vector<std::vector<std::pair<double, double>>> out(methods.size(),
                                                          std::vector<std::pair<double, double>>(grid.size()));
  parallel_for(methods.size() * grid.size(), exec, [&](std::size_t j) {
    const std::size_t m = j / grid.size();
    const std::size_t g = j % grid.size();
    out[m][g] = evaluate(s, *methods[m], grid[g], links, Exec::Serial);
  });
  return out;
}

}  // namespace

DenseMatrix ground_popularity(const Scenario& scenario, const ExperimentConfig& config) {
  return to_dense(rating_input(scenario, config));
}

DenseMatrix cf_popularity(const Scenario& scenario, const ExperimentConfig& config, double train_fraction) {
  const RatingMatrix ratings = rating_input(scenario, config);
  const RatingSplit split = split_ratings(ratings, train_fraction, child_seed(config.seed, SeedStream::RatingSplit));
  if (config.estimate_scope == EstimateScope::HeldOut && split.test.empty()) return to_dense(split.train);
  CfHyperParams hyper = config.cf;
  hyper.seed = child_seed(config.seed, SeedStream::CfInit);
  const FactorModel model = train_reg_svd(split.train, hyper);
  return estimate_popularity(model, ratings, split, config.estimate_scope, Exec::Serial);
}

StorageSweep run_storage_sweep(const ExperimentConfig& config, Exec exec) {
  return run_storage_sweep(prepare_scenario(config), config, exec);
}

StorageSweep run_storage_sweep(const Scenario& s, const ExperimentConfig& config, Exec exec) {
  config.validate();
  const DenseMatrix ground = ground_popularity(s, config);
  const DenseMatrix cf = cf_popularity(s, config, config.train_fraction);
  const LinkConfig links = links_for(config, config.backhaul_total);
  const auto metrics = storage_grid_metrics(s, {&ground, &cf}, config.storage_grid, links, exec);

  StorageSweep out;
  out.satisfaction = SweepCurve{"storage-satisfaction", "Storage Size (%)", "Satisfaction (%)",
                                percent(config.storage_grid), {}};
  out.backhaul = SweepCurve{"storage-backhaul", "Storage Size (%)", "Backhaul Load (%)",
                            percent(config.storage_grid), {}};
  const char* names[] = {kGroundTruth, kCollaborativeFiltering};
  for (std::size_t m = 0; m < 2; ++m) {
    std::vector<double> sat, bh;
    for (const auto& [a, b] : metrics[m]) {
      sat.push_back(a);
      bh.push_back(b);
    }
    out.satisfaction.series.emplace_back(names[m], std::move(sat));
    out.backhaul.series.emplace_back(names[m], std::move(bh));
  }
  return out;
}

SweepCurve run_backhaul_ratio_sweep(const ExperimentConfig& config, Exec exec) {
  return run_backhaul_ratio_sweep(prepare_scenario(config), config, exec);
}

SweepCurve run_backhaul_ratio_sweep(const Scenario& s, const ExperimentConfig& config, Exec exec) {
  for (double rho : config.backhaul_ratio_grid)
    if (!(rho > 0.0 && rho <= 1.0))
      throw std::invalid_argument("backhaul ratio must be in (0, 1], got " + std::to_string(rho));
  config.validate();
  const DenseMatrix ground = ground_popularity(s, config);
  const DenseMatrix cf = cf_popularity(s, config, config.train_fraction);
  const std::vector<const DenseMatrix*> methods{&ground, &cf};
  const auto& grid = config.backhaul_ratio_grid;

  std::vector<std::vector<double>> sat(2, std::vector<double>(grid.size()));
  parallel_for(2 * grid.size(), exec, [&](std::size_t j) {
    const std::size_t m = j / grid.size();
    const std::size_t g = j % grid.size();
    const LinkConfig links = links_for(config, grid[g] * config.wireless_total);
    sat[m][g] = evaluate(s, *methods[m], config.storage_fraction, links, Exec::Serial).first;
  });

  SweepCurve out{"backhaul-satisfaction", "Normalized backhaul Capacity (%)", "Satisfaction (%)", percent(grid), {}};
  out.series.emplace_back(kGroundTruth, std::move(sat[0]));
  out.series.emplace_back(kCollaborativeFiltering, std::move(sat[1]));
  return out;
}

SweepCurve run_density_sweep(const ExperimentConfig& config, Exec exec) {
  return run_density_sweep(prepare_scenario(config), config, exec);
}

SweepCurve run_density_sweep(const Scenario& s, const ExperimentConfig& config, Exec exec) {
  config.validate();
  if (config.storage_grid.size() < 2) throw std::invalid_argument("density sweep needs at least two storage points");
  const DenseMatrix ground = ground_popularity(s, config);
  const LinkConfig links = links_for(config, config.backhaul_total);
  const auto ground_metrics = storage_grid_metrics(s, {&ground}, config.storage_grid, links, exec);
  std::vector<double> ground_sat;
  for (const auto& p : ground_metrics[0]) ground_sat.push_back(p.first);

  const auto& grid = config.density_grid;
  std::vector<double> rmse(grid.size());
  parallel_for(grid.size(), exec, [&](std::size_t g) {
    const DenseMatrix cf = cf_popularity(s, config, grid[g]);
    const auto cf_metrics = storage_grid_metrics(s, {&cf}, config.storage_grid, links, Exec::Serial);
    std::vector<double> cf_sat;
    for (const auto& p : cf_metrics[0]) cf_sat.push_back(p.first);
    rmse[g] = curve_rmse(ground_sat, cf_sat);
  });

  SweepCurve out{"density-rmse", "Training Density (%)", "RMSE", percent(grid), {}};
  out.series.emplace_back(kCollaborativeFiltering, std::move(rmse));
  return out;
}

double curve_rmse(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("curve_rmse: length mismatch");
  if (a.empty()) throw std::invalid_argument("curve_rmse: empty curves");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s / static_cast<double>(a.size()));
}

std::vector<std::filesystem::path> emit_csv(const SweepCurve& curve, const std::filesystem::path& dir, bool header) {
  if (curve.x.empty() || curve.series.empty()) throw std::invalid_argument("emit_csv: empty curve '" + curve.name + "'");
  for (const auto& [method, y] : curve.series)
    if (y.size() != curve.x.size())
      throw std::invalid_argument("emit_csv: series '" + method + "' length does not match x");

  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("emit_csv: cannot create '" + dir.string() + "': " + ec.message());

  std::vector<std::filesystem::path> written;
  char buf[64];
  for (const auto& [method, y] : curve.series) {
    const auto path = dir / (curve.name + "-" + method + ".csv");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("emit_csv: cannot open '" + path.string() + "' for writing");
    if (header) out << curve.x_label << ',' << curve.y_label << '\n';
    for (std::size_t i = 0; i < curve.x.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.6g,%.6g\n", curve.x[i], y[i]);
      out << buf;
    }
    out.close();
    if (!out) throw std::runtime_error("emit_csv: write failed for '" + path.string() + "'");
    written.push_back(path);
  }
  return written;
}

std::vector<std::pair<double, double>> read_curve_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_curve_csv: cannot open '" + path.string() + "'");
  std::vector<std::pair<double, double>> out;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    double x = 0.0, y = 0.0;
    char comma = 0;
    if (!(ls >> x >> comma >> y) || comma != ',') {
      if (first) {  // header
        first = false;
        continue;
      }
      throw ParseError("read_curve_csv: malformed line in '" + path.string() + "'");
    }
    first = false;
    out.emplace_back(x, y);
  }
  return out;
}

}  // namespace edgecache
