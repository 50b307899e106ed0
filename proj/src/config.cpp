#include "edgecache/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "edgecache/error.hpp"

namespace edgecache {

std::vector<double> ExperimentConfig::default_storage_grid() {
  std::vector<double> grid(21);
  for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = static_cast<double>(i) / 20.0;
  return grid;
}

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("config: " + what);
}

bool in_unit(double x) { return x >= 0.0 && x <= 1.0; }

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw ParseError("config: " + key + ": not a number: '" + v + "'");
  }
  if (pos != v.size()) throw ParseError("config: " + key + ": not a number: '" + v + "'");
  return x;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  unsigned long long x = 0;
  try {
    x = std::stoull(v, &pos);
  } catch (const std::exception&) {
    throw ParseError("config: " + key + ": not an integer: '" + v + "'");
  }
  if (pos != v.size() || v.front() == '-') throw ParseError("config: " + key + ": not an integer: '" + v + "'");
  return x;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ParseError("config: " + key + ": not a boolean: '" + v + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(key, trim(item)));
  if (out.empty()) throw ParseError("config: " + key + ": empty list");
  return out;
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string fmt_list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt(v[i]);
  return s;
}

}  // namespace

void ExperimentConfig::validate() const {
  require(num_cells >= 1, "num_cells must be >= 1");
  require(bitrate > 0.0, "bitrate must be > 0");
  require(backhaul_total > 0.0 && wireless_total > 0.0, "link capacities must be > 0");
  require(backhaul_total <= wireless_total, "backhaul_total must not exceed wireless_total");
  require(!storage_grid.empty(), "storage_grid must not be empty");
  require(std::all_of(storage_grid.begin(), storage_grid.end(), in_unit), "storage fractions must be in [0, 1]");
  require(in_unit(storage_fraction), "storage_fraction must be in [0, 1]");
  require(train_fraction > 0.0 && train_fraction <= 1.0, "train_fraction must be in (0, 1]");
  require(!density_grid.empty(), "density_grid must not be empty");
  require(std::all_of(density_grid.begin(), density_grid.end(), [](double d) { return d > 0.0 && d <= 1.0; }),
          "training densities must be in (0, 1]");
  require(!backhaul_ratio_grid.empty(), "backhaul_ratio_grid must not be empty");
  require(std::all_of(backhaul_ratio_grid.begin(), backhaul_ratio_grid.end(),
                      [](double r) { return r > 0.0 && r <= 1.0; }),
          "backhaul ratios must be in (0, 1]");
  require(cf.rank >= 1 && cf.epochs >= 1 && cf.learning_rate > 0.0 && cf.init_scale > 0.0 &&
              cf.regularization >= 0.0,
          "invalid CF hyperparameters");
}

double parse_byte_quantity(const std::string& text) {
  std::string s = trim(text);
  if (s.size() > 2 && s.compare(s.size() - 2, 2, "/s") == 0) s.resize(s.size() - 2);
  std::size_t split = s.size();
  while (split > 0 && std::isalpha(static_cast<unsigned char>(s[split - 1]))) --split;
  std::string unit = s.substr(split);
  std::transform(unit.begin(), unit.end(), unit.begin(), [](unsigned char c) { return std::toupper(c); });
  double scale = 1.0;
  if (unit.empty() || unit == "B") scale = 1.0;
  else if (unit == "KB") scale = 1e3;
  else if (unit == "MB") scale = 1e6;
  else if (unit == "GB") scale = 1e9;
  else if (unit == "TB") scale = 1e12;
  else throw ParseError("unknown byte unit '" + unit + "' in '" + text + "'");
  return to_double(text, trim(s.substr(0, split))) * scale;
}

void apply_setting(ExperimentConfig& c, const std::string& raw_key, const std::string& raw_value) {
  const std::string key = trim(raw_key);
  const std::string v = trim(raw_value);
  auto bytes = [&] {
    const double x = parse_byte_quantity(v);
    if (x < 0.0 || x != std::floor(x)) throw ParseError("config: " + key + ": not a whole byte count");
    return static_cast<Bytes>(x);
  };

  if (key == "trace_file") c.trace_file = v;
  else if (key == "synth.num_contents") c.synthetic.num_contents = to_u64(key, v);
  else if (key == "synth.num_requests") c.synthetic.num_requests = to_u64(key, v);
  else if (key == "synth.duration") c.synthetic.duration = to_double(key, v);
  else if (key == "synth.zipf_exponent") c.synthetic.zipf_exponent = to_double(key, v);
  else if (key == "synth.size_log_mean") c.synthetic.size_log_mean = to_double(key, v);
  else if (key == "synth.size_log_sigma") c.synthetic.size_log_sigma = to_double(key, v);
  else if (key == "min_size") c.synthetic.min_size = bytes();
  else if (key == "max_size") c.synthetic.max_size = bytes();
  else if (key == "bitrate") c.bitrate = parse_byte_quantity(v);
  else if (key == "num_cells") c.num_cells = to_u64(key, v);
  else if (key == "backhaul_total") c.backhaul_total = parse_byte_quantity(v);
  else if (key == "wireless_total") c.wireless_total = parse_byte_quantity(v);
  else if (key == "backhaul_mode") {
    if (v == "per-cell") c.backhaul_mode = BackhaulMode::PerCell;
    else if (v == "shared") c.backhaul_mode = BackhaulMode::SharedPool;
    else throw ParseError("config: backhaul_mode must be per-cell or shared");
  }
  else if (key == "storage_grid") c.storage_grid = to_list(key, v);
  else if (key == "storage_fraction") c.storage_fraction = to_double(key, v);
  else if (key == "train_fraction") c.train_fraction = to_double(key, v);
  else if (key == "density_grid") c.density_grid = to_list(key, v);
  else if (key == "backhaul_ratio_grid") c.backhaul_ratio_grid = to_list(key, v);
  else if (key == "cf.rank") c.cf.rank = to_u64(key, v);
  else if (key == "cf.regularization") c.cf.regularization = to_double(key, v);
  else if (key == "cf.learning_rate") c.cf.learning_rate = to_double(key, v);
  else if (key == "cf.epochs") c.cf.epochs = to_u64(key, v);
  else if (key == "cf.init_scale") c.cf.init_scale = to_double(key, v);
  else if (key == "cf.center_on_mean") c.cf.center_on_mean = to_bool(key, v);
  else if (key == "cf.scale_step") c.cf.scale_step = to_bool(key, v);
  else if (key == "cf.adaptive_step") c.cf.adaptive_step = to_bool(key, v);
  else if (key == "cf.estimate_scope") {
    if (v == "held-out") c.estimate_scope = EstimateScope::HeldOut;
    else if (v == "all") c.estimate_scope = EstimateScope::AllUnobserved;
    else throw ParseError("config: cf.estimate_scope must be held-out or all");
  }
  else if (key == "normalize_ratings") c.normalize_ratings = to_bool(key, v);
  else if (key == "seed") c.seed = to_u64(key, v);
  else if (key == "output_dir") c.output_dir = v;
  else if (key == "csv_header") c.csv_header = to_bool(key, v);
  else throw ParseError("config: unknown key '" + key + "'");
}

void load_config(std::istream& in, ExperimentConfig& config) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("config line " + std::to_string(lineno) + ": expected key=value");
    apply_setting(config, line.substr(0, eq), line.substr(eq + 1));
  }
}

void load_config_file(const std::string& path, ExperimentConfig& config) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file '" + path + "'");
  load_config(in, config);
}

void write_config(std::ostream& out, const ExperimentConfig& c) {
  out << "trace_file=" << c.trace_file << '\n'
      << "synth.num_contents=" << c.synthetic.num_contents << '\n'
      << "synth.num_requests=" << c.synthetic.num_requests << '\n'
      << "synth.duration=" << fmt(c.synthetic.duration) << '\n'
      << "synth.zipf_exponent=" << fmt(c.synthetic.zipf_exponent) << '\n'
      << "synth.size_log_mean=" << fmt(c.synthetic.size_log_mean) << '\n'
      << "synth.size_log_sigma=" << fmt(c.synthetic.size_log_sigma) << '\n'
      << "min_size=" << c.synthetic.min_size << '\n'
      << "max_size=" << c.synthetic.max_size << '\n'
      << "bitrate=" << fmt(c.bitrate) << '\n'
      << "num_cells=" << c.num_cells << '\n'
      << "backhaul_total=" << fmt(c.backhaul_total) << '\n'
      << "wireless_total=" << fmt(c.wireless_total) << '\n'
      << "backhaul_mode=" << (c.backhaul_mode == BackhaulMode::PerCell ? "per-cell" : "shared") << '\n'
      << "storage_grid=" << fmt_list(c.storage_grid) << '\n'
      << "storage_fraction=" << fmt(c.storage_fraction) << '\n'
      << "train_fraction=" << fmt(c.train_fraction) << '\n'
      << "density_grid=" << fmt_list(c.density_grid) << '\n'
      << "backhaul_ratio_grid=" << fmt_list(c.backhaul_ratio_grid) << '\n'
      << "cf.rank=" << c.cf.rank << '\n'
      << "cf.regularization=" << fmt(c.cf.regularization) << '\n'
      << "cf.learning_rate=" << fmt(c.cf.learning_rate) << '\n'
      << "cf.epochs=" << c.cf.epochs << '\n'
      << "cf.init_scale=" << fmt(c.cf.init_scale) << '\n'
      << "cf.center_on_mean=" << (c.cf.center_on_mean ? "true" : "false") << '\n'
      << "cf.scale_step=" << (c.cf.scale_step ? "true" : "false") << '\n'
      << "cf.adaptive_step=" << (c.cf.adaptive_step ? "true" : "false") << '\n'
      << "cf.estimate_scope=" << (c.estimate_scope == EstimateScope::HeldOut ? "held-out" : "all") << '\n'
      << "normalize_ratings=" << (c.normalize_ratings ? "true" : "false") << '\n'
      << "seed=" << c.seed << '\n'
      << "output_dir=" << c.output_dir << '\n'
      << "csv_header=" << (c.csv_header ? "true" : "false") << '\n';
}

}  // namespace edgecache
