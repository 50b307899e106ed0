#include "edgecache/trace.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string_view>
#include <unordered_map>
#include <unordered_set>

#include "edgecache/error.hpp"
#include "edgecache/rng.hpp"

namespace edgecache {

Catalog::Catalog(std::vector<Content> contents) : contents_(std::move(contents)) {
  std::unordered_set<std::string_view> seen;
  seen.reserve(contents_.size());
  for (std::size_t i = 0; i < contents_.size(); ++i) {
    const Content& c = contents_[i];
    if (c.id != i) throw std::invalid_argument("Catalog: content ids must be 0..F-1 in order");
    if (c.size < 1) throw std::invalid_argument("Catalog: content size must be >= 1");
    if (!(c.bitrate > 0.0)) throw std::invalid_argument("Catalog: bitrate must be > 0");
    if (!seen.insert(c.uri_key).second)
      throw std::invalid_argument("Catalog: duplicate uri_key '" + c.uri_key + "'");
    total_bytes_ += c.size;
  }
}

bool RequestLog::assigned() const noexcept {
  return std::all_of(requests.begin(), requests.end(),
                     [](const Request& r) { return r.cell.has_value(); });
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

template <typename T>
std::optional<T> parse_number(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  T value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

// Real seconds, or HH:MM:SS[.frac].
std::optional<double> parse_frame_time(std::string_view s) {
  s = trim(s);
  if (s.find(':') == std::string_view::npos) {
    auto v = parse_number<double>(s);
    if (!v || !std::isfinite(*v)) return std::nullopt;
    return v;
  }
  double total = 0.0;
  int parts = 0;
  while (true) {
    const auto colon = s.find(':');
    const std::string_view piece = s.substr(0, colon);
    auto v = parse_number<double>(piece);
    if (!v || *v < 0.0) return std::nullopt;
    total = total * 60.0 + *v;
    ++parts;
    if (colon == std::string_view::npos) break;
    s.remove_prefix(colon + 1);
  }
  if (parts != 3) return std::nullopt;
  return total;
}

struct Row {
  double time;
  std::string uri;
  Bytes size;
};

std::optional<Row> parse_row(std::string_view line) {
  std::string_view fields[3];
  std::size_t count = 0;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (count == 3) return std::nullopt;
    fields[count++] = line.substr(start, comma == std::string_view::npos ? line.npos : comma - start);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (count != 3) return std::nullopt;
  const auto time = parse_frame_time(fields[0]);
  const std::string_view uri = trim(fields[1]);
  const auto size = parse_number<long long>(fields[2]);
  if (!time || uri.empty() || !size || *size <= 0) return std::nullopt;
  return Row{*time, std::string(uri), static_cast<Bytes>(*size)};
}

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

ParsedTrace parse_final_traces(std::istream& in, BytesPerSec default_bitrate) {
  if (!(default_bitrate > 0.0)) throw std::invalid_argument("parse_final_traces: bitrate must be > 0");

  std::vector<Row> rows;
  std::size_t skipped = 0;
  std::string line;
  bool first_line = true;
  while (std::getline(in, line)) {
    const std::string_view view = trim(line);
    if (view.empty()) continue;
    if (first_line) {
      first_line = false;
      const std::string_view first_field = view.substr(0, view.find(','));
      if (!parse_frame_time(first_field)) continue;  // header
    }
    if (auto row = parse_row(view)) {
      rows.push_back(std::move(*row));
    } else {
      ++skipped;
    }
  }
  if (rows.empty()) throw ParseError("final-traces input contains no valid rows");

  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& a, const Row& b) { return a.time < b.time; });
  const double t0 = rows.front().time;

  std::unordered_map<std::string, ContentId> ids;
  std::vector<Content> contents;
  ParsedTrace out;
  out.skipped_rows = skipped;
  out.log.requests.reserve(rows.size());
  for (Row& row : rows) {
    auto [it, inserted] = ids.try_emplace(row.uri, static_cast<ContentId>(contents.size()));
    if (inserted) {
      contents.push_back(Content{it->second, row.uri, row.size, default_bitrate});
    } else {
      Content& c = contents[it->second];
      c.size = std::max(c.size, row.size);
    }
    out.log.requests.push_back(Request{row.time - t0, it->second, std::nullopt});
  }
  out.log.duration = rows.back().time - t0;
  out.catalog = Catalog(std::move(contents));
  return out;
}

void write_final_traces(std::ostream& out, const Catalog& catalog, const RequestLog& log) {
  out << "FRAME-TIME,HTTP-URI,SIZE\n";
  for (const Request& r : log.requests) {
    const Content& c = catalog.at(r.content);
    out << format_real(r.arrival) << ',' << c.uri_key << ',' << c.size << '\n';
  }
}

ParsedTrace generate_synthetic_trace(const SyntheticTraceParams& p) {
  if (p.num_contents < 1) throw std::invalid_argument("synthetic trace: num_contents must be >= 1");
  if (p.num_requests < 1) throw std::invalid_argument("synthetic trace: num_requests must be >= 1");
  if (!(p.duration > 0.0)) throw std::invalid_argument("synthetic trace: duration must be > 0");
  if (!(p.zipf_exponent > 0.0)) throw std::invalid_argument("synthetic trace: zipf_exponent must be > 0");
  if (!(p.size_log_sigma >= 0.0)) throw std::invalid_argument("synthetic trace: size_log_sigma must be >= 0");
  if (p.min_size < 1 || p.min_size > p.max_size)
    throw std::invalid_argument("synthetic trace: need 1 <= min_size <= max_size");
  if (!(p.bitrate > 0.0)) throw std::invalid_argument("synthetic trace: bitrate must be > 0");

  Rng rng(p.seed);

  std::vector<Content> contents;
  contents.reserve(p.num_contents);
  const double lo = static_cast<double>(p.min_size);
  const double hi = static_cast<double>(p.max_size);
  for (std::size_t i = 0; i < p.num_contents; ++i) {
    double size;
    int attempts = 0;
    do {
      size = std::round(std::exp(p.size_log_mean + p.size_log_sigma * rng.normal()));
      // Pathological parameters (all mass outside the bounds) fall back to clamping.
      if (++attempts > 1000) size = std::clamp(size, lo, hi);
    } while (size < lo || size > hi);
    char key[32];
    std::snprintf(key, sizeof key, "synthetic/%zu", i);
    contents.push_back(Content{static_cast<ContentId>(i), key, static_cast<Bytes>(size), p.bitrate});
  }

  // Zipf CDF over ranks 1..F.
  std::vector<double> cdf(p.num_contents);
  double acc = 0.0;
  for (std::size_t r = 0; r < p.num_contents; ++r) {
    acc += std::pow(static_cast<double>(r + 1), -p.zipf_exponent);
    cdf[r] = acc;
  }
  for (double& c : cdf) c /= acc;
  cdf.back() = 1.0;

  ParsedTrace out;
  out.log.duration = p.duration;
  out.log.requests.resize(p.num_requests);
  for (Request& r : out.log.requests) {
    const double u = rng.uniform01();
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    r.content = static_cast<ContentId>(std::min<std::size_t>(it - cdf.begin(), p.num_contents - 1));
  }
  for (Request& r : out.log.requests) r.arrival = rng.uniform(0.0, p.duration);
  std::stable_sort(out.log.requests.begin(), out.log.requests.end(),
                   [](const Request& a, const Request& b) { return a.arrival < b.arrival; });
  out.catalog = Catalog(std::move(contents));
  return out;
}

RequestLog assign_requests_to_cells(const RequestLog& log, std::size_t num_cells, std::uint64_t seed) {
  if (num_cells == 0) throw std::invalid_argument("assign_requests_to_cells: num_cells must be >= 1");
  RequestLog out = log;
  Rng rng(seed);
  for (Request& r : out.requests) {
    if (r.cell) throw std::invalid_argument("assign_requests_to_cells: log is already assigned");
    r.cell = static_cast<CellId>(rng.below(num_cells));
  }
  return out;
}

TraceStats trace_stats(const Catalog& catalog, const RequestLog& log, std::size_t num_cells,
                       std::size_t skipped_rows) {
  if (num_cells == 0) throw std::invalid_argument("trace_stats: num_cells must be >= 1");
  TraceStats s;
  s.num_requests = log.size();
  s.num_contents = catalog.size();
  s.num_cells = num_cells;
  s.duration = log.duration;
  s.library_bytes = catalog.total_bytes();
  s.skipped_rows = skipped_rows;
  std::set<std::pair<CellId, ContentId>> pairs;
  for (const Request& r : log.requests) {
    if (!r.cell) throw std::invalid_argument("trace_stats: log is not assigned to cells");
    if (*r.cell >= num_cells) throw std::out_of_range("trace_stats: cell id out of range");
    s.requested_bytes += catalog.at(r.content).size;
    pairs.emplace(*r.cell, r.content);
  }
  const double cells = static_cast<double>(num_cells) * static_cast<double>(catalog.size());
  s.rating_density = cells > 0.0 ? static_cast<double>(pairs.size()) / cells : 0.0;
  return s;
}

void write_stats_kv(std::ostream& out, const TraceStats& s) {
  out << "num_requests=" << s.num_requests << '\n'
      << "num_contents=" << s.num_contents << '\n'
      << "num_cells=" << s.num_cells << '\n'
      << "duration_s=" << format_real(s.duration) << '\n'
      << "requested_bytes=" << s.requested_bytes << '\n'
      << "library_bytes=" << s.library_bytes << '\n'
      << "rating_density=" << format_real(s.rating_density) << '\n'
      << "skipped_rows=" << s.skipped_rows << '\n';
}

std::string stats_csv_header() {
  return "num_requests,num_contents,num_cells,duration_s,requested_bytes,library_bytes,rating_density,"
         "skipped_rows";
}

std::string stats_csv_row(const TraceStats& s) {
  std::ostringstream os;
  os << s.num_requests << ',' << s.num_contents << ',' << s.num_cells << ',' << format_real(s.duration)
     << ',' << s.requested_bytes << ',' << s.library_bytes << ',' << format_real(s.rating_density) << ','
     << s.skipped_rows;
  return os.str();
}

}  // namespace edgecache
