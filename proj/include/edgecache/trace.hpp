#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "edgecache/types.hpp"

namespace edgecache {

/// Default content size bounds: 1 byte to 6.024 GByte.
inline constexpr Bytes kDefaultMinSize = 1;
inline constexpr Bytes kDefaultMaxSize = 6'024'000'000ULL;

struct Content {
  ContentId id = 0;
  std::string uri_key;
  Bytes size = 1;
  BytesPerSec bitrate = 0.0;

  bool operator==(const Content&) const = default;
};

/// The content library. Ids are dense, 0..F-1, in the order of `contents`.
class Catalog {
 public:
  Catalog() = default;
  /// Validates ids, uri uniqueness, sizes and bitrates; throws std::invalid_argument.
  explicit Catalog(std::vector<Content> contents);

  std::size_t size() const noexcept { return contents_.size(); }
  bool empty() const noexcept { return contents_.empty(); }
  const Content& operator[](ContentId id) const { return contents_[id]; }
  const Content& at(ContentId id) const { return contents_.at(id); }
  const std::vector<Content>& contents() const noexcept { return contents_; }
  Bytes total_bytes() const noexcept { return total_bytes_; }

  bool operator==(const Catalog&) const = default;

 private:
  std::vector<Content> contents_;
  Bytes total_bytes_ = 0;
};

struct Request {
  Seconds arrival = 0.0;
  ContentId content = 0;
  std::optional<CellId> cell;

  bool operator==(const Request&) const = default;
};

struct RequestLog {
  std::vector<Request> requests;  // sorted by arrival
  Seconds duration = 0.0;

  std::size_t size() const noexcept { return requests.size(); }
  /// True when every request carries a cell.
  bool assigned() const noexcept;

  bool operator==(const RequestLog&) const = default;
};

struct ParsedTrace {
  Catalog catalog;
  RequestLog log;
  std::size_t skipped_rows = 0;
};

/// Reads a final-traces file: comma-separated FRAME-TIME,HTTP-URI,SIZE.
///
/// FRAME-TIME is real seconds, or a clock time HH:MM:SS[.frac]. A first line
/// whose first field is not a time is treated as a header. Rows with the wrong
/// column count, a bad time, or a SIZE that is non-numeric or <= 0 are skipped
/// and counted. Rows are stably sorted by time and rebased so the earliest
/// arrival is 0; content ids follow first appearance in that order. A URI seen
/// with different sizes keeps the largest. Throws ParseError when no row is
/// valid.
ParsedTrace parse_final_traces(std::istream& in, BytesPerSec default_bitrate);

/// Writes `log` back in final-traces format (with a header line). Parsing the
/// output reproduces the same catalog and log.
void write_final_traces(std::ostream& out, const Catalog& catalog, const RequestLog& log);

struct SyntheticTraceParams {
  std::size_t num_contents = 16419;
  std::size_t num_requests = 422529;
  Seconds duration = 6 * 3600 + 47 * 60;
  double zipf_exponent = 1.0;
  /// Log-normal size law (natural log of bytes), truncated to [min_size, max_size].
  double size_log_mean = 11.9;
  double size_log_sigma = 2.0;
  Bytes min_size = kDefaultMinSize;
  Bytes max_size = kDefaultMaxSize;
  BytesPerSec bitrate = 4e6;
  std::uint64_t seed = 1;
};

/// Zipf-popular synthetic trace. Content id r has popularity rank r+1.
/// Throws std::invalid_argument on a bad parameter set.
ParsedTrace generate_synthetic_trace(const SyntheticTraceParams& params);

/// Draws every request's cell uniformly from [0, num_cells). Throws
/// std::invalid_argument if num_cells == 0 or any request is already assigned.
RequestLog assign_requests_to_cells(const RequestLog& log, std::size_t num_cells, std::uint64_t seed);

struct TraceStats {
  std::size_t num_requests = 0;
  std::size_t num_contents = 0;
  std::size_t num_cells = 0;
  Seconds duration = 0.0;
  Bytes requested_bytes = 0;
  Bytes library_bytes = 0;
  double rating_density = 0.0;  // fraction in [0, 1]
  std::size_t skipped_rows = 0;
};

TraceStats trace_stats(const Catalog& catalog, const RequestLog& log, std::size_t num_cells,
                       std::size_t skipped_rows = 0);

/// key=value lines, one field per line.
void write_stats_kv(std::ostream& out, const TraceStats& stats);
std::string stats_csv_header();
std::string stats_csv_row(const TraceStats& stats);

}  // namespace edgecache
