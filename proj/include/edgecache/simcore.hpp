#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "edgecache/placement.hpp"
#include "edgecache/popularity.hpp"
#include "edgecache/trace.hpp"
#include "edgecache/types.hpp"

namespace edgecache {

/// Relative slack on the bitrate test for a satisfied request.
inline constexpr double kSatisfactionTolerance = 1e-9;

enum class BackhaulMode {
  /// Each cell owns an independent backhaul link of backhaul_per_cell.
  PerCell,
  /// All cells draw from one pool of num_cells * backhaul_per_cell.
  SharedPool,
};

struct LinkConfig {
  std::size_t num_cells = 16;
  BytesPerSec backhaul_per_cell = 3.8e6 / 16;
  BytesPerSec wireless_per_cell = 120e6 / 16;
  BackhaulMode mode = BackhaulMode::PerCell;

  /// Splits network totals evenly over the cells.
  static LinkConfig from_totals(std::size_t num_cells, BytesPerSec backhaul_total, BytesPerSec wireless_total,
                                BackhaulMode mode = BackhaulMode::PerCell);
  /// Throws std::invalid_argument unless num_cells >= 1 and
  /// 0 < backhaul_per_cell <= wireless_per_cell.
  void validate() const;
};

struct DeliveryRecord {
  std::size_t index = 0;
  CellId cell = 0;
  ContentId content = 0;
  bool hit = false;
  Seconds start = 0.0;
  Seconds finish = 0.0;
  Bytes size = 0;
  Bytes bytes_over_backhaul = 0;
  /// Transfer time, accumulated as size / B(f) plus the time lost to rates
  /// below B(f). Equals finish - start up to rounding, but does not lose
  /// precision to large absolute timestamps.
  Seconds delivery_time = 0.0;
  bool satisfied = false;

  double achieved_rate() const { return static_cast<double>(size) / delivery_time; }
};

struct SimResult {
  std::vector<DeliveryRecord> records;  // in request order
  Bytes requested_bytes = 0;
  Bytes backhaul_bytes = 0;
  double satisfaction_pct = 0.0;
  double backhaul_load_pct = 0.0;
};

/// One transfer in progress, as seen by a RateObserver.
struct ActiveFlow {
  std::size_t request = 0;
  CellId cell = 0;
  bool hit = false;
  double rate = 0.0;
};

/// Called once per constant-rate interval [begin, end) with every active flow.
using RateObserver = std::function<void(Seconds begin, Seconds end, std::span<const ActiveFlow>)>;

/// Event-driven fluid processor sharing.
///
/// Every request starts at its arrival. While active at cell n it runs at
///   min(B(f), C'_n / active(n))                      for a cache hit,
///   min(B(f), C'_n / active(n), C_n / misses(n))     for a miss,
/// with rates recomputed at each arrival and completion. In SharedPool mode
/// the backhaul term is N*C_n over the misses of all cells. A request is
/// satisfied when its average rate size / delivery_time is at least
/// B(f) (1 - kSatisfactionTolerance).
///
/// In PerCell mode cells are independent and run concurrently unless
/// exec == Exec::Serial. An observer forces serial execution.
SimResult simulate(const RequestLog& log, const Catalog& catalog, const CachePlacement& placement,
                   const LinkConfig& links, Exec exec = Exec::Parallel, const RateObserver& observer = {});

/// Percent of requests delivered at their bitrate. Throws on an empty result.
double satisfaction(const SimResult& result);
/// Percent of requested bytes carried over the backhaul. Throws on an empty result.
double backhaul_load(const SimResult& result);

/// Closed form: 100 * sum over uncached (n,f) of count * L(f) / sum over all
/// (n,f) of count * L(f). Ratings must be request counts. Throws
/// std::invalid_argument on zero demand or mismatched shapes.
double analytic_backhaul_load(const RatingMatrix& ground, const CachePlacement& placement, const Catalog& catalog);

/// index,cell,content,hit,start,finish,achieved_rate,satisfied (with header).
void write_records_csv(std::ostream& out, const SimResult& result);
/// satisfaction_pct,backhaul_load_pct (with header).
void write_summary_csv(std::ostream& out, const SimResult& result);

namespace reference {

/// Single event loop over all cells at once, never partitioned or threaded.
SimResult simulate_serial(const RequestLog& log, const Catalog& catalog, const CachePlacement& placement,
                          const LinkConfig& links);

}  // namespace reference

}  // namespace edgecache
