#include "edgecache/simcore.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "edgecache/parallel.hpp"

namespace edgecache {

LinkConfig LinkConfig::from_totals(std::size_t num_cells, BytesPerSec backhaul_total, BytesPerSec wireless_total,
                                   BackhaulMode mode) {
  if (num_cells == 0) throw std::invalid_argument("LinkConfig: num_cells must be >= 1");
  const auto n = static_cast<double>(num_cells);
  LinkConfig links{num_cells, backhaul_total / n, wireless_total / n, mode};
  links.validate();
  return links;
}

void LinkConfig::validate() const {
  if (num_cells == 0) throw std::invalid_argument("LinkConfig: num_cells must be >= 1");
  if (!(backhaul_per_cell > 0.0)) throw std::invalid_argument("LinkConfig: backhaul capacity must be > 0");
  if (!(wireless_per_cell > 0.0)) throw std::invalid_argument("LinkConfig: wireless capacity must be > 0");
  if (backhaul_per_cell > wireless_per_cell)
    throw std::invalid_argument("LinkConfig: backhaul capacity must not exceed wireless capacity");
}

namespace {

struct Flow {
  std::size_t request;
  CellId cell;
  bool hit;
  double remaining;
  double rate;
  double bitrate;
  double delay;
};

// Validated inputs shared by every engine run of one simulation.
struct Prepared {
  std::vector<char> hit;  // per request
};

Prepared prepare(const RequestLog& log, const Catalog& catalog, const CachePlacement& placement,
                 const LinkConfig& links) {
  links.validate();
  if (placement.num_cells() != links.num_cells)
    throw std::invalid_argument("simulate: placement and link config disagree on the cell count");
  Prepared p;
  p.hit.resize(log.size());
  for (std::size_t i = 0; i < log.size(); ++i) {
    const Request& r = log.requests[i];
    if (!r.cell) throw std::invalid_argument("simulate: log is not assigned to cells");
    if (*r.cell >= links.num_cells) throw std::out_of_range("simulate: cell id out of range");
    if (r.content >= catalog.size()) throw std::out_of_range("simulate: content id not in the catalog");
    if (i > 0 && r.arrival < log.requests[i - 1].arrival)
      throw std::invalid_argument("simulate: requests are not sorted by arrival");
    p.hit[i] = placement.contains(*r.cell, r.content) ? 1 : 0;
  }
  return p;
}

// Runs the fluid model over `order` (request indices sorted by arrival, then
// index) and fills the matching slots of `records`.
void run_engine(const std::vector<std::size_t>& order, const RequestLog& log, const Catalog& catalog,
                const Prepared& prep, const LinkConfig& links, std::vector<DeliveryRecord>& records,
                const RateObserver& observer) {
  const bool pooled = links.mode == BackhaulMode::SharedPool;
  const double pool = links.backhaul_per_cell * static_cast<double>(links.num_cells);
  std::vector<std::uint32_t> active_at(links.num_cells, 0), misses_at(links.num_cells, 0);
  std::uint32_t misses_total = 0;
  std::vector<Flow> active;
  std::vector<ActiveFlow> view;
  std::vector<double> finish_at;

  constexpr double inf = std::numeric_limits<double>::infinity();
  std::size_t next = 0;
  double now = order.empty() ? 0.0 : log.requests[order.front()].arrival;

  while (next < order.size() || !active.empty()) {
    for (Flow& fl : active) {
      double r = std::min(fl.bitrate, links.wireless_per_cell / active_at[fl.cell]);
      if (!fl.hit) {
        const double bh = pooled ? pool / misses_total : links.backhaul_per_cell / misses_at[fl.cell];
        r = std::min(r, bh);
      }
      fl.rate = r;
    }

    finish_at.resize(active.size());
    double t_done = inf;
    for (std::size_t i = 0; i < active.size(); ++i) {
      finish_at[i] = now + active[i].remaining / active[i].rate;
      t_done = std::min(t_done, finish_at[i]);
    }
    const double t_arrive = next < order.size() ? log.requests[order[next]].arrival : inf;
    const double t_next = std::min(t_done, t_arrive);

    if (observer && !active.empty() && t_next > now) {
      view.clear();
      for (const Flow& fl : active) view.push_back(ActiveFlow{fl.request, fl.cell, fl.hit, fl.rate});
      observer(now, t_next, view);
    }

    const double dt = t_next - now;
    now = t_next;
    std::size_t kept = 0;
    for (std::size_t i = 0; i < active.size(); ++i) {
      Flow& fl = active[i];
      fl.remaining -= fl.rate * dt;
      if (fl.rate < fl.bitrate) fl.delay += dt * (1.0 - fl.rate / fl.bitrate);
      const double size = static_cast<double>(records[fl.request].size);
      if (finish_at[i] <= t_next || fl.remaining <= size * 1e-12) {
        records[fl.request].finish = now;
        records[fl.request].delivery_time = static_cast<double>(records[fl.request].size) / fl.bitrate + fl.delay;
        --active_at[fl.cell];
        if (!fl.hit) {
          --misses_at[fl.cell];
          --misses_total;
        }
      } else {
        active[kept++] = fl;
      }
    }
    active.resize(kept);

    while (next < order.size() && log.requests[order[next]].arrival <= now) {
      const std::size_t idx = order[next++];
      const Request& req = log.requests[idx];
      const Content& c = catalog[req.content];
      const bool hit = prep.hit[idx] != 0;
      DeliveryRecord& rec = records[idx];
      rec.index = idx;
      rec.cell = *req.cell;
      rec.content = req.content;
      rec.hit = hit;
      rec.start = req.arrival;
      rec.size = c.size;
      rec.bytes_over_backhaul = hit ? 0 : c.size;
      active.push_back(Flow{idx, *req.cell, hit, static_cast<double>(c.size), 0.0, c.bitrate, 0.0});
      ++active_at[*req.cell];
      if (!hit) {
        ++misses_at[*req.cell];
        ++misses_total;
      }
    }
  }
}

void finalize(SimResult& result, const Catalog& catalog) {
  std::size_t satisfied = 0;
  for (DeliveryRecord& rec : result.records) {
    const double bitrate = catalog[rec.content].bitrate;
    rec.satisfied = rec.achieved_rate() >= bitrate * (1.0 - kSatisfactionTolerance);
    satisfied += rec.satisfied ? 1 : 0;
    result.requested_bytes += rec.size;
    result.backhaul_bytes += rec.bytes_over_backhaul;
  }
  if (!result.records.empty()) {
    result.satisfaction_pct = 100.0 * static_cast<double>(satisfied) / static_cast<double>(result.records.size());
    result.backhaul_load_pct =
        100.0 * static_cast<double>(result.backhaul_bytes) / static_cast<double>(result.requested_bytes);
  }
}

}  // namespace

SimResult simulate(const RequestLog& log, const Catalog& catalog, const CachePlacement& placement,
                   const LinkConfig& links, Exec exec, const RateObserver& observer) {
  const Prepared prep = prepare(log, catalog, placement, links);
  SimResult result;
  result.records.resize(log.size());

  if (links.mode == BackhaulMode::SharedPool) {
    std::vector<std::size_t> order(log.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    run_engine(order, log, catalog, prep, links, result.records, observer);
  } else {
    std::vector<std::vector<std::size_t>> by_cell(links.num_cells);
    for (std::size_t i = 0; i < log.size(); ++i) by_cell[*log.requests[i].cell].push_back(i);
    const bool parallel = exec == Exec::Parallel && !observer;
    parallel_for(links.num_cells, parallel ? Exec::Parallel : Exec::Serial, [&](std::size_t n) {
      run_engine(by_cell[n], log, catalog, prep, links, result.records, observer);
    });
  }
  finalize(result, catalog);
  return result;
}

double satisfaction(const SimResult& result) {
  if (result.records.empty()) throw std::invalid_argument("satisfaction: empty simulation result");
  return result.satisfaction_pct;
}

double backhaul_load(const SimResult& result) {
  if (result.records.empty()) throw std::invalid_argument("backhaul_load: empty simulation result");
  return result.backhaul_load_pct;
}

double analytic_backhaul_load(const RatingMatrix& ground, const CachePlacement& placement, const Catalog& catalog) {
  if (ground.num_contents() != catalog.size() || ground.num_cells() != placement.num_cells())
    throw std::invalid_argument("analytic_backhaul_load: shape mismatch");
  Bytes total = 0, uncached = 0;
  for (const RatingEntry& e : ground.entries()) {
    const Bytes load = static_cast<Bytes>(std::llround(e.rating)) * catalog[e.content].size;
    total += load;
    if (!placement.contains(e.cell, e.content)) uncached += load;
  }
  if (total == 0) throw std::invalid_argument("analytic_backhaul_load: zero total demand");
  return 100.0 * static_cast<double>(uncached) / static_cast<double>(total);
}

void write_records_csv(std::ostream& out, const SimResult& result) {
  out << "index,cell,content,hit,start,finish,achieved_rate,satisfied\n";
  char buf[128];
  for (const DeliveryRecord& r : result.records) {
    std::snprintf(buf, sizeof buf, "%zu,%u,%u,%d,%.17g,%.17g,%.17g,%d\n", r.index, r.cell, r.content,
                  r.hit ? 1 : 0, r.start, r.finish, r.achieved_rate(), r.satisfied ? 1 : 0);
    out << buf;
  }
}

void write_summary_csv(std::ostream& out, const SimResult& result) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "satisfaction_pct,backhaul_load_pct\n%.17g,%.17g\n", result.satisfaction_pct,
                result.backhaul_load_pct);
  out << buf;
}

namespace reference {

SimResult simulate_serial(const RequestLog& log, const Catalog& catalog, const CachePlacement& placement,
                          const LinkConfig& links) {
  const Prepared prep = prepare(log, catalog, placement, links);
  SimResult result;
  result.records.resize(log.size());
  std::vector<std::size_t> order(log.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  run_engine(order, log, catalog, prep, links, result.records, {});
  finalize(result, catalog);
  return result;
}

}  // namespace reference

}  // namespace edgecache
