#include "edgecache/placement.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "edgecache/parallel.hpp"

namespace edgecache {

StorageBudget StorageBudget::of_library(double fraction, Bytes library_bytes) {
  if (!(fraction >= 0.0 && fraction <= 1.0))
    throw std::invalid_argument("StorageBudget: fraction must be in [0, 1]");
  const long double raw = static_cast<long double>(fraction) * static_cast<long double>(library_bytes);
  const auto bytes = std::min<Bytes>(static_cast<Bytes>(std::floor(raw)), library_bytes);
  return StorageBudget{fraction, bytes};
}

bool CachePlacement::contains(CellId cell, ContentId content) const {
  const auto& ids = per_cell.at(cell);
  return std::binary_search(ids.begin(), ids.end(), content);
}

namespace {

void check_shape(const DenseMatrix& popularity, const Catalog& catalog) {
  if (popularity.cols() != catalog.size())
    throw std::invalid_argument("greedy_place: popularity columns do not match the catalog");
}

}  // namespace

CachePlacement greedy_place(const DenseMatrix& popularity, const Catalog& catalog, const StorageBudget& budget,
                            Exec exec) {
  check_shape(popularity, catalog);
  const std::size_t n_cells = popularity.rows();
  const std::size_t n_contents = popularity.cols();
  CachePlacement out;
  out.per_cell.resize(n_cells);
  out.bytes_used.assign(n_cells, 0);

  parallel_for(n_cells, exec, [&](std::size_t n) {
    const auto row = popularity.row(n);
    std::vector<ContentId> order(n_contents);
    std::iota(order.begin(), order.end(), ContentId{0});
    std::sort(order.begin(), order.end(), [&](ContentId a, ContentId b) {
      return row[a] != row[b] ? row[a] > row[b] : a < b;
    });
    Bytes remaining = budget.bytes;
    std::vector<ContentId>& cached = out.per_cell[n];
    for (ContentId f : order) {
      const Bytes size = catalog[f].size;
      if (size <= remaining) {
        cached.push_back(f);
        remaining -= size;
        if (remaining == 0) break;
      }
    }
    std::sort(cached.begin(), cached.end());
    out.bytes_used[n] = budget.bytes - remaining;
  });
  return out;
}

bool nestedness_check(const CachePlacement& small, const CachePlacement& large) {
  if (small.num_cells() != large.num_cells())
    throw std::invalid_argument("nestedness_check: placements cover different cell counts");
  for (std::size_t n = 0; n < small.num_cells(); ++n) {
    const auto& a = small.per_cell[n];
    const auto& b = large.per_cell[n];
    if (!std::includes(b.begin(), b.end(), a.begin(), a.end())) return false;
  }
  return true;
}

std::vector<ContentId> optimal_place_bruteforce(std::span<const double> popularity_row, const Catalog& catalog,
                                                Bytes budget_bytes, PlacementObjective objective) {
  const std::size_t n = catalog.size();
  if (n > kBruteforceMaxContents) throw std::invalid_argument("optimal_place_bruteforce: too many contents");
  if (popularity_row.size() != n) throw std::invalid_argument("optimal_place_bruteforce: row length mismatch");

  std::vector<double> weight(n);
  for (std::size_t f = 0; f < n; ++f)
    weight[f] = objective == PlacementObjective::HitCount
                    ? popularity_row[f]
                    : popularity_row[f] * static_cast<double>(catalog[static_cast<ContentId>(f)].size);

  // Bit f of the mask is content f. Reversing the bits turns "member at the
  // first difference from content 0 wins" into "larger integer wins".
  auto reversed = [n](std::uint32_t mask) {
    std::uint32_t r = 0;
    for (std::size_t f = 0; f < n; ++f)
      if (mask >> f & 1u) r |= 1u << (n - 1 - f);
    return r;
  };

  std::uint32_t best = 0;
  double best_value = 0.0;
  bool have = false;
  const std::uint32_t limit = n == 0 ? 1u : (1u << n);
  for (std::uint32_t mask = 0; mask < limit; ++mask) {
    Bytes used = 0;
    double value = 0.0;
    for (std::size_t f = 0; f < n; ++f) {
      if (mask >> f & 1u) {
        used += catalog[static_cast<ContentId>(f)].size;
        value += weight[f];
      }
    }
    if (used > budget_bytes) continue;
    if (!have || value > best_value || (value == best_value && reversed(mask) > reversed(best))) {
      best = mask;
      best_value = value;
      have = true;
    }
  }
  std::vector<ContentId> out;
  for (std::size_t f = 0; f < n; ++f)
    if (best >> f & 1u) out.push_back(static_cast<ContentId>(f));
  return out;
}

void write_placement_csv(std::ostream& out, const CachePlacement& placement) {
  for (std::size_t n = 0; n < placement.num_cells(); ++n)
    for (ContentId f : placement.per_cell[n]) out << n << ',' << f << '\n';
}

namespace reference {

CachePlacement greedy_place_serial(const DenseMatrix& popularity, const Catalog& catalog,
                                   const StorageBudget& budget) {
  check_shape(popularity, catalog);
  CachePlacement out;
  out.per_cell.resize(popularity.rows());
  out.bytes_used.assign(popularity.rows(), 0);
  for (std::size_t n = 0; n < popularity.rows(); ++n) {
    std::vector<bool> visited(popularity.cols(), false);
    Bytes remaining = budget.bytes;
    for (std::size_t step = 0; step < popularity.cols(); ++step) {
      std::size_t pick = popularity.cols();
      for (std::size_t f = 0; f < popularity.cols(); ++f) {
        if (visited[f]) continue;
        if (pick == popularity.cols() || popularity(n, f) > popularity(n, pick)) pick = f;
      }
      visited[pick] = true;
      const Bytes size = catalog[static_cast<ContentId>(pick)].size;
      if (size <= remaining) {
        out.per_cell[n].push_back(static_cast<ContentId>(pick));
        remaining -= size;
      }
    }
    std::sort(out.per_cell[n].begin(), out.per_cell[n].end());
    out.bytes_used[n] = budget.bytes - remaining;
  }
  return out;
}

}  // namespace reference

}  // namespace edgecache
