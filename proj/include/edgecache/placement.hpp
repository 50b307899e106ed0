#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "edgecache/popularity.hpp"
#include "edgecache/trace.hpp"
#include "edgecache/types.hpp"

namespace edgecache {

/// Per-cell storage, identical for every cell, as a fraction of library bytes.
struct StorageBudget {
  double fraction = 0.0;
  Bytes bytes = 0;

  /// bytes = floor(fraction * library_bytes). Throws for fraction outside [0, 1].
  static StorageBudget of_library(double fraction, Bytes library_bytes);
};

struct CachePlacement {
  std::vector<std::vector<ContentId>> per_cell;  // ascending ids
  std::vector<Bytes> bytes_used;

  std::size_t num_cells() const noexcept { return per_cell.size(); }
  bool contains(CellId cell, ContentId content) const;

  bool operator==(const CachePlacement&) const = default;
};

/// Per cell: rank contents by (rating desc, id asc), walk the list and cache
/// every content that still fits, skipping those that do not.
CachePlacement greedy_place(const DenseMatrix& popularity, const Catalog& catalog, const StorageBudget& budget,
                            Exec exec = Exec::Parallel);

/// True iff every cell's cache in `small` is a subset of the one in `large`.
/// Throws std::invalid_argument when the cell counts differ.
bool nestedness_check(const CachePlacement& small, const CachePlacement& large);

enum class PlacementObjective { HitCount, OffloadBytes };

inline constexpr std::size_t kBruteforceMaxContents = 20;

/// Exhaustive maximizer over all subsets that fit in `budget_bytes`.
///
/// HitCount scores a set by its summed rating, OffloadBytes by summed
/// rating * size. Among equal scores the winner is the set whose membership
/// vector, read from content 0 upward, has a member where the other does not
/// at the first difference. Throws std::invalid_argument for more than
/// kBruteforceMaxContents contents.
std::vector<ContentId> optimal_place_bruteforce(std::span<const double> popularity_row, const Catalog& catalog,
                                                Bytes budget_bytes, PlacementObjective objective);

/// CSV rows cell,content_id (no header).
void write_placement_csv(std::ostream& out, const CachePlacement& placement);

namespace reference {

/// Straight serial greedy: selection of the next most popular uncached
/// content by linear scan, no sorting. Kept for cross-checking greedy_place.
CachePlacement greedy_place_serial(const DenseMatrix& popularity, const Catalog& catalog,
                                   const StorageBudget& budget);

}  // namespace reference

}  // namespace edgecache
