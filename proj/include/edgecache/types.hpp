#pragma once

#include <cstdint>

namespace edgecache {

using ContentId = std::uint32_t;
using CellId = std::uint32_t;
using Bytes = std::uint64_t;

/// Byte rates are carried as bytes per second.
using BytesPerSec = double;
using Seconds = double;

/// Kernels with a data-parallel loop accept this switch. `Serial` runs the
/// same loop body without OpenMP and is what the tests compare against.
enum class Exec { Serial, Parallel };

}  // namespace edgecache
