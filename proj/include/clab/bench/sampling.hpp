#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "clab/consistency/history.hpp"

namespace clab::bench {

/// Draws small sub-histories whose GETs all read from a PUT inside the same
/// sub-history (or the initial value). Such a subset keeps every legal
/// serialization of the full history legal, so a violation found in a sample
/// is a violation of the whole run.
///
/// Each sample is a window of one process's operations, optionally joined by
/// a window of a process it read from, closed under reads-from and capped at
/// `max_ops` operations.
std::vector<consistency::History> sample_subhistories(const consistency::History& h, std::size_t count,
                                                      std::size_t max_ops, std::uint64_t seed);

/// Events of `h` that belong to the given operations, in their original order.
consistency::History restrict_to(const consistency::History& h, const std::vector<consistency::OpId>& ops);

}  // namespace clab::bench
