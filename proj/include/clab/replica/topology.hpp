#pragma once

#include <cstdint>

#include "clab/sim/network.hpp"
#include "clab/sim/types.hpp"

namespace clab {

/// Shape of a deployment. Every datacenter stores the whole key space,
/// split into `partitions_per_dc` contiguous key ranges.
struct Topology {
  std::uint32_t num_dcs = 1;
  std::uint32_t partitions_per_dc = 1;
  // Dynamo quorum parameters.
  std::uint32_t n = 3;
  std::uint32_t r = 2;
  std::uint32_t w = 2;
  /// GentleRain stabilization period.
  SimTime gst_interval = 10 * kMillisecond;
  /// Messages per simulated second each node can process; 0 is unlimited.
  std::uint64_t capacity = 50000;

  std::uint32_t num_nodes() const { return num_dcs * partitions_per_dc; }

  /// Throws ConfigError.
  void validate(bool quorum = false) const {
    if (num_dcs < 1) throw ConfigError("num_dcs", "must be at least 1");
    if (partitions_per_dc < 1) throw ConfigError("partitions_per_dc", "must be at least 1");
    if (gst_interval == 0) throw ConfigError("gst_interval", "must be positive");
    if (!quorum) return;
    if (n < 1 || n > num_nodes()) throw ConfigError("n", "must be in [1, number of nodes]");
    if (r < 1 || r > n) throw ConfigError("r", "must be in [1, n]");
    if (w < 1 || w > n) throw ConfigError("w", "must be in [1, n]");
  }
};

/// Partition index owning `key`: the 64-bit key space cut into equal ranges.
constexpr std::uint32_t partition_index(Key key, std::uint32_t partitions) {
  return static_cast<std::uint32_t>((static_cast<unsigned __int128>(key) * partitions) >> 64);
}

constexpr NodeId partition_for_key(Key key, const Topology& t, std::uint32_t dc) {
  return NodeId{dc, partition_index(key, t.partitions_per_dc)};
}

/// Smallest key of partition `p`, handy for building keys that land on a chosen node.
constexpr Key first_key_of(std::uint32_t p, std::uint32_t partitions) {
  const unsigned __int128 span = (static_cast<unsigned __int128>(1) << 64);
  return static_cast<Key>((span * p + partitions - 1) / partitions);
}

}  // namespace clab
