#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "clab/sim/types.hpp"

namespace clab {

/// Raised when a simulation parameter is inconsistent. `field()` names the
/// offending configuration field.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Latency and loss model. Inter-datacenter latencies come from the NTT
/// matrix; traffic inside a datacenter uses `intra_dc_latency`.
struct NetworkModel {
  std::vector<std::vector<SimTime>> ntt;  // one-way, µs
  double jitter = 0.0;                    // relative, delay *= 1 + jitter * U(-1, 1)
  SimTime intra_dc_latency = 50;
  double loss_rate = 0.0;                 // inter-datacenter links only
  std::uint64_t seed = 1;
  bool fifo_channels = true;

  static NetworkModel uniform(std::uint32_t dcs, SimTime ntt_us) {
    NetworkModel m;
    m.ntt.assign(dcs, std::vector<SimTime>(dcs, ntt_us));
    for (std::uint32_t i = 0; i < dcs; ++i) m.ntt[i][i] = 0;
    return m;
  }

  SimTime base_latency(std::uint32_t from_dc, std::uint32_t to_dc) const {
    return from_dc == to_dc ? intra_dc_latency : ntt[from_dc][to_dc];
  }

  SimTime max_ntt() const {
    SimTime m = intra_dc_latency;
    for (const auto& row : ntt)
      for (SimTime v : row) m = std::max(m, v);
    return m;
  }

  void validate(std::uint32_t dcs) const {
    if (ntt.size() != dcs) throw ConfigError("network.ntt", "matrix must be num_datacenters square");
    for (std::uint32_t i = 0; i < dcs; ++i) {
      if (ntt[i].size() != dcs) throw ConfigError("network.ntt", "matrix must be square");
      for (std::uint32_t j = 0; j < dcs; ++j) {
        if (ntt[i][j] != ntt[j][i]) throw ConfigError("network.ntt", "matrix must be symmetric");
        if (i != j && ntt[i][j] == 0) throw ConfigError("network.ntt", "latency between datacenters must be > 0");
      }
    }
    if (intra_dc_latency == 0) throw ConfigError("network.intra_dc_latency", "must be > 0");
    if (jitter < 0.0 || jitter >= 1.0) throw ConfigError("network.jitter", "must be in [0, 1)");
    if (loss_rate < 0.0 || loss_rate > 1.0) throw ConfigError("network.loss_rate", "must be in [0, 1]");
  }
};

/// Cuts every link between the listed datacenters and the rest during [start, end).
struct PartitionFault {
  std::vector<std::uint32_t> side;
  SimTime start = 0;
  SimTime end = 0;

  bool contains(std::uint32_t dc) const { return std::find(side.begin(), side.end(), dc) != side.end(); }
};

/// Node is down during [start, end); state survives the crash.
struct CrashFault {
  NodeId node;
  SimTime start = 0;
  SimTime end = 0;
};

struct FaultSchedule {
  std::vector<PartitionFault> partitions;
  std::vector<CrashFault> crashes;

  bool separated(std::uint32_t dc_a, std::uint32_t dc_b, SimTime t) const {
    if (dc_a == dc_b) return false;
    for (const auto& p : partitions) {
      if (t >= p.start && t < p.end && p.contains(dc_a) != p.contains(dc_b)) return true;
    }
    return false;
  }

  bool crashed(NodeId n, SimTime t) const {
    for (const auto& c : crashes) {
      if (c.node == n && t >= c.start && t < c.end) return true;
    }
    return false;
  }

  /// Latest end time of any fault, 0 when the schedule is empty.
  SimTime last_heal() const {
    SimTime t = 0;
    for (const auto& p : partitions) t = std::max(t, p.end);
    for (const auto& c : crashes) t = std::max(t, c.end);
    return t;
  }

  void validate(std::uint32_t dcs, std::uint32_t partitions_per_dc) const {
    for (const auto& p : partitions) {
      if (p.start >= p.end) throw ConfigError("faults.partition", "start must be < end");
      for (auto dc : p.side)
        if (dc >= dcs) throw ConfigError("faults.partition", "unknown datacenter");
    }
    for (const auto& c : crashes) {
      if (c.start >= c.end) throw ConfigError("faults.crash", "start must be < end");
      if (c.node.dc >= dcs || c.node.partition >= partitions_per_dc)
        throw ConfigError("faults.crash", "unknown node");
    }
  }
};

/// Per-node physical clocks: a seeded offset plus drift, held within
/// `max_skew` of virtual time.
struct ClockModel {
  SimTime max_skew = 0;
  double drift_ppm = 0.0;
  std::uint64_t seed = 7;
  /// Scripted offsets (µs) that replace the seeded ones for specific nodes.
  std::map<NodeId, std::int64_t> fixed_offsets;
};

}  // namespace clab
