#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "clab/bench/workload.hpp"
#include "clab/consistency/history.hpp"
#include "clab/consistency/visibility.hpp"
#include "clab/proto/protocol.hpp"
#include "clab/sim/network.hpp"

namespace clab::bench {

struct ExperimentConfig {
  proto::ProtocolKind protocol = proto::ProtocolKind::cops;
  proto::ProtocolOptions options;  // includes the topology
  NetworkModel network;
  FaultSchedule faults;
  ClockModel clock;
  WorkloadSpec workload;
  /// Master seed; network, clock and workload streams are derived from it.
  std::uint64_t seed = 1;
  /// Clients issue operations in [0, duration); throughput counts completions in [warmup, duration).
  SimTime duration = 1 * kSecond;
  SimTime warmup = 0;
  /// Extra time after the load stops for replication to settle.
  SimTime drain = 1 * kSecond;
  /// 0 derives a bound from the network and the quorum timeout.
  SimTime client_timeout = 0;
  SimTime retry_backoff = 1 * kMillisecond;
  /// Dynamo: sends per operation before the client gives up on it.
  std::uint32_t max_attempts = 3;
  /// Dynamo: after the drain, read every written key from all replicas and
  /// write back one value that supersedes all siblings.
  bool reconcile = false;
  bool record_history = true;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

struct Metrics {
  double throughput = 0.0;  // completed operations per simulated second
  std::uint64_t issued = 0;
  std::uint64_t completed = 0;
  std::uint64_t timed_out = 0;
  std::uint64_t rejected = 0;     // coordinator answered with a failure
  std::uint64_t unavailable = 0;  // no reachable node to send to
  double availability = 1.0;
  std::vector<double> write_availability_by_dc;
  /// Share of successful GETs older than the newest write acknowledged before the GET was issued.
  double stale_rate = 0.0;

  std::size_t uvl_samples = 0;
  double uvl_mean = 0.0;  // µs
  double uvl_p99 = 0.0;   // µs
  std::uint64_t unreplicated = 0;

  double get_latency_mean = 0.0;  // µs
  double put_latency_mean = 0.0;  // µs
  double put_wait_mean = 0.0;     // µs spent by nodes holding PUTs back
  SimTime put_wait_max = 0;

  std::uint64_t msgs_total = 0;
  std::uint64_t msgs_put_after = 0;
  std::uint64_t msgs_dep_check = 0;
  std::uint64_t msgs_quorum = 0;
  std::uint64_t msgs_stabilization = 0;
};

struct ExperimentResult {
  Metrics metrics;
  consistency::History history;
  consistency::VisibilityTrace trace;
  /// Creation time of the last version; later events only propagate state.
  SimTime quiescence = 0;
  std::vector<std::string> invariant_failures;
  std::uint64_t digest = 0;
};

/// Runs one simulation end to end. Throws ConfigError.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// One sample per (version, remote datacenter) that became visible.
std::vector<SimTime> uvl_samples(const consistency::VisibilityTrace& trace, std::uint64_t* unreplicated = nullptr);

}  // namespace clab::bench
