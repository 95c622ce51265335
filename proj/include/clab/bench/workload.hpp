#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "clab/consistency/history.hpp"
#include "clab/sim/network.hpp"
#include "clab/sim/rng.hpp"
#include "clab/sim/types.hpp"

namespace clab::bench {

using consistency::OpKind;

enum class Pattern {
  /// One GET on every partition, then one PUT on a random partition.
  read_all_write_one,
  /// `reads` GETs on random keys, then one PUT on each of `writes` distinct partitions.
  ratio,
  /// A fixed cycle of operations on named keys.
  custom,
};

enum class KeyDistribution { uniform, zipf };

std::string_view to_string(Pattern p);
std::string_view to_string(KeyDistribution d);

/// One step of a custom cycle: key `index` of partition `partition`.
struct CustomStep {
  OpKind kind = OpKind::get;
  std::uint32_t partition = 0;
  std::uint64_t index = 0;

  friend bool operator==(const CustomStep&, const CustomStep&) = default;
};

/// Parses "G0.3,P1.0" style cycles. Throws ConfigError.
std::vector<CustomStep> parse_custom(std::string_view text);
std::string format_custom(const std::vector<CustomStep>& steps);

struct WorkloadSpec {
  std::uint32_t clients_per_dc = 4;
  /// When non-zero, overrides clients_per_dc with this many clients per partition.
  std::uint32_t clients_per_partition = 0;
  Pattern pattern = Pattern::ratio;
  std::uint32_t reads = 9;
  std::uint32_t writes = 1;
  std::vector<CustomStep> custom;
  std::uint64_t keys_per_partition = 1000;
  KeyDistribution distribution = KeyDistribution::uniform;
  double zipf_theta = 0.99;
  /// 0 keeps clients busy until the end of the run.
  std::uint64_t ops_per_client = 0;
  SimTime think_time = 0;
  /// Every operation runs in a brand-new client session.
  bool fresh_session_per_op = false;
  /// Datacenters hosting clients; empty means all.
  std::vector<std::uint32_t> client_dcs;

  /// Throws ConfigError.
  void validate(std::uint32_t partitions) const;
  std::uint32_t clients_in_dc(std::uint32_t partitions) const {
    return clients_per_partition ? clients_per_partition * partitions : clients_per_dc;
  }
};

struct WorkloadOp {
  OpKind kind = OpKind::get;
  Key key = 0;

  friend bool operator==(const WorkloadOp&, const WorkloadOp&) = default;
};

/// Key number `index` inside partition `partition`.
Key workload_key(std::uint32_t partition, std::uint64_t index, std::uint32_t partitions);

/// Deterministic operation stream of one client.
class WorkloadStream {
 public:
  WorkloadStream(const WorkloadSpec& spec, std::uint32_t partitions, std::uint64_t seed);

  WorkloadOp next();

 private:
  void refill();
  std::uint64_t pick_index();

  const WorkloadSpec* spec_;
  std::uint32_t partitions_;
  Rng rng_;
  std::vector<double> zipf_cdf_;
  std::vector<WorkloadOp> round_;
  std::size_t pos_ = 0;
};

}  // namespace clab::bench
