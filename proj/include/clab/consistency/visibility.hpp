#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "clab/sim/types.hpp"

namespace clab::consistency {

using VersionId = std::uint64_t;

/// Omniscient record of one version. Visibility is tracked per datacenter:
/// in the partitioned stores every key has exactly one home node per
/// datacenter, so this is the per-node visibility of that node.
struct VersionRecord {
  VersionId id = 0;
  Key key = 0;
  Value value = kInitialValue;
  NodeId creator;
  SimTime created = 0;
  std::vector<VersionId> deps;
  std::vector<std::optional<SimTime>> visible_at;  // indexed by datacenter
};

/// Heads one replica holds for a key when the run ends.
struct ReplicaHeads {
  NodeId node;
  std::vector<VersionId> heads;  // sorted; empty means only the initial value
};

class VisibilityTrace {
 public:
  explicit VisibilityTrace(std::uint32_t num_dcs = 1) : num_dcs_(num_dcs) {}

  /// Registers a version; it is visible in the creator's datacenter at creation.
  VersionId add_version(Key key, Value value, NodeId creator, SimTime created, std::vector<VersionId> deps);

  /// Records the first time `id` becomes visible in `dc`; later calls keep the earliest.
  void mark_visible(VersionId id, std::uint32_t dc, SimTime t);

  const VersionRecord& at(VersionId id) const { return versions_.at(id - 1); }
  VersionRecord& at(VersionId id) { return versions_.at(id - 1); }
  const std::vector<VersionRecord>& versions() const { return versions_; }
  std::uint32_t num_dcs() const { return num_dcs_; }

  void set_final_heads(Key key, std::vector<ReplicaHeads> heads) { final_heads_[key] = std::move(heads); }
  const std::map<Key, std::vector<ReplicaHeads>>& final_heads() const { return final_heads_; }

  void set_end_time(SimTime t) { end_time_ = t; }
  SimTime end_time() const { return end_time_; }

 private:
  std::uint32_t num_dcs_;
  std::vector<VersionRecord> versions_;
  std::map<Key, std::vector<ReplicaHeads>> final_heads_;
  SimTime end_time_ = 0;
};

struct DependencyViolation {
  VersionId version;
  VersionId dependency;
  std::uint32_t dc;
};

struct DivergentKey {
  Key key;
  std::vector<ReplicaHeads> replicas;
};

struct TraceVerdict {
  bool satisfied = false;
  std::vector<DependencyViolation> dependency_violations;
  std::vector<DivergentKey> divergent;
  std::string reason;
};

class NotQuiesced : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Whenever a version is visible in a datacenter, each of its dependencies
/// is visible there no later. O(versions x datacenters x deps).
TraceVerdict check_dependency_visibility(const VisibilityTrace& trace);

/// Every key's surviving replicas agree on a single head by the end of the
/// trace. Throws NotQuiesced when a version was created after `quiescence`.
TraceVerdict check_eventual(const VisibilityTrace& trace, SimTime quiescence);

}  // namespace clab::consistency
