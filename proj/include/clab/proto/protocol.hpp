#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "clab/consistency/visibility.hpp"
#include "clab/proto/message.hpp"
#include "clab/replica/topology.hpp"

namespace clab::proto {

enum class ProtocolKind { cops, gentlerain, dynamo, eventual };

std::string_view to_string(ProtocolKind p);
std::optional<ProtocolKind> parse_protocol(std::string_view s);

enum class ClockMode { physical, hlc };

struct ProtocolOptions {
  Topology topology;
  /// COPS: reset the client context to the new version after each PUT.
  bool context_compaction = true;
  /// GentleRain.
  SimTime heartbeat_interval = 5 * kMillisecond;
  ClockMode clock_mode = ClockMode::physical;
  /// Dynamo: preference-list entries beyond the top N that may stand in for
  /// unreachable owners. 0 restricts every operation to the top N.
  std::uint32_t spares = 2;
  /// 0 selects four times the largest network travel time.
  SimTime quorum_timeout = 0;
  SimTime handoff_interval = 5 * kMillisecond;
};

/// Client library state for one client incarnation.
class Session {
 public:
  virtual ~Session() = default;
  /// Node to contact for an operation, or nullopt when none can be used.
  virtual std::optional<NodeId> target(OpKind kind, Key key) = 0;
  virtual void prepare(ClientRequest& req) = 0;
  /// Called on a successful reply only.
  virtual void absorb(const ClientRequest& req, const ClientReply& rep) = 0;
  /// Value the client reports for a GET reply (siblings are resolved here).
  virtual Value resolve(const ClientReply& rep, VersionId* chosen) const {
    if (chosen) *chosen = rep.version;
    return rep.value;
  }
};

class Protocol {
 public:
  Protocol(SimKernel& kernel, ProtocolOptions opts, consistency::VisibilityTrace& trace)
      : k_(kernel), opts_(std::move(opts)), trace_(trace) {}
  virtual ~Protocol() = default;

  virtual ProtocolKind kind() const = 0;
  /// Schedules periodic tasks; called once before the run.
  virtual void start() {}
  /// Handles a message or timer addressed to a storage node.
  virtual void on_node(SimKernel::Delivery& d) = 0;
  virtual std::unique_ptr<Session> open_session(ClientId c) = 0;
  /// Records each key's final replica heads into the trace.
  virtual void finish() = 0;

  /// Broken protocol invariants seen during the run; empty on a healthy run.
  const std::vector<std::string>& invariant_failures() const { return failures_; }
  const ProtocolOptions& options() const { return opts_; }

 protected:
  void reply(NodeId from, Address client, ClientReply r) { k_.send(Address::of(from), client, std::move(r)); }
  void fail_invariant(std::string what) {
    if (failures_.size() < 100) failures_.push_back(std::move(what));
  }
  std::uint32_t my_dc(const SimKernel::Delivery& d) const { return d.to.dc; }

  SimKernel& k_;
  ProtocolOptions opts_;
  consistency::VisibilityTrace& trace_;

 private:
  std::vector<std::string> failures_;
};

/// Throws ConfigError for inconsistent options.
std::unique_ptr<Protocol> make_protocol(ProtocolKind kind, SimKernel& kernel, const ProtocolOptions& opts,
                                        consistency::VisibilityTrace& trace);

}  // namespace clab::proto
