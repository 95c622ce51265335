#pragma once

#include <map>
#include <unordered_map>
#include <vector>

#include "clab/proto/protocol.hpp"

namespace clab::proto {

struct CopsVersion {
  LamportStamp ver;
  Value value = kInitialValue;
  VersionId trace_id = 0;

  const LamportStamp& order() const { return ver; }
};

/// Causal replication with explicit dependency contexts. A replicated write
/// becomes visible in a remote datacenter only after every entry of its
/// context has been confirmed visible there.
class Cops final : public Protocol {
 public:
  Cops(SimKernel& kernel, ProtocolOptions opts, consistency::VisibilityTrace& trace);

  ProtocolKind kind() const override { return ProtocolKind::cops; }
  void on_node(SimKernel::Delivery& d) override;
  std::unique_ptr<Session> open_session(ClientId c) override;
  void finish() override;

  /// Test hooks.
  const VersionChain<CopsVersion>* chain(NodeId n, Key k) const;
  std::size_t parked_checks(NodeId n) const;
  std::size_t pending_put_afters(NodeId n) const;

 private:
  /// Refers to a local Pending when `local`, otherwise to a RemoteCheck.
  struct Waiter {
    bool local = false;
    std::uint64_t id = 0;
  };
  struct Pending {
    CopsPutAfter msg;
    std::size_t outstanding = 0;
  };
  struct RemoteCheck {
    Address reply_to;
    std::uint64_t waiter = 0;
    std::size_t outstanding = 0;
  };
  struct Node {
    LamportClock clock;
    ChainStore<VersionChain<CopsVersion>> store;
    std::unordered_map<std::uint64_t, Pending> pending;
    std::unordered_map<std::uint64_t, RemoteCheck> checks;
    std::map<std::pair<Key, LamportStamp>, std::vector<Waiter>> parked;
    std::uint64_t next_pending = 1;
    std::uint64_t next_check = 1;
  };

  Node& node(NodeId n) { return nodes_[k_.index(n)]; }
  bool visible(const Node& n, Key key, const LamportStamp& ver) const;
  void client_request(NodeId self, Address client, const ClientRequest& req);
  void put_after(NodeId self, const CopsPutAfter& msg);
  void dep_check(NodeId self, Address from, const CopsDepCheck& msg);
  void settle(NodeId self, std::uint64_t pending_id);
  void install(NodeId self, const CopsPutAfter& msg);

  std::vector<Node> nodes_;
};

}  // namespace clab::proto
