#pragma once

#include <map>
#include <set>
#include <unordered_map>
#include <vector>

#include "clab/proto/protocol.hpp"

namespace clab::proto {

/// Ranked preference list of length N + spares. Rank r lives in datacenter
/// (h + r) mod D, so consecutive ranks alternate datacenters.
std::vector<NodeId> preference_list(Key key, const Topology& t, std::uint32_t spares);

/// Quorum replication with vector-clock versions. Coordinators write to the
/// N highest-ranked reachable nodes and answer after W acknowledgments; reads
/// collect R replies, return every causally maximal version, and repair the
/// result onto W replicas before answering.
class Dynamo final : public Protocol {
 public:
  Dynamo(SimKernel& kernel, ProtocolOptions opts, consistency::VisibilityTrace& trace);

  ProtocolKind kind() const override { return ProtocolKind::dynamo; }
  void start() override;
  void on_node(SimKernel::Delivery& d) override;
  std::unique_ptr<Session> open_session(ClientId c) override;
  void finish() override;

  /// First preference-list node the client can reach, if any.
  std::optional<NodeId> coordinator_for(ClientId c, Key key) const;
  std::vector<NodeId> preference_list(Key key) const {
    return proto::preference_list(key, opts_.topology, opts_.spares);
  }
  SimTime quorum_timeout() const { return timeout_; }

  /// Test hooks.
  const SiblingSet* replica(NodeId n, Key k) const { return nodes_[k_.index(n)].store.find(k); }
  std::size_t hints(NodeId n) const { return nodes_[k_.index(n)].hints.size(); }
  std::uint64_t hints_created() const { return hints_created_; }

 private:
  struct Hint {
    std::uint64_t id = 0;
    Key key = 0;
    Sibling version;
    NodeId intended;
    std::optional<SimTime> sent_at;
  };
  struct Assignment {
    NodeId target;
    std::optional<NodeId> hint;
  };
  struct Coordination {
    bool put = false;
    Address client;
    ClientRequest req;
    SimTime started = 0;
    std::size_t needed = 0;
    // PUT
    Sibling version;
    std::size_t acks = 0;
    // GET
    std::vector<NodeId> queried;
    std::set<NodeId> responded;
    std::size_t responses = 0;
    SiblingSet merged;
    std::map<NodeId, std::vector<Sibling>> seen;
    bool repairing = false;
    std::map<NodeId, std::size_t> repair_outstanding;
    std::size_t holders = 0;
    std::vector<Sibling> result;
  };
  struct Node {
    ChainStore<SiblingSet> store;
    ChainStore<SiblingSet> hinted;
    std::vector<Hint> hints;
    std::uint64_t counter = 0;
    std::uint64_t lamport = 0;
    std::unordered_map<std::uint64_t, Coordination> ops;
  };

  Node& node(NodeId n) { return nodes_[k_.index(n)]; }
  bool up(NodeId from, NodeId to) const;
  std::vector<Sibling> local_heads(const Node& n, Key key) const;
  std::vector<Assignment> plan(Key key, NodeId coord, std::optional<NodeId>& own_hint) const;
  void store(NodeId self, Key key, const Sibling& v, const std::optional<NodeId>& hint);
  void client_request(NodeId self, Address client, const ClientRequest& req);
  void start_put(NodeId self, std::uint64_t rid, Coordination& op);
  void start_get(NodeId self, std::uint64_t rid, Coordination& op);
  void on_write(NodeId self, Address from, const DynWrite& w);
  void on_ack(NodeId self, Address from, const DynWriteAck& a);
  void on_read_reply(NodeId self, Address from, const DynReadReply& r);
  void finish_read(NodeId self, std::uint64_t rid);
  void answer(NodeId self, std::uint64_t rid, bool ok);
  void handoff(NodeId self);

  std::vector<Node> nodes_;
  SimTime timeout_ = 0;
  std::uint64_t next_request_ = 1;
  std::uint64_t hints_created_ = 0;
};

}  // namespace clab::proto
