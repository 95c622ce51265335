#pragma once

#include <map>
#include <queue>
#include <unordered_map>
#include <vector>

#include "clab/proto/protocol.hpp"

namespace clab::proto {

struct GrVersion {
  GrStamp ut;
  std::uint32_t origin_dc = 0;
  Value value = kInitialValue;
  VersionId trace_id = 0;

  std::pair<GrStamp, std::uint32_t> order() const { return {ut, origin_dc}; }
};

/// Hybrid logical clock update for a local event that must follow `observed`.
GrStamp hlc_advance(GrStamp last, SimTime physical, GrStamp observed);

/// Causal replication gated by a Global Stable Time. Remote versions are
/// readable once the serving node's GST reaches their timestamp; writes wait
/// until the local clock passes the client's dependency time (or use an HLC).
class GentleRain final : public Protocol {
 public:
  GentleRain(SimKernel& kernel, ProtocolOptions opts, consistency::VisibilityTrace& trace);

  ProtocolKind kind() const override { return ProtocolKind::gentlerain; }
  void start() override;
  void on_node(SimKernel::Delivery& d) override;
  std::unique_ptr<Session> open_session(ClientId c) override;
  void finish() override;

  /// Test hooks.
  GrStamp gst(NodeId n) const { return nodes_[k_.index(n)].gst; }
  GrStamp version_vector(NodeId n, std::uint32_t dc) const { return nodes_[k_.index(n)].vv[dc]; }
  const VersionChain<GrVersion>* chain(NodeId n, Key k) const { return nodes_[k_.index(n)].store.find(k); }
  GrStamp stamp_of(VersionId v) const { return stamps_.at(v); }
  std::uint64_t retransmissions() const { return retransmissions_; }

 private:
  struct Waiting {
    Address client;
    ClientRequest req;
    SimTime arrived = 0;
  };
  struct Outgoing {
    std::uint64_t next_seq = 1;
    std::vector<GrReplicate> sent;  // sent[seq - 1]
    SimTime last_sent = 0;
  };
  struct Incoming {
    std::uint64_t expected = 1;
    std::map<std::uint64_t, GrReplicate> buffer;
    std::optional<SimTime> last_nack;
  };
  struct Node {
    ChainStore<VersionChain<GrVersion>> store;
    std::vector<GrStamp> vv;      // latest timestamp received per datacenter
    std::vector<GrStamp> child_lst;  // latest subtree minimum per child
    std::vector<bool> child_fresh;   // child reported since this node last sent up
    GrStamp gst;
    GrStamp hlc;
    std::vector<Outgoing> out;
    std::vector<Incoming> in;
    std::unordered_map<std::uint64_t, Waiting> waiting;
    std::uint64_t next_wait = 1;
  };
  /// Omniscient per-datacenter record used for trace visibility.
  struct DcView {
    GrStamp published;
    std::priority_queue<std::pair<GrStamp, VersionId>, std::vector<std::pair<GrStamp, VersionId>>, std::greater<>>
        installed;
  };

  Node& node(NodeId n) { return nodes_[k_.index(n)]; }
  GrStamp clock_stamp(NodeId self);
  GrStamp promise(NodeId self);
  void client_request(NodeId self, Address client, const ClientRequest& req);
  void try_put(NodeId self, std::uint64_t wait_id);
  void create(NodeId self, Address client, const ClientRequest& req, SimTime arrived, GrStamp ut);
  void receive(NodeId self, std::uint32_t from_dc, const GrReplicate& msg);
  void apply(NodeId self, std::uint32_t from_dc, const GrReplicate& msg);
  void heartbeat(NodeId self);
  void heartbeat_in(NodeId self, std::uint32_t from_dc, const GrHeartbeat& hb);
  void nack(NodeId self, std::uint32_t from_dc);
  void compute_gst(NodeId self);
  void child_lst(NodeId self, std::uint32_t child, GrStamp lst);
  void report_up(NodeId self, GrStamp lst);
  std::vector<std::uint32_t> children(std::uint32_t partition) const;
  void raise_gst(NodeId self, GrStamp g);
  GrStamp local_stable_time(NodeId self);

  std::vector<Node> nodes_;
  std::vector<DcView> dcs_;
  std::vector<GrStamp> stamps_;  // by VersionId
  std::uint64_t retransmissions_ = 0;
};

}  // namespace clab::proto
