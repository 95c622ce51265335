#pragma once

#include <vector>

#include "clab/proto/protocol.hpp"

namespace clab::proto {

struct EvVersion {
  LamportStamp ver;
  Value value = kInitialValue;
  VersionId trace_id = 0;

  const LamportStamp& order() const { return ver; }
};

/// Baseline without ordering guarantees: every write is applied and exposed
/// wherever it arrives, last writer wins.
class Eventual final : public Protocol {
 public:
  Eventual(SimKernel& kernel, ProtocolOptions opts, consistency::VisibilityTrace& trace);

  ProtocolKind kind() const override { return ProtocolKind::eventual; }
  void on_node(SimKernel::Delivery& d) override;
  std::unique_ptr<Session> open_session(ClientId c) override;
  void finish() override;

 private:
  struct Node {
    LamportClock clock;
    ChainStore<VersionChain<EvVersion>> store;
  };

  Node& node(NodeId n) { return nodes_[k_.index(n)]; }

  std::vector<Node> nodes_;
};

}  // namespace clab::proto
