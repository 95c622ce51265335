#include "clab/proto/eventual.hpp"

#include <set>

namespace clab::proto {
namespace {

class EventualSession final : public Session {
 public:
  EventualSession(ClientId c, const Topology& t) : client_(c), topo_(t) {}

  std::optional<NodeId> target(OpKind, Key key) override { return partition_for_key(key, topo_, client_.dc); }
  void prepare(ClientRequest&) override {}
  void absorb(const ClientRequest&, const ClientReply&) override {}

 private:
  ClientId client_;
  const Topology& topo_;
};

}  // namespace

Eventual::Eventual(SimKernel& kernel, ProtocolOptions opts, consistency::VisibilityTrace& trace)
    : Protocol(kernel, std::move(opts), trace) {
  const auto& t = opts_.topology;
  nodes_.resize(t.num_nodes());
  for (std::uint32_t dc = 0; dc < t.num_dcs; ++dc)
    for (std::uint32_t p = 0; p < t.partitions_per_dc; ++p) node({dc, p}).clock = LamportClock(NodeId{dc, p});
}

std::unique_ptr<Session> Eventual::open_session(ClientId c) {
  return std::make_unique<EventualSession>(c, opts_.topology);
}

void Eventual::on_node(SimKernel::Delivery& d) {
  const NodeId self = d.to.node();
  auto& n = node(self);
  if (auto* rep = std::get_if<EvReplicate>(&d.payload)) {
    n.clock.merge(rep->ver);
    n.store[rep->key].install(EvVersion{rep->ver, rep->value, rep->trace_id});
    trace_.mark_visible(rep->trace_id, self.dc, k_.now());
    return;
  }
  auto* req = std::get_if<ClientRequest>(&d.payload);
  if (!req) return;
  ClientReply out;
  out.op = req->op;
  if (req->kind == OpKind::get) {
    const auto* chain = n.store.find(req->key);
    if (const auto* head = chain ? chain->head() : nullptr) {
      out.value = head->value;
      out.version = head->trace_id;
    }
    reply(self, d.from, std::move(out));
    return;
  }
  const LamportStamp ver = n.clock.issue();
  const VersionId id = trace_.add_version(req->key, req->value, self, k_.now(), req->trace_deps);
  n.store[req->key].install(EvVersion{ver, req->value, id});
  out.value = req->value;
  out.version = id;
  reply(self, d.from, std::move(out));
  for (std::uint32_t dc = 0; dc < opts_.topology.num_dcs; ++dc) {
    if (dc != self.dc)
      k_.send(Address::of(self), Address::of(NodeId{dc, self.partition}), EvReplicate{req->key, req->value, ver, id});
  }
}

void Eventual::finish() {
  std::set<Key> keys;
  for (const auto& n : nodes_)
    for (const auto& [k, _] : n.store.all()) keys.insert(k);
  for (Key k : keys) {
    std::vector<consistency::ReplicaHeads> heads;
    for (std::uint32_t dc = 0; dc < opts_.topology.num_dcs; ++dc) {
      const NodeId home = partition_for_key(k, opts_.topology, dc);
      if (k_.crashed(home)) continue;  // only surviving replicas count
      consistency::ReplicaHeads h{home, {}};
      const auto* chain = node(home).store.find(k);
      if (const auto* head = chain ? chain->head() : nullptr) h.heads.push_back(head->trace_id);
      heads.push_back(std::move(h));
    }
    trace_.set_final_heads(k, std::move(heads));
  }
}

}  // namespace clab::proto
