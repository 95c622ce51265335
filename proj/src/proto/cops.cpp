#include "clab/proto/cops.hpp"

#include <algorithm>
#include <set>

namespace clab::proto {
namespace {

class CopsSession final : public Session {
 public:
  CopsSession(ClientId c, const Topology& t, bool compaction) : client_(c), topo_(t), compaction_(compaction) {}

  std::optional<NodeId> target(OpKind, Key key) override { return partition_for_key(key, topo_, client_.dc); }

  void prepare(ClientRequest& req) override {
    if (req.kind == OpKind::put) req.cops_context = context_;
  }

  void absorb(const ClientRequest& req, const ClientReply& rep) override {
    if (req.kind == OpKind::put && compaction_) {
      context_.assign(1, CopsDep{req.key, rep.cops_ver});
      return;
    }
    // A set of pairs: a newer version of a key read after an own write may
    // be concurrent with it, so it cannot stand in for the older entry.
    const CopsDep dep{req.key, rep.cops_ver};
    if (std::find(context_.begin(), context_.end(), dep) == context_.end()) context_.push_back(dep);
  }

 private:
  ClientId client_;
  const Topology& topo_;
  bool compaction_;
  std::vector<CopsDep> context_;
};

}  // namespace

Cops::Cops(SimKernel& kernel, ProtocolOptions opts, consistency::VisibilityTrace& trace)
    : Protocol(kernel, std::move(opts), trace) {
  const auto& t = opts_.topology;
  nodes_.resize(t.num_nodes());
  for (std::uint32_t dc = 0; dc < t.num_dcs; ++dc)
    for (std::uint32_t p = 0; p < t.partitions_per_dc; ++p) node({dc, p}).clock = LamportClock(NodeId{dc, p});
}

std::unique_ptr<Session> Cops::open_session(ClientId c) {
  return std::make_unique<CopsSession>(c, opts_.topology, opts_.context_compaction);
}

bool Cops::visible(const Node& n, Key key, const LamportStamp& ver) const {
  if (ver.counter == 0) return true;  // initial version
  const auto* chain = n.store.find(key);
  return chain && chain->contains(ver);
}

void Cops::on_node(SimKernel::Delivery& d) {
  const NodeId self = d.to.node();
  if (auto* req = std::get_if<ClientRequest>(&d.payload)) {
    client_request(self, d.from, *req);
  } else if (auto* pa = std::get_if<CopsPutAfter>(&d.payload)) {
    put_after(self, *pa);
  } else if (auto* dc = std::get_if<CopsDepCheck>(&d.payload)) {
    dep_check(self, d.from, *dc);
  } else if (auto* dr = std::get_if<CopsDepReply>(&d.payload)) {
    auto& n = node(self);
    auto it = n.pending.find(dr->waiter);
    if (it != n.pending.end() && --it->second.outstanding == 0) settle(self, dr->waiter);
  }
}

void Cops::client_request(NodeId self, Address client, const ClientRequest& req) {
  auto& n = node(self);
  ClientReply rep;
  rep.op = req.op;
  if (req.kind == OpKind::get) {
    const auto* chain = n.store.find(req.key);
    if (const auto* head = chain ? chain->head() : nullptr) {
      rep.value = head->value;
      rep.version = head->trace_id;
      rep.cops_ver = head->ver;
    }
    reply(self, client, std::move(rep));
    return;
  }

  for (const auto& dep : req.cops_context) n.clock.merge(dep.ver);
  const LamportStamp ver = n.clock.issue();
  for (const auto& dep : req.cops_context) {
    if (!(dep.ver < ver)) fail_invariant("cops: version not above its context");
  }
  const VersionId id = trace_.add_version(req.key, req.value, self, k_.now(), req.trace_deps);
  n.store[req.key].install(CopsVersion{ver, req.value, id});
  rep.version = id;
  rep.value = req.value;
  rep.cops_ver = ver;
  reply(self, client, std::move(rep));

  for (std::uint32_t dc = 0; dc < opts_.topology.num_dcs; ++dc) {
    if (dc == self.dc) continue;
    k_.send(Address::of(self), Address::of(NodeId{dc, self.partition}),
            CopsPutAfter{req.key, req.value, req.cops_context, ver, id});
  }
}

void Cops::put_after(NodeId self, const CopsPutAfter& msg) {
  auto& n = node(self);
  n.clock.merge(msg.ver);
  const std::uint64_t id = n.next_pending++;
  std::size_t outstanding = 0;
  std::map<Key, std::vector<LamportStamp>> by_key;
  for (const auto& dep : msg.context) by_key[dep.key].push_back(dep.ver);
  for (auto& [key, vers] : by_key) {
    const NodeId home = partition_for_key(key, opts_.topology, self.dc);
    if (home == self) {
      for (const auto& ver : vers) {
        if (visible(n, key, ver)) continue;
        n.parked[{key, ver}].push_back(Waiter{true, id});
        ++outstanding;
      }
    } else {
      k_.send(Address::of(self), Address::of(home), CopsDepCheck{key, std::move(vers), id});
      ++outstanding;
    }
  }
  if (outstanding == 0) {
    install(self, msg);
  } else {
    n.pending.emplace(id, Pending{msg, outstanding});
  }
}

void Cops::dep_check(NodeId self, Address from, const CopsDepCheck& msg) {
  auto& n = node(self);
  const std::uint64_t id = n.next_check++;
  std::size_t outstanding = 0;
  for (const auto& ver : msg.vers) {
    if (visible(n, msg.key, ver)) continue;
    n.parked[{msg.key, ver}].push_back(Waiter{false, id});
    ++outstanding;
  }
  if (outstanding == 0) {
    k_.send(Address::of(self), from, CopsDepReply{msg.waiter});
  } else {
    n.checks.emplace(id, RemoteCheck{from, msg.waiter, outstanding});
  }
}

void Cops::settle(NodeId self, std::uint64_t pending_id) {
  auto& n = node(self);
  auto it = n.pending.find(pending_id);
  CopsPutAfter msg = std::move(it->second.msg);
  n.pending.erase(it);
  install(self, msg);
}

void Cops::install(NodeId self, const CopsPutAfter& msg) {
  auto& n = node(self);
  // Installing may release parked local waiters, whose installs release more.
  std::vector<CopsPutAfter> work{msg};
  while (!work.empty()) {
    CopsPutAfter m = std::move(work.back());
    work.pop_back();
    n.store[m.key].install(CopsVersion{m.ver, m.value, m.trace_id});
    trace_.mark_visible(m.trace_id, self.dc, k_.now());
    auto parked = n.parked.find({m.key, m.ver});
    if (parked == n.parked.end()) continue;
    auto waiters = std::move(parked->second);
    n.parked.erase(parked);
    for (const auto& w : waiters) {
      if (!w.local) {
        auto c = n.checks.find(w.id);
        if (c != n.checks.end() && --c->second.outstanding == 0) {
          k_.send(Address::of(self), c->second.reply_to, CopsDepReply{c->second.waiter});
          n.checks.erase(c);
        }
        continue;
      }
      auto p = n.pending.find(w.id);
      if (p != n.pending.end() && --p->second.outstanding == 0) {
        work.push_back(std::move(p->second.msg));
        n.pending.erase(p);
      }
    }
  }
}

void Cops::finish() {
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

const VersionChain<CopsVersion>* Cops::chain(NodeId n, Key k) const { return nodes_[k_.index(n)].store.find(k); }

std::size_t Cops::parked_checks(NodeId n) const {
  std::size_t total = 0;
  for (const auto& [_, w] : nodes_[k_.index(n)].parked) total += w.size();
  return total;
}

std::size_t Cops::pending_put_afters(NodeId n) const { return nodes_[k_.index(n)].pending.size(); }

}  // namespace clab::proto
