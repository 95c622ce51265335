#include "clab/proto/dynamo.hpp"

#include <algorithm>

namespace clab::proto {
namespace {

std::uint64_t mix(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class DynamoSession final : public Session {
 public:
  DynamoSession(ClientId c, const Dynamo& proto) : client_(c), proto_(proto) {}

  std::optional<NodeId> target(OpKind, Key key) override { return proto_.coordinator_for(client_, key); }

  void prepare(ClientRequest& req) override {
    if (req.kind == OpKind::put) {
      auto it = context_.find(req.key);
      if (it != context_.end()) req.dyn_context = it->second;
    }
    req.dyn_stamp = stamp_;
  }

  void absorb(const ClientRequest& req, const ClientReply& rep) override {
    context_[req.key] = rep.dyn_context;
    for (const auto& s : rep.siblings) stamp_ = std::max(stamp_, s.stamp);
  }

  Value resolve(const ClientReply& rep, VersionId* chosen) const override {
    if (rep.siblings.empty()) {
      if (chosen) *chosen = rep.version;
      return rep.value;
    }
    // Semantic reconciliation: the sibling with the largest session stamp wins.
    const auto best = std::max_element(rep.siblings.begin(), rep.siblings.end(), [](const auto& a, const auto& b) {
      return std::tie(a.stamp, a.value) < std::tie(b.stamp, b.value);
    });
    if (chosen) *chosen = best->trace_id;
    return best->value;
  }

 private:
  ClientId client_;
  const Dynamo& proto_;
  std::map<Key, VectorClock> context_;
  std::uint64_t stamp_ = 0;
};

DynSibling to_client(const Sibling& s) { return {s.value, s.trace_id, s.stamp}; }

}  // namespace

std::vector<NodeId> preference_list(Key key, const Topology& t, std::uint32_t spares) {
  const std::uint64_t h = mix(key);
  const std::uint32_t len = t.n + spares;
  std::vector<NodeId> out;
  out.reserve(len);
  for (std::uint32_t r = 0; r < len; ++r) {
    const auto dc = static_cast<std::uint32_t>((h + r) % t.num_dcs);
    const auto part = static_cast<std::uint32_t>((h / t.num_dcs + r / t.num_dcs) % t.partitions_per_dc);
    out.push_back(NodeId{dc, part});
  }
  return out;
}

Dynamo::Dynamo(SimKernel& kernel, ProtocolOptions opts, consistency::VisibilityTrace& trace)
    : Protocol(kernel, std::move(opts), trace) {
  const auto& t = opts_.topology;
  t.validate(true);
  if (t.n + opts_.spares > t.num_nodes()) throw ConfigError("spares", "n + spares exceeds the number of nodes");
  nodes_.resize(t.num_nodes());
  timeout_ = opts_.quorum_timeout;
  if (timeout_ == 0) timeout_ = std::max<SimTime>(4 * k_.config().network.max_ntt(), 10 * kMillisecond);
}

std::unique_ptr<Session> Dynamo::open_session(ClientId c) { return std::make_unique<DynamoSession>(c, *this); }

void Dynamo::start() {
  if (opts_.spares == 0) return;
  for (std::uint32_t dc = 0; dc < opts_.topology.num_dcs; ++dc)
    for (std::uint32_t p = 0; p < opts_.topology.partitions_per_dc; ++p)
      k_.schedule_timer(Address::of(NodeId{dc, p}), opts_.handoff_interval, Tick{Tick::Kind::handoff, 0});
}

std::optional<NodeId> Dynamo::coordinator_for(ClientId c, Key key) const {
  for (const NodeId n : preference_list(key))
    if (k_.reachable(Address::of(c), Address::of(n))) return n;
  return std::nullopt;
}

bool Dynamo::up(NodeId from, NodeId to) const {
  return from == to || k_.reachable(Address::of(from), Address::of(to));
}

std::vector<Sibling> Dynamo::local_heads(const Node& n, Key key) const {
  SiblingSet all;
  if (const auto* s = n.store.find(key))
    for (const auto& v : s->heads()) all.install(v);
  if (const auto* s = n.hinted.find(key))
    for (const auto& v : s->heads()) all.install(v);
  return all.heads();
}

std::vector<Dynamo::Assignment> Dynamo::plan(Key key, NodeId coord, std::optional<NodeId>& own_hint) const {
  const auto list = preference_list(key);
  const std::uint32_t n = opts_.topology.n;
  std::vector<NodeId> slots(list.begin(), list.begin() + n);
  std::vector<NodeId> spares(list.begin() + n, list.end());
  std::vector<bool> spare_used(spares.size(), false);
  own_hint.reset();

  const bool coord_owns = std::find(slots.begin(), slots.end(), coord) != slots.end();
  if (!coord_owns) {
    for (std::size_t i = 0; i < spares.size(); ++i)
      if (spares[i] == coord) spare_used[i] = true;
  }
  std::vector<Assignment> out;
  for (const NodeId slot : slots) {
    if (slot == coord) continue;
    if (up(coord, slot)) {
      out.push_back({slot, std::nullopt});
      continue;
    }
    if (!coord_owns && !own_hint) {
      own_hint = slot;  // the coordinator itself stands in for this owner
      continue;
    }
    for (std::size_t i = 0; i < spares.size(); ++i) {
      if (!spare_used[i] && up(coord, spares[i])) {
        spare_used[i] = true;
        out.push_back({spares[i], slot});
        break;
      }
    }
  }
  return out;
}

void Dynamo::store(NodeId self, Key key, const Sibling& v, const std::optional<NodeId>& hint) {
  auto& n = node(self);
  if (!hint) {
    n.store[key].install(v);
    return;
  }
  n.hinted[key].install(v);
  n.hints.push_back(Hint{next_request_++, key, v, *hint, std::nullopt});
  ++hints_created_;
}

void Dynamo::on_node(SimKernel::Delivery& d) {
  const NodeId self = d.to.node();
  if (auto* tick = std::get_if<Tick>(&d.payload)) {
    if (tick->kind == Tick::Kind::handoff) {
      if (!k_.crashed(self)) handoff(self);
      k_.schedule_timer(d.to, opts_.handoff_interval, *tick);
    } else if (tick->kind == Tick::Kind::quorum_timeout) {
      if (node(self).ops.contains(tick->arg)) answer(self, tick->arg, false);
    }
    return;
  }
  if (auto* req = std::get_if<ClientRequest>(&d.payload)) {
    client_request(self, d.from, *req);
  } else if (auto* w = std::get_if<DynWrite>(&d.payload)) {
    on_write(self, d.from, *w);
  } else if (auto* a = std::get_if<DynWriteAck>(&d.payload)) {
    on_ack(self, d.from, *a);
  } else if (auto* r = std::get_if<DynRead>(&d.payload)) {
    k_.send(d.to, d.from, DynReadReply{r->request, local_heads(node(self), r->key)});
  } else if (auto* rr = std::get_if<DynReadReply>(&d.payload)) {
    on_read_reply(self, d.from, *rr);
  }
}

void Dynamo::client_request(NodeId self, Address client, const ClientRequest& req) {
  const std::uint64_t rid = next_request_++;
  auto& op = node(self).ops[rid];
  op.put = req.kind == OpKind::put;
  op.client = client;
  op.req = req;
  op.started = k_.now();
  if (op.put) {
    start_put(self, rid, op);
  } else {
    start_get(self, rid, op);
  }
}

void Dynamo::start_put(NodeId self, std::uint64_t rid, Coordination& op) {
  auto& n = node(self);
  const auto& req = op.req;
  VectorClock vc = req.dyn_context;
  n.counter = std::max(vc.get(self), n.counter) + 1;
  vc.set(self, n.counter);
  n.lamport = std::max(n.lamport, req.dyn_stamp) + 1;
  const VersionId id = trace_.add_version(req.key, req.value, self, k_.now(), req.trace_deps);
  op.version = Sibling{req.value, vc, id, n.lamport};

  std::optional<NodeId> own_hint;
  const auto targets = plan(req.key, self, own_hint);
  store(self, req.key, op.version, own_hint);
  for (const auto& t : targets)
    k_.send(Address::of(self), Address::of(t.target), DynWrite{rid, req.key, op.version, t.hint, DynWrite::Purpose::replicate});
  op.acks = 1;
  op.needed = opts_.topology.w;
  if (op.acks >= op.needed) {
    answer(self, rid, true);
    return;
  }
  k_.schedule_timer(Address::of(self), timeout_, Tick{Tick::Kind::quorum_timeout, rid});
}

void Dynamo::start_get(NodeId self, std::uint64_t rid, Coordination& op) {
  const auto list = preference_list(op.req.key);
  const std::size_t n = opts_.topology.n;
  for (const NodeId c : list) {
    if (op.queried.size() == n) break;
    if (up(self, c)) op.queried.push_back(c);
  }
  if (std::find(op.queried.begin(), op.queried.end(), self) == op.queried.end()) {
    // A coordinator outside the chosen replicas still answers from its own copy.
    if (op.queried.size() == n) op.queried.pop_back();
    op.queried.insert(op.queried.begin(), self);
  }
  op.needed = op.req.read_all ? op.queried.size() : opts_.topology.r;
  const auto mine = local_heads(node(self), op.req.key);
  for (const auto& v : mine) op.merged.install(v);
  op.seen[self] = mine;
  op.responded.insert(self);
  op.responses = 1;
  for (const NodeId c : op.queried)
    if (c != self) k_.send(Address::of(self), Address::of(c), DynRead{rid, op.req.key});
  if (op.responses >= op.needed) {
    finish_read(self, rid);
    return;
  }
  k_.schedule_timer(Address::of(self), timeout_, Tick{Tick::Kind::quorum_timeout, rid});
}

void Dynamo::on_read_reply(NodeId self, Address from, const DynReadReply& r) {
  auto it = node(self).ops.find(r.request);
  if (it == node(self).ops.end()) return;
  auto& op = it->second;
  const NodeId replica = from.node();
  if (!op.responded.insert(replica).second) return;
  op.seen[replica] = r.heads;
  if (op.repairing) return;
  for (const auto& v : r.heads) op.merged.install(v);
  if (++op.responses >= op.needed) finish_read(self, r.request);
}

void Dynamo::finish_read(NodeId self, std::uint64_t rid) {
  auto& op = node(self).ops.at(rid);
  op.repairing = true;
  op.result = op.merged.heads();
  for (const auto& v : op.result) node(self).store[op.req.key].install(v);
  // The answer waits until the result is held by W replicas.
  op.holders = 0;
  for (const NodeId c : op.queried) {
    std::size_t missing = 0;
    if (c != self) {
      SiblingSet have;
      auto seen = op.seen.find(c);
      if (seen != op.seen.end())
        for (const auto& v : seen->second) have.install(v);
      for (const auto& v : op.result) {
        if (seen != op.seen.end() && have.covers(v.clock)) continue;
        ++missing;
        k_.send(Address::of(self), Address::of(c), DynWrite{rid, op.req.key, v, std::nullopt, DynWrite::Purpose::repair});
      }
    }
    if (missing == 0) {
      ++op.holders;
    } else {
      op.repair_outstanding[c] = missing;
    }
  }
  if (op.result.empty() || op.holders >= opts_.topology.w) answer(self, rid, true);
}

void Dynamo::on_write(NodeId self, Address from, const DynWrite& w) {
  store(self, w.key, w.version, w.hint);
  k_.send(Address::of(self), from, DynWriteAck{w.request, w.key, w.purpose});
}

void Dynamo::on_ack(NodeId self, Address from, const DynWriteAck& a) {
  auto& n = node(self);
  if (a.purpose == DynWrite::Purpose::handoff) {
    auto it = std::find_if(n.hints.begin(), n.hints.end(), [&](const Hint& h) { return h.id == a.request; });
    if (it == n.hints.end()) return;
    const Key key = it->key;
    n.hints.erase(it);
    SiblingSet rest;
    for (const auto& h : n.hints)
      if (h.key == key) rest.install(h.version);
    n.hinted[key] = rest;
    return;
  }
  auto it = n.ops.find(a.request);
  if (it == n.ops.end()) return;
  auto& op = it->second;
  if (a.purpose == DynWrite::Purpose::replicate) {
    if (++op.acks >= op.needed) answer(self, a.request, true);
    return;
  }
  auto out = op.repair_outstanding.find(from.node());
  if (out == op.repair_outstanding.end() || out->second == 0) return;
  if (--out->second == 0 && ++op.holders >= opts_.topology.w) answer(self, a.request, true);
}

void Dynamo::answer(NodeId self, std::uint64_t rid, bool ok) {
  auto& n = node(self);
  auto it = n.ops.find(rid);
  Coordination op = std::move(it->second);
  n.ops.erase(it);
  if (k_.crashed(self)) return;

  ClientReply rep;
  rep.op = op.req.op;
  rep.ok = ok;
  if (ok && op.put) {
    rep.value = op.version.value;
    rep.version = op.version.trace_id;
    rep.siblings.push_back(to_client(op.version));
    rep.dyn_context = op.version.clock;
    for (std::uint32_t dc = 0; dc < opts_.topology.num_dcs; ++dc) trace_.mark_visible(op.version.trace_id, dc, k_.now());
  } else if (ok) {
    VectorClock merged;
    for (const auto& v : op.result) {
      rep.siblings.push_back(to_client(v));
      merged.merge(v.clock);
      for (std::uint32_t dc = 0; dc < opts_.topology.num_dcs; ++dc) trace_.mark_visible(v.trace_id, dc, k_.now());
    }
    rep.dyn_context = merged;
  }
  reply(self, op.client, std::move(rep));
}

void Dynamo::handoff(NodeId self) {
  auto& n = node(self);
  const SimTime retry = opts_.handoff_interval + 2 * k_.config().network.max_ntt();
  for (auto& h : n.hints) {
    if (h.sent_at && k_.now() < *h.sent_at + retry) continue;
    if (!up(self, h.intended)) continue;
    h.sent_at = k_.now();
    k_.send(Address::of(self), Address::of(h.intended), DynWrite{h.id, h.key, h.version, std::nullopt, DynWrite::Purpose::handoff});
  }
}

void Dynamo::finish() {
  std::set<Key> keys;
  for (const auto& n : nodes_) {
    for (const auto& [k, _] : n.store.all()) keys.insert(k);
    for (const auto& h : n.hints) keys.insert(h.key);
  }
  auto ids = [](const std::vector<Sibling>& heads) {
    std::vector<VersionId> out;
    for (const auto& s : heads) out.push_back(s.trace_id);
    std::sort(out.begin(), out.end());
    return out;
  };
  for (Key k : keys) {
    std::vector<consistency::ReplicaHeads> heads;
    const auto list = preference_list(k);
    for (std::uint32_t r = 0; r < opts_.topology.n; ++r) {
      if (k_.crashed(list[r])) continue;  // only surviving replicas count
      const auto* s = node(list[r]).store.find(k);
      heads.push_back({list[r], s ? ids(s->heads()) : std::vector<VersionId>{}});
    }
    for (std::uint32_t i = 0; i < nodes_.size(); ++i) {
      const auto& n = nodes_[i];
      if (std::none_of(n.hints.begin(), n.hints.end(), [&](const Hint& h) { return h.key == k; })) continue;
      const NodeId id{i / opts_.topology.partitions_per_dc, i % opts_.topology.partitions_per_dc};
      heads.push_back({id, ids(n.hinted.find(k)->heads())});
    }
    trace_.set_final_heads(k, std::move(heads));
  }
}

}  // namespace clab::proto
