#include "clab/proto/gentlerain.hpp"

#include <algorithm>
#include <set>

namespace clab::proto {
namespace {

class GrSession final : public Session {
 public:
  GrSession(ClientId c, const Topology& t) : client_(c), topo_(t) {}

  std::optional<NodeId> target(OpKind, Key key) override { return partition_for_key(key, topo_, client_.dc); }

  void prepare(ClientRequest& req) override {
    req.gr_dep = dep_;
    req.gr_gst = gst_;
  }

  void absorb(const ClientRequest&, const ClientReply& rep) override {
    dep_ = std::max(dep_, rep.gr_stamp);
    gst_ = std::max(gst_, rep.gr_gst);
  }

 private:
  ClientId client_;
  const Topology& topo_;
  GrStamp dep_;  // timestamp of the latest version seen or written
  GrStamp gst_;  // largest GST reported by any node of the home datacenter
};

}  // namespace

GrStamp hlc_advance(GrStamp last, SimTime physical, GrStamp observed) {
  const SimTime l = std::max({last.phys, physical, observed.phys});
  std::uint32_t c = 0;
  if (l == last.phys && l == observed.phys) {
    c = std::max(last.logical, observed.logical) + 1;
  } else if (l == last.phys) {
    c = last.logical + 1;
  } else if (l == observed.phys) {
    c = observed.logical + 1;
  }
  return {l, c};
}

GentleRain::GentleRain(SimKernel& kernel, ProtocolOptions opts, consistency::VisibilityTrace& trace)
    : Protocol(kernel, std::move(opts), trace) {
  const auto& t = opts_.topology;
  if (opts_.heartbeat_interval == 0) throw ConfigError("heartbeat_interval", "must be positive");
  nodes_.resize(t.num_nodes());
  for (auto& n : nodes_) {
    n.vv.assign(t.num_dcs, GrStamp{});
    n.child_lst.assign(2, GrStamp{});
    n.child_fresh.assign(2, false);
    n.out.resize(t.num_dcs);
    n.in.resize(t.num_dcs);
  }
  dcs_.resize(t.num_dcs);
  stamps_.resize(1);
}

std::unique_ptr<Session> GentleRain::open_session(ClientId c) {
  return std::make_unique<GrSession>(c, opts_.topology);
}

void GentleRain::start() {
  const auto& t = opts_.topology;
  for (std::uint32_t dc = 0; dc < t.num_dcs; ++dc) {
    for (std::uint32_t p = 0; p < t.partitions_per_dc; ++p) {
      const auto at = Address::of(NodeId{dc, p});
      k_.schedule_timer(at, t.gst_interval, Tick{Tick::Kind::gst, 0});
      if (t.num_dcs > 1) k_.schedule_timer(at, opts_.heartbeat_interval, Tick{Tick::Kind::heartbeat, 0});
    }
  }
}

GrStamp GentleRain::promise(NodeId self) {
  // Every later stamp of this node is strictly above the returned value.
  const SimTime pt = k_.physical_clock(self);
  const auto& n = node(self);
  if (opts_.clock_mode == ClockMode::hlc && n.hlc.phys >= pt) return n.hlc;
  if (pt == 0) return GrStamp{};
  return GrStamp{pt - 1, ~std::uint32_t{0}};
}

GrStamp GentleRain::clock_stamp(NodeId self) {
  const GrStamp pt{k_.physical_clock(self), 0};
  if (opts_.clock_mode == ClockMode::hlc) return std::max(pt, node(self).hlc);
  return pt;
}

void GentleRain::on_node(SimKernel::Delivery& d) {
  const NodeId self = d.to.node();
  if (auto* tick = std::get_if<Tick>(&d.payload)) {
    const bool down = k_.crashed(self);
    switch (tick->kind) {
      case Tick::Kind::gst:
        if (!down) compute_gst(self);
        k_.schedule_timer(d.to, opts_.topology.gst_interval, *tick);
        break;
      case Tick::Kind::heartbeat:
        if (!down) heartbeat(self);
        k_.schedule_timer(d.to, opts_.heartbeat_interval, *tick);
        break;
      case Tick::Kind::put_wait:
        if (down) {
          node(self).waiting.erase(tick->arg);
        } else {
          try_put(self, tick->arg);
        }
        break;
      default:
        break;
    }
    return;
  }
  if (auto* req = std::get_if<ClientRequest>(&d.payload)) {
    client_request(self, d.from, *req);
  } else if (auto* rep = std::get_if<GrReplicate>(&d.payload)) {
    receive(self, d.from.dc, *rep);
  } else if (auto* hb = std::get_if<GrHeartbeat>(&d.payload)) {
    heartbeat_in(self, d.from.dc, *hb);
  } else if (auto* lst = std::get_if<GrLst>(&d.payload)) {
    child_lst(self, d.from.index, lst->lst);
  } else if (auto* g = std::get_if<GrGst>(&d.payload)) {
    raise_gst(self, g->gst);
    for (auto c : children(self.partition))
      k_.send(Address::of(self), Address::of(NodeId{self.dc, c}), GrGst{g->gst});
  } else if (auto* nk = std::get_if<GrNack>(&d.payload)) {
    auto& out = node(self).out[d.from.dc];
    for (std::uint64_t s = nk->from_seq; s < out.next_seq; ++s) {
      GrReplicate again = out.sent[s - 1];
      again.retransmit = true;
      ++retransmissions_;
      k_.send(Address::of(self), d.from, again);
    }
    if (nk->from_seq < out.next_seq) out.last_sent = k_.now();
  }
}

void GentleRain::client_request(NodeId self, Address client, const ClientRequest& req) {
  auto& n = node(self);
  raise_gst(self, req.gr_gst);
  if (req.kind == OpKind::get) {
    ClientReply rep;
    rep.op = req.op;
    const auto* chain = n.store.find(req.key);
    const GrVersion* v = chain ? chain->latest_where([&](const GrVersion& x) {
      return x.origin_dc == self.dc || x.ut <= n.gst;
    })
                               : nullptr;
    if (v) {
      rep.value = v->value;
      rep.version = v->trace_id;
      rep.gr_stamp = v->ut;
    }
    rep.gr_gst = n.gst;
    reply(self, client, std::move(rep));
    return;
  }
  if (opts_.clock_mode == ClockMode::hlc) {
    n.hlc = hlc_advance(n.hlc, k_.physical_clock(self), req.gr_dep);
    create(self, client, req, k_.now(), n.hlc);
    return;
  }
  const std::uint64_t id = n.next_wait++;
  n.waiting.emplace(id, Waiting{client, req, k_.now()});
  try_put(self, id);
}

void GentleRain::try_put(NodeId self, std::uint64_t wait_id) {
  auto& n = node(self);
  auto it = n.waiting.find(wait_id);
  if (it == n.waiting.end()) return;
  const SimTime clock = k_.physical_clock(self);
  const SimTime dep = it->second.req.gr_dep.phys;
  if (clock <= dep) {
    // Wake one tick after the clock is expected to pass the dependency.
    k_.schedule_timer(Address::of(self), dep - clock + 1, Tick{Tick::Kind::put_wait, wait_id});
    return;
  }
  Waiting w = std::move(it->second);
  n.waiting.erase(it);
  create(self, w.client, w.req, w.arrived, GrStamp{clock, 0});
}

void GentleRain::create(NodeId self, Address client, const ClientRequest& req, SimTime arrived, GrStamp ut) {
  auto& n = node(self);
  const VersionId id = trace_.add_version(req.key, req.value, self, k_.now(), req.trace_deps);
  if (stamps_.size() <= id) stamps_.resize(id + 1);
  stamps_[id] = ut;
  for (VersionId dep : req.trace_deps) {
    if (dep < stamps_.size() && !(stamps_[dep] < ut)) fail_invariant("gentlerain: I1 broken by version " + std::to_string(id));
  }
  n.store[req.key].install(GrVersion{ut, self.dc, req.value, id});

  ClientReply rep;
  rep.op = req.op;
  rep.value = req.value;
  rep.version = id;
  rep.gr_stamp = ut;
  rep.gr_gst = n.gst;
  rep.wait = k_.now() - arrived;
  reply(self, client, std::move(rep));

  for (std::uint32_t dc = 0; dc < opts_.topology.num_dcs; ++dc) {
    if (dc == self.dc) continue;
    auto& out = n.out[dc];
    GrReplicate msg{out.next_seq++, req.key, req.value, ut, id, false};
    out.sent.push_back(msg);
    out.last_sent = k_.now();
    k_.send(Address::of(self), Address::of(NodeId{dc, self.partition}), std::move(msg));
  }
}

void GentleRain::receive(NodeId self, std::uint32_t from_dc, const GrReplicate& msg) {
  auto& in = node(self).in[from_dc];
  if (msg.seq < in.expected) return;  // duplicate
  if (msg.seq > in.expected) {
    in.buffer.emplace(msg.seq, msg);
    nack(self, from_dc);
    return;
  }
  apply(self, from_dc, msg);
  ++in.expected;
  for (auto it = in.buffer.begin(); it != in.buffer.end() && it->first <= in.expected;) {
    if (it->first == in.expected) {
      apply(self, from_dc, it->second);
      ++in.expected;
    }
    it = in.buffer.erase(it);
  }
}

void GentleRain::apply(NodeId self, std::uint32_t from_dc, const GrReplicate& msg) {
  auto& n = node(self);
  n.store[msg.key].install(GrVersion{msg.ut, from_dc, msg.value, msg.trace_id});
  n.vv[from_dc] = std::max(n.vv[from_dc], msg.ut);
  auto& view = dcs_[self.dc];
  if (msg.ut <= view.published) {
    fail_invariant("gentlerain: I2 broken, version " + std::to_string(msg.trace_id) + " arrived below GST");
    trace_.mark_visible(msg.trace_id, self.dc, k_.now());
  } else {
    view.installed.emplace(msg.ut, msg.trace_id);
  }
}

void GentleRain::nack(NodeId self, std::uint32_t from_dc) {
  auto& in = node(self).in[from_dc];
  const SimTime rtt = 2 * k_.config().network.base_latency(from_dc, self.dc);
  if (in.last_nack && k_.now() < *in.last_nack + rtt + opts_.heartbeat_interval) return;
  in.last_nack = k_.now();
  k_.send(Address::of(self), Address::of(NodeId{from_dc, self.partition}), GrNack{in.expected});
}

void GentleRain::heartbeat(NodeId self) {
  auto& n = node(self);
  for (std::uint32_t dc = 0; dc < opts_.topology.num_dcs; ++dc) {
    if (dc == self.dc) continue;
    auto& out = n.out[dc];
    if (out.next_seq > 1 && k_.now() < out.last_sent + opts_.heartbeat_interval) continue;
    out.last_sent = k_.now();
    k_.send(Address::of(self), Address::of(NodeId{dc, self.partition}), GrHeartbeat{promise(self), out.next_seq - 1});
  }
}

void GentleRain::heartbeat_in(NodeId self, std::uint32_t from_dc, const GrHeartbeat& hb) {
  auto& n = node(self);
  if (hb.last_seq >= n.in[from_dc].expected) {
    nack(self, from_dc);  // updates are missing; the clock promise cannot be used yet
    return;
  }
  n.vv[from_dc] = std::max(n.vv[from_dc], hb.clock);
}

GrStamp GentleRain::local_stable_time(NodeId self) {
  auto& n = node(self);
  if (opts_.topology.num_dcs == 1) return clock_stamp(self);
  GrStamp lst{~SimTime{0}, ~std::uint32_t{0}};
  for (std::uint32_t dc = 0; dc < opts_.topology.num_dcs; ++dc)
    if (dc != self.dc) lst = std::min(lst, n.vv[dc]);
  return lst;
}

// Partitions of a datacenter form a binary heap: partition p reports to
// (p - 1) / 2. Leaves start a round on their tick, inner nodes forward once
// every child has reported, and the root sends the new GST back down.
std::vector<std::uint32_t> GentleRain::children(std::uint32_t partition) const {
  std::vector<std::uint32_t> out;
  for (std::uint32_t c = 2 * partition + 1; c <= 2 * partition + 2; ++c)
    if (c < opts_.topology.partitions_per_dc) out.push_back(c);
  return out;
}

void GentleRain::compute_gst(NodeId self) {
  if (children(self.partition).empty()) report_up(self, local_stable_time(self));
}

void GentleRain::child_lst(NodeId self, std::uint32_t child, GrStamp lst) {
  auto& n = node(self);
  const std::size_t slot = child - (2 * self.partition + 1);
  n.child_lst[slot] = std::max(n.child_lst[slot], lst);
  n.child_fresh[slot] = true;
  const auto kids = children(self.partition);
  for (std::size_t i = 0; i < kids.size(); ++i)
    if (!n.child_fresh[i]) return;
  GrStamp agg = local_stable_time(self);
  for (std::size_t i = 0; i < kids.size(); ++i) {
    agg = std::min(agg, n.child_lst[i]);
    n.child_fresh[i] = false;
  }
  report_up(self, agg);
}

void GentleRain::report_up(NodeId self, GrStamp lst) {
  if (self.partition != 0) {
    k_.send(Address::of(self), Address::of(NodeId{self.dc, (self.partition - 1) / 2}), GrLst{lst});
    return;
  }
  raise_gst(self, lst);
  for (auto c : children(0)) k_.send(Address::of(self), Address::of(NodeId{self.dc, c}), GrGst{node(self).gst});
}

void GentleRain::raise_gst(NodeId self, GrStamp g) {
  auto& n = node(self);
  if (g <= n.gst) return;
  n.gst = g;
  auto& view = dcs_[self.dc];
  if (g <= view.published) return;
  view.published = g;
  while (!view.installed.empty() && view.installed.top().first <= g) {
    trace_.mark_visible(view.installed.top().second, self.dc, k_.now());
    view.installed.pop();
  }
}

void GentleRain::finish() {
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
