#include "clab/bench/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <set>
#include <unordered_map>

namespace clab::bench {

using consistency::History;
using consistency::ProcessId;
using consistency::VersionId;
using proto::ClientReply;
using proto::ClientRequest;
using proto::ClientTimer;
using proto::SimKernel;

void ExperimentConfig::validate() const {
  const auto& t = options.topology;
  t.validate(protocol == proto::ProtocolKind::dynamo);
  network.validate(t.num_dcs);
  faults.validate(t.num_dcs, t.partitions_per_dc);
  workload.validate(t.partitions_per_dc);
  for (auto dc : workload.client_dcs)
    if (dc >= t.num_dcs) throw ConfigError("workload.client_dcs", "unknown datacenter");
  if (duration == 0) throw ConfigError("duration", "must be positive");
  if (warmup >= duration) throw ConfigError("warmup", "must be shorter than the duration");
  if (max_attempts < 1) throw ConfigError("max_attempts", "must be at least 1");
  if (reconcile && protocol != proto::ProtocolKind::dynamo)
    throw ConfigError("reconcile", "only meaningful for dynamo");
}

std::vector<SimTime> uvl_samples(const consistency::VisibilityTrace& trace, std::uint64_t* unreplicated) {
  std::vector<SimTime> out;
  std::uint64_t missing = 0;
  for (const auto& v : trace.versions()) {
    for (std::uint32_t dc = 0; dc < trace.num_dcs(); ++dc) {
      if (dc == v.creator.dc) continue;
      if (v.visible_at[dc]) {
        out.push_back(*v.visible_at[dc] - v.created);
      } else {
        ++missing;
      }
    }
  }
  if (unreplicated) *unreplicated = missing;
  return out;
}

namespace {

struct Client {
  ClientId id;
  std::uint64_t global = 0;
  std::unique_ptr<WorkloadStream> stream;
  std::vector<WorkloadOp> script;  // replaces the stream when non-empty
  std::size_t script_pos = 0;
  bool script_read_all = false;
  std::unique_ptr<proto::Session> session;
  ProcessId process = 0;
  std::uint64_t issued = 0;
  std::uint64_t seq = 0;
  std::uint64_t token = 0;
  bool busy = false;
  bool stopped = false;
  ClientRequest inflight;
  std::uint32_t attempts = 0;
  SimTime sent_at = 0;
  std::vector<VersionId> frontier;
  std::optional<SimTime> fresh_bound;  // creation time of the newest acknowledged write to the key
};

class Runner {
 public:
  explicit Runner(const ExperimentConfig& cfg) : cfg_(cfg), result_(), kernel_(kernel_config(cfg)) {
    result_.trace = consistency::VisibilityTrace(cfg.options.topology.num_dcs);
    protocol_ = proto::make_protocol(cfg.protocol, kernel_, cfg.options, result_.trace);
    kernel_.set_handler([this](SimKernel::Delivery& d) { on_event(d); });
    const SimTime q = std::max<SimTime>(4 * cfg.network.max_ntt(), 10 * kMillisecond);
    timeout_ = cfg.client_timeout ? cfg.client_timeout : 2 * std::max(q, cfg.options.quorum_timeout) + 10 * kMillisecond;
    clients_per_dc_ = cfg.workload.clients_in_dc(cfg.options.topology.partitions_per_dc);
    put_issued_.assign(cfg.options.topology.num_dcs, 0);
    put_ok_.assign(cfg.options.topology.num_dcs, 0);
  }

  ExperimentResult run() {
    protocol_->start();
    spawn_clients();
    kernel_.run_until(cfg_.duration + cfg_.drain);
    if (cfg_.reconcile) reconcile();
    protocol_->finish();
    result_.trace.set_end_time(kernel_.now());
    result_.invariant_failures = protocol_->invariant_failures();
    result_.digest = kernel_.digest();
    fill_metrics();
    return std::move(result_);
  }

 private:
  static KernelConfig kernel_config(const ExperimentConfig& cfg) {
    KernelConfig k;
    k.num_dcs = cfg.options.topology.num_dcs;
    k.partitions_per_dc = cfg.options.topology.partitions_per_dc;
    k.network = cfg.network;
    k.network.seed = cfg.seed * 0x9e3779b97f4a7c15ULL + 1;
    k.faults = cfg.faults;
    k.clock = cfg.clock;
    k.clock.seed = cfg.seed * 0xbf58476d1ce4e5b9ULL + 7;
    k.capacity = static_cast<double>(cfg.options.topology.capacity);
    return k;
  }

  Client& client(ClientId id) { return *clients_.at(index_.at({id.dc, id.index})); }

  void spawn_clients() {
    std::vector<std::uint32_t> dcs = cfg_.workload.client_dcs;
    if (dcs.empty())
      for (std::uint32_t dc = 0; dc < cfg_.options.topology.num_dcs; ++dc) dcs.push_back(dc);
    std::sort(dcs.begin(), dcs.end());
    dcs.erase(std::unique(dcs.begin(), dcs.end()), dcs.end());
    Rng seeds(cfg_.seed ^ 0x5eedULL);
    for (std::uint32_t dc : dcs) {
      for (std::uint32_t i = 0; i < clients_per_dc_; ++i) {
        auto& c = add_client(ClientId{dc, i});
        c.stream = std::make_unique<WorkloadStream>(cfg_.workload, cfg_.options.topology.partitions_per_dc, seeds.next());
        // Small deterministic stagger so clients do not start in lockstep.
        schedule(c, 1 + (c.global * 37) % 500);
      }
    }
  }

  Client& add_client(ClientId id) {
    auto c = std::make_unique<Client>();
    c->id = id;
    c->global = clients_.size();
    index_[{id.dc, id.index}] = clients_.size();
    clients_.push_back(std::move(c));
    auto& ref = *clients_.back();
    restart(ref);
    return ref;
  }

  void restart(Client& c) {
    c.session = protocol_->open_session(c.id);
    c.process = next_process_++;
    c.frontier.clear();
  }

  void schedule(Client& c, SimTime delay) {
    c.busy = false;
    kernel_.schedule_timer(Address::of(c.id), delay, ClientTimer{ClientTimer::Kind::next_op, ++c.token});
  }

  void on_event(SimKernel::Delivery& d) {
    if (d.to.is_node()) {
      protocol_->on_node(d);
      return;
    }
    auto& c = client(d.to.client());
    if (auto* t = std::get_if<ClientTimer>(&d.payload)) {
      if (t->token != c.token) return;
      if (t->kind == ClientTimer::Kind::next_op) {
        issue(c);
      } else if (c.busy && !resend(c)) {
        ++result_.metrics.timed_out;
        give_up(c);
      }
    } else if (auto* r = std::get_if<ClientReply>(&d.payload)) {
      if (c.busy && r->op == c.inflight.op) complete(c, *r);
    }
  }

  bool next_op(Client& c, WorkloadOp& op) {
    if (!c.script.empty()) {
      if (c.script_pos >= c.script.size()) return false;
      op = c.script[c.script_pos++];
      return true;
    }
    if (kernel_.now() >= cfg_.duration) return false;
    if (cfg_.workload.ops_per_client && c.issued >= cfg_.workload.ops_per_client) return false;
    op = c.stream->next();
    return true;
  }

  void issue(Client& c) {
    WorkloadOp op;
    if (!next_op(c, op)) {
      c.stopped = true;
      return;
    }
    ++c.issued;
    ++result_.metrics.issued;
    if (cfg_.workload.fresh_session_per_op) restart(c);
    if (op.kind == OpKind::put) ++put_issued_[c.id.dc];

    ClientRequest req;
    req.op = next_op_id_++;
    req.kind = op.kind;
    req.key = op.key;
    if (op.kind == OpKind::put) {
      req.value = ((c.global + 1) << 32) | ++c.seq;
      req.trace_deps = c.frontier;
    }
    req.read_all = c.script_read_all;
    c.fresh_bound.reset();
    if (op.kind == OpKind::get) {
      if (auto it = acked_.find(op.key); it != acked_.end()) c.fresh_bound = it->second;
    }
    c.session->prepare(req);

    const auto target = c.session->target(op.kind, op.key);
    if (!target || !kernel_.reachable(Address::of(c.id), Address::of(*target))) {
      ++result_.metrics.unavailable;
      schedule(c, cfg_.retry_backoff);
      return;
    }
    if (cfg_.record_history) {
      if (op.kind == OpKind::put) {
        result_.history.put_call(c.process, op.key, req.value, req.op);
      } else {
        result_.history.get_call(c.process, op.key, req.op);
      }
    }
    c.busy = true;
    c.sent_at = kernel_.now();
    c.attempts = 1;
    c.inflight = req;
    kernel_.send(Address::of(c.id), Address::of(*target), std::move(req));
    kernel_.schedule_timer(Address::of(c.id), timeout_, ClientTimer{ClientTimer::Kind::timeout, ++c.token});
  }

  // Dynamo clients send a timed-out request again to the highest-ranked
  // coordinator they can reach; the first reply from any attempt wins.
  // Causal protocols only talk to their local node, so a retry would hit
  // the same failure.
  bool resend(Client& c) {
    if (cfg_.protocol != proto::ProtocolKind::dynamo || c.attempts >= cfg_.max_attempts) return false;
    const auto target = c.session->target(c.inflight.kind, c.inflight.key);
    if (!target || !kernel_.reachable(Address::of(c.id), Address::of(*target))) return false;
    ++c.attempts;
    kernel_.send(Address::of(c.id), Address::of(*target), ClientRequest(c.inflight));
    kernel_.schedule_timer(Address::of(c.id), timeout_, ClientTimer{ClientTimer::Kind::timeout, ++c.token});
    return true;
  }

  void give_up(Client& c) {
    // The operation stays pending in the history; a new incarnation carries on.
    restart(c);
    schedule(c, cfg_.retry_backoff);
  }

  void complete(Client& c, const ClientReply& r) {
    const auto& req = c.inflight;
    if (!r.ok) {
      ++result_.metrics.rejected;
      give_up(c);
      return;
    }
    const SimTime now = kernel_.now();
    const SimTime latency = now - c.sent_at;
    VersionId chosen = 0;
    const Value value = req.kind == OpKind::get ? c.session->resolve(r, &chosen) : req.value;
    if (cfg_.record_history) {
      if (req.kind == OpKind::put) {
        result_.history.put_response(c.process, req.key, req.op);
      } else {
        result_.history.get_response(c.process, req.key, value, req.op);
      }
    }
    c.session->absorb(req, r);
    if (req.kind == OpKind::put) {
      c.frontier.assign(1, r.version);
      ++put_ok_[c.id.dc];
      put_latency_sum_ += static_cast<double>(latency);
      put_wait_sum_ += static_cast<double>(r.wait);
      result_.metrics.put_wait_max = std::max(result_.metrics.put_wait_max, r.wait);
      ++puts_ok_;
      auto& newest = acked_[req.key];
      newest = std::max(newest, result_.trace.at(r.version).created);
    } else {
      if (!r.siblings.empty()) {
        for (const auto& s : r.siblings) c.frontier.push_back(s.trace_id);
      } else if (r.version != 0) {
        c.frontier.push_back(r.version);
      }
      if (c.fresh_bound && (chosen == 0 || result_.trace.at(chosen).created < *c.fresh_bound)) ++stale_;
      get_latency_sum_ += static_cast<double>(latency);
      ++gets_ok_;
    }
    ++ok_;
    if (now >= cfg_.warmup && now < cfg_.duration) ++result_.metrics.completed;
    schedule(c, cfg_.workload.think_time);
  }

  void reconcile() {
    std::set<Key> keys;
    for (const auto& v : result_.trace.versions()) keys.insert(v.key);
    if (keys.empty()) return;
    auto& c = add_client(ClientId{0, clients_per_dc_});
    c.script_read_all = true;
    for (Key k : keys) {
      c.script.push_back({OpKind::get, k});
      c.script.push_back({OpKind::put, k});
    }
    schedule(c, 0);
    // Run until the script is done, then let replication settle.
    const SimTime limit = kernel_.now() + 2 * timeout_ * (c.script.size() + 1);
    while (!c.stopped && kernel_.now() < limit && kernel_.step()) {
    }
    kernel_.run_until(kernel_.now() + cfg_.drain);
  }

  void fill_metrics() {
    auto& m = result_.metrics;
    const double window = static_cast<double>(cfg_.duration - cfg_.warmup) / static_cast<double>(kSecond);
    m.throughput = static_cast<double>(m.completed) / window;
    m.availability = m.issued ? static_cast<double>(ok_) / static_cast<double>(m.issued) : 1.0;
    for (std::size_t dc = 0; dc < put_issued_.size(); ++dc)
      m.write_availability_by_dc.push_back(
          put_issued_[dc] ? static_cast<double>(put_ok_[dc]) / static_cast<double>(put_issued_[dc]) : 1.0);

    auto samples = uvl_samples(result_.trace, &m.unreplicated);
    m.uvl_samples = samples.size();
    if (!samples.empty()) {
      std::sort(samples.begin(), samples.end());
      double sum = 0.0;
      for (auto s : samples) sum += static_cast<double>(s);
      m.uvl_mean = sum / static_cast<double>(samples.size());
      const auto rank = static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(samples.size())));
      m.uvl_p99 = static_cast<double>(samples[std::max<std::size_t>(rank, 1) - 1]);
    }
    if (gets_ok_) {
      m.get_latency_mean = get_latency_sum_ / static_cast<double>(gets_ok_);
      m.stale_rate = static_cast<double>(stale_) / static_cast<double>(gets_ok_);
    }
    if (puts_ok_) {
      m.put_latency_mean = put_latency_sum_ / static_cast<double>(puts_ok_);
      m.put_wait_mean = put_wait_sum_ / static_cast<double>(puts_ok_);
    }

    const auto& by_type = kernel_.stats().dispatched_by_type;
    auto count = [&](std::size_t idx) { return idx < by_type.size() ? by_type[idx] : 0; };
    using namespace proto;
    m.msgs_total = kernel_.stats().dispatched;
    m.msgs_put_after = count(message_index<CopsPutAfter>()) + count(message_index<GrReplicate>()) +
                       count(message_index<EvReplicate>());
    m.msgs_dep_check = count(message_index<CopsDepCheck>());
    m.msgs_quorum = count(message_index<DynWrite>()) + count(message_index<DynWriteAck>()) +
                    count(message_index<DynRead>()) + count(message_index<DynReadReply>());
    m.msgs_stabilization =
        count(message_index<GrHeartbeat>()) + count(message_index<GrLst>()) +
                           count(message_index<GrGst>()) + count(message_index<GrNack>());
    for (const auto& v : result_.trace.versions()) result_.quiescence = std::max(result_.quiescence, v.created);
  }

  const ExperimentConfig& cfg_;
  ExperimentResult result_;
  SimKernel kernel_;
  std::unique_ptr<proto::Protocol> protocol_;
  std::vector<std::unique_ptr<Client>> clients_;
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> index_;
  SimTime timeout_ = 0;
  std::uint32_t clients_per_dc_ = 0;
  ProcessId next_process_ = 1;
  consistency::OpId next_op_id_ = 1;
  std::uint64_t ok_ = 0;
  std::uint64_t gets_ok_ = 0;
  std::uint64_t stale_ = 0;
  std::unordered_map<Key, SimTime> acked_;
  std::uint64_t puts_ok_ = 0;
  double get_latency_sum_ = 0.0;
  double put_latency_sum_ = 0.0;
  double put_wait_sum_ = 0.0;
  std::vector<std::uint64_t> put_issued_;
  std::vector<std::uint64_t> put_ok_;
};

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  Runner runner(cfg);
  return runner.run();
}

}  // namespace clab::bench
