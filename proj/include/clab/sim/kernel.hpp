#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "clab/sim/network.hpp"
#include "clab/sim/rng.hpp"
#include "clab/sim/types.hpp"

namespace clab {

enum class DropReason : std::uint8_t { partition, loss, crash };

struct DropRecord {
  SimTime time;
  Address from;
  Address to;
  DropReason reason;
  std::size_t payload_type;
};

struct KernelConfig {
  std::uint32_t num_dcs = 1;
  std::uint32_t partitions_per_dc = 1;
  NetworkModel network = NetworkModel::uniform(1, 1);
  FaultSchedule faults;
  ClockModel clock;
  /// Messages per simulated second each server node can process; 0 disables the gate.
  double capacity = 0.0;
  bool record_drops = false;
};

/// Single-threaded discrete-event kernel.
///
/// Events are totally ordered by (time, EventId). Network messages pass
/// through latency, jitter, loss, partition and crash filters; messages to a
/// server node additionally queue behind that node's processing capacity.
/// Timers bypass the network and are delivered even to crashed nodes, so that
/// periodic tasks can keep rescheduling themselves.
template <class Payload>
class Kernel {
 public:
  struct Delivery {
    EventId id;
    SimTime time;
    Address from;
    Address to;
    bool timer;
    Payload payload;
  };

  struct Processed {
    EventId id;
    SimTime time;
    Address to;
    bool timer;
    bool dispatched;  // false when the event was dropped or queued behind capacity
  };

  struct Stats {
    std::uint64_t sent = 0;
    std::uint64_t dispatched = 0;
    std::uint64_t timers = 0;
    std::uint64_t dropped_partition = 0;
    std::uint64_t dropped_loss = 0;
    std::uint64_t dropped_crash = 0;
    std::vector<std::uint64_t> dispatched_by_type;
  };

  using Handler = std::function<void(Delivery&)>;

  explicit Kernel(KernelConfig config)
      : cfg_(std::move(config)),
        net_rng_(cfg_.network.seed),
        node_count_(cfg_.num_dcs * cfg_.partitions_per_dc),
        busy_until_(node_count_, 0),
        inbox_(node_count_),
        drain_pending_(node_count_, false),
        clocks_(node_count_) {
    cfg_.network.validate(cfg_.num_dcs);
    cfg_.faults.validate(cfg_.num_dcs, cfg_.partitions_per_dc);
    if (cfg_.capacity > 0.0) {
      service_us_ = std::max<SimTime>(1, static_cast<SimTime>(std::llround(1e6 / cfg_.capacity)));
    }
    init_clocks();
  }

  void set_handler(Handler h) { handler_ = std::move(h); }

  SimTime now() const { return now_; }
  const KernelConfig& config() const { return cfg_; }
  const Stats& stats() const { return stats_; }
  const std::vector<DropRecord>& drops() const { return drops_; }
  std::uint64_t digest() const { return digest_; }
  bool empty() const { return heap_.empty(); }
  SimTime service_time() const { return service_us_; }

  /// Sends `payload` over the network; `delay` is added before transit.
  /// Returns the EventId, or 0 when the message is dropped at send time.
  EventId send(Address from, Address to, Payload payload, SimTime delay = 0) {
    ++stats_.sent;
    const SimTime base = cfg_.network.base_latency(from.dc, to.dc);
    SimTime transit = base;
    if (cfg_.network.jitter > 0.0) {
      const double factor = 1.0 + cfg_.network.jitter * (2.0 * net_rng_.uniform() - 1.0);
      transit = std::max<SimTime>(1, static_cast<SimTime>(std::llround(static_cast<double>(base) * factor)));
    }
    SimTime at = now_ + delay + transit;
    if (from.dc != to.dc && net_rng_.bernoulli(cfg_.network.loss_rate)) {
      record_drop(from, to, DropReason::loss, payload);
      return 0;
    }
    // A message entering a cut link, or arriving while it is cut, is lost.
    if (cfg_.faults.separated(from.dc, to.dc, now_ + delay) || cfg_.faults.separated(from.dc, to.dc, at)) {
      record_drop(from, to, DropReason::partition, payload);
      return 0;
    }
    if (cfg_.network.fifo_channels) {
      auto& last = channel_tail_[std::make_pair(from.packed(), to.packed())];
      at = std::max(at, last);
      last = at;
    }
    return push(Event{at, next_id_++, Kind::message, from, to, std::move(payload)});
  }

  /// Local timer; fires at now + delay at `at` without touching the network.
  EventId schedule_timer(Address at, SimTime delay, Payload payload) {
    return push(Event{now_ + delay, next_id_++, Kind::timer, at, at, std::move(payload)});
  }

  /// Pops and handles the earliest event. Empty optional when exhausted.
  std::optional<Processed> step() {
    if (heap_.empty()) return std::nullopt;
    std::pop_heap(heap_.begin(), heap_.end(), Later{});
    Event ev = std::move(heap_.back());
    heap_.pop_back();
    now_ = ev.time;

    switch (ev.kind) {
      case Kind::timer:
        ++stats_.timers;
        dispatch(ev);
        return Processed{ev.id, ev.time, ev.to, true, true};
      case Kind::drain:
        return drain(ev);
      case Kind::message:
        break;
    }
    if (ev.to.is_node()) {
      const auto n = ev.to.node();
      if (cfg_.faults.crashed(n, now_)) {
        record_drop(ev.from, ev.to, DropReason::crash, ev.payload);
        return Processed{ev.id, ev.time, ev.to, false, false};
      }
      if (service_us_ > 0) {
        const auto idx = index(n);
        if (busy_until_[idx] > now_ || !inbox_[idx].empty()) {
          const EventId id = ev.id;
          inbox_[idx].push_back(std::move(ev));
          if (!drain_pending_[idx]) {
            drain_pending_[idx] = true;
            push(Event{busy_until_[idx], next_id_++, Kind::drain, Address::of(n), Address::of(n), Payload{}});
          }
          return Processed{id, now_, Address::of(n), false, false};
        }
        busy_until_[idx] = now_ + service_us_;
      }
    }
    dispatch(ev);
    return Processed{ev.id, ev.time, ev.to, false, true};
  }

  /// Runs every event with time <= horizon.
  void run_until(SimTime horizon) {
    while (!heap_.empty() && heap_.front().time <= horizon) step();
    now_ = std::max(now_, horizon);
  }

  bool crashed(NodeId n) const { return cfg_.faults.crashed(n, now_); }

  /// True when a message sent now from `a` would not be cut by a partition
  /// and the destination node (if any) is up.
  bool reachable(Address a, Address b) const {
    if (cfg_.faults.separated(a.dc, b.dc, now_)) return false;
    if (b.is_node() && cfg_.faults.crashed(b.node(), now_)) return false;
    if (a.is_node() && cfg_.faults.crashed(a.node(), now_)) return false;
    return true;
  }

  /// Skewed, strictly increasing physical clock of a node.
  SimTime physical_clock(NodeId n) {
    auto& c = clocks_[index(n)];
    double skew = c.offset + c.drift * static_cast<double>(now_);
    skew = std::clamp(skew, -c.limit, c.limit);
    const double raw_d = static_cast<double>(now_) + skew;
    const SimTime raw = raw_d <= 0.0 ? 0 : static_cast<SimTime>(std::llround(raw_d));
    const SimTime v = c.issued ? std::max(raw, c.last + 1) : raw;
    c.last = v;
    c.issued = true;
    return v;
  }

  /// Skew-only view of the clock, without advancing the sub-tick counter.
  std::int64_t clock_offset(NodeId n) const {
    const auto& c = clocks_[index(n)];
    double skew = std::clamp(c.offset + c.drift * static_cast<double>(now_), -c.limit, c.limit);
    return static_cast<std::int64_t>(std::llround(skew));
  }

  std::size_t index(NodeId n) const { return static_cast<std::size_t>(n.dc) * cfg_.partitions_per_dc + n.partition; }

 private:
  enum class Kind : std::uint8_t { message, timer, drain };

  struct Event {
    SimTime time;
    EventId id;
    Kind kind;
    Address from;
    Address to;
    Payload payload;
  };

  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      return a.time != b.time ? a.time > b.time : a.id > b.id;
    }
  };

  struct Clock {
    double offset = 0.0;
    double drift = 0.0;  // µs per µs
    double limit = 0.0;
    SimTime last = 0;
    bool issued = false;
  };

  struct PairHash {
    std::size_t operator()(const std::pair<std::uint64_t, std::uint64_t>& p) const noexcept {
      return std::hash<std::uint64_t>{}(p.first * 0x9e3779b97f4a7c15ULL ^ p.second);
    }
  };

  void init_clocks() {
    Rng rng(cfg_.clock.seed);
    const double s = static_cast<double>(cfg_.clock.max_skew);
    for (std::uint32_t dc = 0; dc < cfg_.num_dcs; ++dc) {
      for (std::uint32_t p = 0; p < cfg_.partitions_per_dc; ++p) {
        auto& c = clocks_[index({dc, p})];
        // 10% headroom absorbs the sub-tick counter.
        c.limit = 0.9 * s;
        c.offset = rng.uniform(-c.limit, c.limit);
        c.drift = rng.uniform(-cfg_.clock.drift_ppm, cfg_.clock.drift_ppm) * 1e-6;
        if (s == 0.0) c.offset = c.drift = 0.0;
      }
    }
    for (const auto& [node, off] : cfg_.clock.fixed_offsets) {
      if (node.dc >= cfg_.num_dcs || node.partition >= cfg_.partitions_per_dc)
        throw ConfigError("clock.fixed_offsets", "unknown node");
      if (static_cast<double>(off < 0 ? -off : off) > s)
        throw ConfigError("clock.fixed_offsets", "offset exceeds max_skew");
      auto& c = clocks_[index(node)];
      c.offset = static_cast<double>(off);
      c.drift = 0.0;
      c.limit = s;
    }
  }

  EventId push(Event ev) {
    const EventId id = ev.id;
    heap_.push_back(std::move(ev));
    std::push_heap(heap_.begin(), heap_.end(), Later{});
    return id;
  }

  std::optional<Processed> drain(const Event& marker) {
    const auto n = marker.to.node();
    const auto idx = index(n);
    auto& q = inbox_[idx];
    while (!q.empty()) {
      Event ev = std::move(q.front());
      q.pop_front();
      if (cfg_.faults.crashed(n, now_)) {
        record_drop(ev.from, ev.to, DropReason::crash, ev.payload);
        continue;
      }
      busy_until_[idx] = now_ + service_us_;
      if (!q.empty()) {
        push(Event{busy_until_[idx], next_id_++, Kind::drain, marker.to, marker.to, Payload{}});
      } else {
        drain_pending_[idx] = false;
      }
      ev.time = now_;
      dispatch(ev);
      return Processed{ev.id, now_, ev.to, false, true};
    }
    drain_pending_[idx] = false;
    return Processed{marker.id, now_, marker.to, false, false};
  }

  void dispatch(Event& ev) {
    const std::size_t type = type_of(ev.payload);
    if (!ev_is_timer(ev)) {
      ++stats_.dispatched;
      if (stats_.dispatched_by_type.size() <= type) stats_.dispatched_by_type.resize(type + 1, 0);
      ++stats_.dispatched_by_type[type];
    }
    fold(ev.time);
    fold(ev.id);
    fold(ev.to.packed());
    fold(ev.from.packed());
    fold(type);
    if (handler_) {
      Delivery d{ev.id, ev.time, ev.from, ev.to, ev.kind == Kind::timer, std::move(ev.payload)};
      handler_(d);
    }
  }

  static bool ev_is_timer(const Event& ev) { return ev.kind == Kind::timer; }

  static std::size_t type_of(const Payload& p) {
    if constexpr (requires { p.index(); }) {
      return p.index();
    } else {
      return 0;
    }
  }

  void record_drop(Address from, Address to, DropReason why, const Payload& p) {
    switch (why) {
      case DropReason::partition: ++stats_.dropped_partition; break;
      case DropReason::loss: ++stats_.dropped_loss; break;
      case DropReason::crash: ++stats_.dropped_crash; break;
    }
    fold(0xd50bULL ^ static_cast<std::uint64_t>(why));
    if (cfg_.record_drops) drops_.push_back(DropRecord{now_, from, to, why, type_of(p)});
  }

  void fold(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      digest_ ^= (v >> (8 * i)) & 0xff;
      digest_ *= 0x100000001b3ULL;
    }
  }

  KernelConfig cfg_;
  Rng net_rng_;
  std::size_t node_count_;
  SimTime now_ = 0;
  EventId next_id_ = 1;
  SimTime service_us_ = 0;
  std::vector<Event> heap_;
  std::vector<SimTime> busy_until_;
  std::vector<std::deque<Event>> inbox_;
  std::vector<bool> drain_pending_;
  std::vector<Clock> clocks_;
  std::unordered_map<std::pair<std::uint64_t, std::uint64_t>, SimTime, PairHash> channel_tail_;
  Handler handler_;
  Stats stats_;
  std::vector<DropRecord> drops_;
  std::uint64_t digest_ = 0xcbf29ce484222325ULL;
};

}  // namespace clab
