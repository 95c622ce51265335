#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "clab/consistency/history.hpp"
#include "clab/replica/clocks.hpp"
#include "clab/replica/version_chain.hpp"
#include "clab/sim/kernel.hpp"

namespace clab::proto {

using consistency::OpId;
using consistency::OpKind;

/// GentleRain timestamp. The logical part stays 0 in physical-clock mode.
struct GrStamp {
  SimTime phys = 0;
  std::uint32_t logical = 0;

  friend constexpr auto operator<=>(const GrStamp&, const GrStamp&) = default;
};

struct CopsDep {
  Key key = 0;
  LamportStamp ver;

  friend bool operator==(const CopsDep&, const CopsDep&) = default;
};

/// One Dynamo version as seen by a client.
struct DynSibling {
  Value value = kInitialValue;
  VersionId trace_id = 0;
  std::uint64_t stamp = 0;  // session Lamport stamp, used to pick among siblings
};

struct ClientRequest {
  OpId op = 0;
  OpKind kind = OpKind::get;
  Key key = 0;
  Value value = kInitialValue;
  /// Omniscient trace metadata: versions this client has observed since its last PUT.
  std::vector<VersionId> trace_deps;
  std::vector<CopsDep> cops_context;
  GrStamp gr_dep;
  GrStamp gr_gst;
  VectorClock dyn_context;
  std::uint64_t dyn_stamp = 0;
  /// Dynamo: wait for every queried replica instead of R (reconciliation reads).
  bool read_all = false;
};

struct ClientReply {
  OpId op = 0;
  bool ok = true;
  Value value = kInitialValue;
  VersionId version = 0;  // 0 for the initial value
  LamportStamp cops_ver;
  GrStamp gr_stamp;
  GrStamp gr_gst;
  std::vector<DynSibling> siblings;
  VectorClock dyn_context;
  /// Time the node spent holding the request before acting on it.
  SimTime wait = 0;
};

/// Periodic or deferred work at a node.
struct Tick {
  enum class Kind : std::uint8_t { gst, heartbeat, put_wait, quorum_timeout, handoff };
  Kind kind = Kind::gst;
  std::uint64_t arg = 0;
};

struct CopsPutAfter {
  Key key = 0;
  Value value = kInitialValue;
  std::vector<CopsDep> context;
  LamportStamp ver;
  VersionId trace_id = 0;
};

/// Asks a key's home node to answer once every listed version is visible.
struct CopsDepCheck {
  Key key = 0;
  std::vector<LamportStamp> vers;
  std::uint64_t waiter = 0;
};

struct CopsDepReply {
  std::uint64_t waiter = 0;
};

struct GrReplicate {
  std::uint64_t seq = 0;
  Key key = 0;
  Value value = kInitialValue;
  GrStamp ut;
  VersionId trace_id = 0;
  bool retransmit = false;
};

struct GrHeartbeat {
  GrStamp clock;
  std::uint64_t last_seq = 0;  // highest update sequence number sent on this channel
};

/// Minimum LST of a subtree, sent from a partition to its parent in the
/// datacenter's aggregation tree.
struct GrLst {
  GrStamp lst;
};

/// New GST, sent from the root of the aggregation tree towards the leaves.
struct GrGst {
  GrStamp gst;
};

struct GrNack {
  std::uint64_t from_seq = 0;
};

struct DynWrite {
  enum class Purpose : std::uint8_t { replicate, repair, handoff };
  std::uint64_t request = 0;
  Key key = 0;
  Sibling version;
  std::optional<NodeId> hint;
  Purpose purpose = Purpose::replicate;
};

struct DynWriteAck {
  std::uint64_t request = 0;
  Key key = 0;
  DynWrite::Purpose purpose = DynWrite::Purpose::replicate;
};

struct DynRead {
  std::uint64_t request = 0;
  Key key = 0;
};

struct DynReadReply {
  std::uint64_t request = 0;
  std::vector<Sibling> heads;
};

struct EvReplicate {
  Key key = 0;
  Value value = kInitialValue;
  LamportStamp ver;
  VersionId trace_id = 0;
};

/// Client-side timers: operation timeout and think time.
struct ClientTimer {
  enum class Kind : std::uint8_t { next_op, timeout };
  Kind kind = Kind::next_op;
  std::uint64_t token = 0;
};

using Message = std::variant<std::monostate, ClientRequest, ClientReply, Tick, CopsPutAfter, CopsDepCheck, CopsDepReply,
                             GrReplicate, GrHeartbeat, GrLst, GrGst, GrNack, DynWrite, DynWriteAck, DynRead, DynReadReply,
                             EvReplicate, ClientTimer>;

using SimKernel = Kernel<Message>;

template <class T>
constexpr std::size_t message_index() {
  return []<std::size_t... I>(std::index_sequence<I...>) {
    std::size_t idx = 0;
    ((std::is_same_v<T, std::variant_alternative_t<I, Message>> ? (idx = I, true) : false) || ...);
    return idx;
  }(std::make_index_sequence<std::variant_size_v<Message>>{});
}

}  // namespace clab::proto
