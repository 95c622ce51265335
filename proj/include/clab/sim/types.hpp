#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <ostream>

namespace clab {

/// Virtual time in microseconds.
using SimTime = std::uint64_t;

inline constexpr SimTime kMillisecond = 1000;
inline constexpr SimTime kSecond = 1000 * kMillisecond;

using Key = std::uint64_t;
using Value = std::uint64_t;

/// Every key reads as this value before its first PUT.
inline constexpr Value kInitialValue = 0;

using EventId = std::uint64_t;

/// A storage server: one partition inside one datacenter.
struct NodeId {
  std::uint32_t dc = 0;
  std::uint32_t partition = 0;

  friend constexpr auto operator<=>(const NodeId&, const NodeId&) = default;
};

inline std::ostream& operator<<(std::ostream& os, const NodeId& n) {
  return os << n.dc << ':' << n.partition;
}

/// A client process living in one datacenter.
struct ClientId {
  std::uint32_t dc = 0;
  std::uint32_t index = 0;

  friend constexpr auto operator<=>(const ClientId&, const ClientId&) = default;
};

/// Message endpoint; either a server node or a client.
struct Address {
  enum class Kind : std::uint8_t { node, client };

  Kind kind = Kind::node;
  std::uint32_t dc = 0;
  std::uint32_t index = 0;

  static constexpr Address of(NodeId n) { return {Kind::node, n.dc, n.partition}; }
  static constexpr Address of(ClientId c) { return {Kind::client, c.dc, c.index}; }

  constexpr bool is_node() const { return kind == Kind::node; }
  constexpr bool is_client() const { return kind == Kind::client; }
  constexpr NodeId node() const { return {dc, index}; }
  constexpr ClientId client() const { return {dc, index}; }

  constexpr std::uint64_t packed() const {
    return (static_cast<std::uint64_t>(kind) << 63) | (static_cast<std::uint64_t>(dc) << 32) | index;
  }

  friend constexpr auto operator<=>(const Address&, const Address&) = default;
};

}  // namespace clab

template <>
struct std::hash<clab::NodeId> {
  std::size_t operator()(const clab::NodeId& n) const noexcept {
    return std::hash<std::uint64_t>{}((static_cast<std::uint64_t>(n.dc) << 32) | n.partition);
  }
};
