#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <ostream>
#include <utility>

#include <boost/container/flat_map.hpp>

#include "clab/sim/types.hpp"

namespace clab {

/// Lamport counter tagged with the issuing node; ordered lexicographically.
struct LamportStamp {
  std::uint64_t counter = 0;
  NodeId node;

  friend constexpr auto operator<=>(const LamportStamp&, const LamportStamp&) = default;
};

inline std::ostream& operator<<(std::ostream& os, const LamportStamp& s) {
  return os << s.counter << '@' << s.node;
}

class LamportClock {
 public:
  explicit LamportClock(NodeId node = {}) : node_(node) {}

  LamportStamp issue() { return {++counter_, node_}; }
  void merge(const LamportStamp& observed) { counter_ = std::max(counter_, observed.counter); }
  std::uint64_t counter() const { return counter_; }

 private:
  NodeId node_;
  std::uint64_t counter_ = 0;
};

enum class VcOrder { before, after, equal, concurrent };

inline const char* to_string(VcOrder o) {
  switch (o) {
    case VcOrder::before: return "before";
    case VcOrder::after: return "after";
    case VcOrder::equal: return "equal";
    case VcOrder::concurrent: return "concurrent";
  }
  return "?";
}

/// Counters per coordinator node; absent entries read as 0.
class VectorClock {
 public:
  using Map = boost::container::flat_map<NodeId, std::uint64_t>;

  VectorClock() = default;
  VectorClock(std::initializer_list<std::pair<NodeId, std::uint64_t>> init) {
    for (const auto& [n, c] : init) set(n, c);
  }

  std::uint64_t get(NodeId n) const {
    auto it = entries_.find(n);
    return it == entries_.end() ? 0 : it->second;
  }
  void set(NodeId n, std::uint64_t c) {
    if (c == 0) {
      entries_.erase(n);
    } else {
      entries_[n] = c;
    }
  }
  void merge(const VectorClock& other) {
    for (const auto& [n, c] : other.entries_) set(n, std::max(get(n), c));
  }
  const Map& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

  friend bool operator==(const VectorClock&, const VectorClock&) = default;

 private:
  Map entries_;  // no zero entries, so equality is structural
};

inline VcOrder vc_compare(const VectorClock& a, const VectorClock& b) {
  bool less = false;
  bool greater = false;
  auto ia = a.entries().begin();
  auto ib = b.entries().begin();
  const auto ea = a.entries().end();
  const auto eb = b.entries().end();
  while (ia != ea || ib != eb) {
    std::uint64_t ca = 0;
    std::uint64_t cb = 0;
    if (ib == eb || (ia != ea && ia->first < ib->first)) {
      ca = (ia++)->second;
    } else if (ia == ea || ib->first < ia->first) {
      cb = (ib++)->second;
    } else {
      ca = (ia++)->second;
      cb = (ib++)->second;
    }
    less |= ca < cb;
    greater |= ca > cb;
  }
  if (less && greater) return VcOrder::concurrent;
  if (less) return VcOrder::before;
  if (greater) return VcOrder::after;
  return VcOrder::equal;
}

inline std::ostream& operator<<(std::ostream& os, const VectorClock& vc) {
  os << '{';
  bool first = true;
  for (const auto& [n, c] : vc.entries()) {
    os << (first ? "" : ",") << n << '=' << c;
    first = false;
  }
  return os << '}';
}

}  // namespace clab
