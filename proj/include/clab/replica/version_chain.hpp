#pragma once

#include <algorithm>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "clab/consistency/visibility.hpp"
#include "clab/replica/clocks.hpp"
#include "clab/sim/types.hpp"

namespace clab {

using consistency::VersionId;

/// Versions of one key kept sorted by a protocol's total version order
/// (`V::order()`); the newest is the head. Old versions are retained.
template <class V>
class VersionChain {
 public:
  /// Returns false if a version with the same order key is already present.
  bool install(V v) {
    auto it = std::lower_bound(versions_.begin(), versions_.end(), v,
                               [](const V& a, const V& b) { return a.order() < b.order(); });
    if (it != versions_.end() && it->order() == v.order()) return false;
    versions_.insert(it, std::move(v));
    return true;
  }

  bool empty() const { return versions_.empty(); }
  const V* head() const { return versions_.empty() ? nullptr : &versions_.back(); }

  /// Newest version satisfying `visible`, or null for the initial value.
  template <class Pred>
  const V* latest_where(Pred visible) const {
    for (auto it = versions_.rbegin(); it != versions_.rend(); ++it)
      if (visible(*it)) return &*it;
    return nullptr;
  }

  template <class OrderKey>
  bool contains(const OrderKey& k) const {
    auto it = std::lower_bound(versions_.begin(), versions_.end(), k,
                               [](const V& a, const OrderKey& b) { return a.order() < b; });
    return it != versions_.end() && it->order() == k;
  }

  const std::vector<V>& versions() const { return versions_; }

 private:
  std::vector<V> versions_;
};

/// Per-node store of chains.
template <class Chain>
class ChainStore {
 public:
  Chain& operator[](Key k) { return chains_[k]; }
  const Chain* find(Key k) const {
    auto it = chains_.find(k);
    return it == chains_.end() ? nullptr : &it->second;
  }
  const std::unordered_map<Key, Chain>& all() const { return chains_; }

 private:
  std::unordered_map<Key, Chain> chains_;
};

/// One Dynamo version: a value stamped with a vector clock.
struct Sibling {
  Value value = kInitialValue;
  VectorClock clock;
  VersionId trace_id = 0;
  /// Session Lamport stamp, a total order that extends causality.
  std::uint64_t stamp = 0;
};

/// Causally maximal versions of one key. Dominated versions are pruned.
class SiblingSet {
 public:
  /// Returns true if the set changed.
  bool install(const Sibling& s) {
    for (const auto& cur : heads_) {
      const auto o = vc_compare(s.clock, cur.clock);
      if (o == VcOrder::before || o == VcOrder::equal) return false;
    }
    std::erase_if(heads_, [&](const Sibling& cur) { return vc_compare(cur.clock, s.clock) == VcOrder::before; });
    heads_.push_back(s);
    return true;
  }

  const std::vector<Sibling>& heads() const { return heads_; }
  bool empty() const { return heads_.empty(); }

  /// Merge of all sibling clocks, used as the context of a follow-up write.
  VectorClock merged_clock() const {
    VectorClock vc;
    for (const auto& s : heads_) vc.merge(s.clock);
    return vc;
  }

  /// Whether `clock` is equal to or dominated by a held head.
  bool covers(const VectorClock& clock) const {
    return std::any_of(heads_.begin(), heads_.end(), [&](const Sibling& s) {
      const auto o = vc_compare(clock, s.clock);
      return o == VcOrder::before || o == VcOrder::equal;
    });
  }

 private:
  std::vector<Sibling> heads_;
};

}  // namespace clab
