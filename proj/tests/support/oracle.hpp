#pragma once

// Brute-force consistency oracles used only by tests. They follow the
// definitions literally: enumerate every extension choice for pending PUTs,
// every permutation of the resulting operations, and test each ordering.
// Nothing here shares code with the library deciders.

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <vector>

#include "clab/consistency/history.hpp"

namespace oracle {

using clab::consistency::EventKind;
using clab::consistency::History;
using clab::consistency::OpKind;

struct Op {
  std::uint64_t id;
  std::uint32_t process;
  bool put;
  std::uint64_t key;
  std::uint64_t value;
  int call;
  int resp;  // -1 when pending
};

inline std::vector<Op> extract(const History& h) {
  std::vector<Op> ops;
  for (int i = 0; i < static_cast<int>(h.events.size()); ++i) {
    const auto& e = h.events[i];
    if (e.kind == EventKind::call) {
      ops.push_back({e.op_id, e.process, e.op == OpKind::put, e.object, e.value.value_or(0), i, -1});
    } else {
      for (auto& op : ops) {
        if (op.id == e.op_id) {
          op.resp = i;
          if (!op.put) op.value = *e.value;
        }
      }
    }
  }
  return ops;
}

/// Every GET returns the latest preceding PUT on its key, or 0.
inline bool legal(const std::vector<Op>& seq) {
  std::map<std::uint64_t, std::uint64_t> store;
  for (const auto& op : seq) {
    if (op.put) {
      store[op.key] = op.value;
    } else if ((store.contains(op.key) ? store[op.key] : 0) != op.value) {
      return false;
    }
  }
  return true;
}

/// All extensions of the history: completed ops plus any subset of pending PUTs.
inline std::vector<std::vector<Op>> extensions(const std::vector<Op>& ops) {
  std::vector<Op> done;
  std::vector<Op> pending_puts;
  for (const auto& op : ops) {
    if (op.resp >= 0) {
      done.push_back(op);
    } else if (op.put) {
      pending_puts.push_back(op);
    }
  }
  std::vector<std::vector<Op>> out;
  for (std::uint32_t mask = 0; mask < (1u << pending_puts.size()); ++mask) {
    auto ext = done;
    for (std::size_t i = 0; i < pending_puts.size(); ++i)
      if (mask & (1u << i)) ext.push_back(pending_puts[i]);
    std::sort(ext.begin(), ext.end(), [](const Op& a, const Op& b) { return a.call < b.call; });
    out.push_back(std::move(ext));
  }
  return out;
}

/// Is there a permutation of `ops` that is legal and puts a before b
/// whenever must_precede(a, b)?
template <class Pred>
std::optional<std::vector<Op>> find_order(std::vector<Op> ops, Pred must_precede) {
  std::vector<int> idx(ops.size());
  std::iota(idx.begin(), idx.end(), 0);
  do {
    bool ok = true;
    for (std::size_t i = 0; i < idx.size() && ok; ++i)
      for (std::size_t j = i + 1; j < idx.size() && ok; ++j)
        if (must_precede(ops[idx[j]], ops[idx[i]])) ok = false;
    if (!ok) continue;
    std::vector<Op> seq;
    for (int i : idx) seq.push_back(ops[i]);
    if (legal(seq)) return seq;
  } while (std::next_permutation(idx.begin(), idx.end()));
  return std::nullopt;
}

inline bool program_before(const Op& a, const Op& b) { return a.process == b.process && a.call < b.call; }

inline bool linearizable(const History& h) {
  for (const auto& ext : extensions(extract(h))) {
    auto rt = [](const Op& a, const Op& b) { return program_before(a, b) || (a.resp >= 0 && a.resp < b.call); };
    if (find_order(ext, rt)) return true;
  }
  return false;
}

inline bool sequential(const History& h) {
  for (const auto& ext : extensions(extract(h))) {
    if (find_order(ext, program_before)) return true;
  }
  return false;
}

/// Causal order over one extension by Floyd-Warshall closure.
inline std::vector<std::vector<bool>> closure(const std::vector<Op>& ops) {
  const std::size_t n = ops.size();
  std::vector<std::vector<bool>> r(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (program_before(ops[i], ops[j])) r[i][j] = true;
      if (ops[i].put && !ops[j].put && ops[i].key == ops[j].key && ops[i].value == ops[j].value) r[i][j] = true;
    }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (r[i][k] && r[k][j]) r[i][j] = true;
  return r;
}

inline bool per_process_views(const History& h, bool causal) {
  const auto all = extract(h);
  for (const auto& ext : extensions(all)) {
    const auto rel = closure(ext);
    auto pos = [&](const Op& o) {
      for (std::size_t i = 0; i < ext.size(); ++i)
        if (ext[i].id == o.id) return i;
      return ext.size();
    };
    bool all_ok = true;
    std::map<std::uint32_t, bool> processes;
    for (const auto& op : all) processes[op.process] = true;
    for (const auto& [p, _] : processes) {
      std::vector<Op> view;
      for (const auto& op : ext)
        if (op.process == p || op.put) view.push_back(op);
      auto pred = [&](const Op& a, const Op& b) {
        return causal ? static_cast<bool>(rel[pos(a)][pos(b)]) : program_before(a, b);
      };
      if (!find_order(view, pred)) {
        all_ok = false;
        break;
      }
    }
    if (all_ok) return true;
  }
  return false;
}

inline bool causal(const History& h) { return per_process_views(h, true); }
inline bool pram(const History& h) { return per_process_views(h, false); }

}  // namespace oracle
