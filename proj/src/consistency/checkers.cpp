#include "clab/consistency/checkers.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include <boost/container/static_vector.hpp>
#include <boost/dynamic_bitset.hpp>

namespace clab::consistency {
namespace {

using boost::container::static_vector;
using Mask = std::uint64_t;

constexpr std::size_t kScanLimit = 2 * kMaxDecidableOps;

constexpr Mask bit(std::size_t i) { return Mask{1} << i; }

template <class F>
void for_each_bit(Mask m, F&& f) {
  while (m != 0) {
    const int i = std::countr_zero(m);
    f(static_cast<std::size_t>(i));
    m &= m - 1;
  }
}

/// Operations that take part in the decision, with precedence masks.
struct Prepared {
  static_vector<Operation, kMaxDecidableOps> ops;
  static_vector<Mask, kMaxDecidableOps> program_pred;
  static_vector<Mask, kMaxDecidableOps> realtime_pred;
  static_vector<std::uint8_t, kMaxDecidableOps> key_slot;
  std::size_t num_keys = 0;
  Mask puts = 0;
  Mask gets = 0;
  Mask all = 0;
  static_vector<std::pair<ProcessId, Mask>, kMaxDecidableOps> processes;
  /// Number of PUTs in the whole history writing each included GET's value;
  /// used for read-from ambiguity detection.
  bool ambiguous = false;
  std::string ambiguity;
};

void fail_malformed(std::size_t i, const std::string& what) {
  throw MalformedHistory("event " + std::to_string(i) + ": " + what);
}

/// Validates and assembles the canonical extension in one pass of linear
/// scans; the decidable sizes are small enough that this beats hashing.
void prepare(const History& h, std::size_t max_ops, Prepared& out) {
  static_vector<Operation, kScanLimit> raw;
  static_vector<ProcessId, kScanLimit> outstanding;

  for (std::size_t i = 0; i < h.events.size(); ++i) {
    const auto& e = h.events[i];
    if (e.kind == EventKind::call) {
      for (const auto& op : raw)
        if (op.id == e.op_id) fail_malformed(i, "op id " + std::to_string(e.op_id) + " called twice");
      if (std::find(outstanding.begin(), outstanding.end(), e.process) != outstanding.end())
        fail_malformed(i, "process " + std::to_string(e.process) + " has an outstanding call");
      if (e.op == OpKind::put && !e.value) fail_malformed(i, "PUT call without value");
      if (e.op == OpKind::get && e.value) fail_malformed(i, "GET call with value");
      if (raw.size() == raw.capacity())
        throw BoundExceeded("history has more than " + std::to_string(kScanLimit) + " operations");
      outstanding.push_back(e.process);
      raw.push_back({e.op_id, e.process, e.op, e.object, e.value.value_or(kInitialValue), i, std::nullopt});
    } else {
      auto it = std::find_if(raw.begin(), raw.end(), [&](const Operation& op) { return op.id == e.op_id; });
      if (it == raw.end()) fail_malformed(i, "response without a preceding call");
      if (it->resp_pos) fail_malformed(i, "op id " + std::to_string(e.op_id) + " answered twice");
      if (it->process != e.process || it->key != e.object || it->kind != e.op)
        fail_malformed(i, "response does not match its call");
      if (e.op == OpKind::get && !e.value) fail_malformed(i, "GET response without value");
      if (e.op == OpKind::put && e.value) fail_malformed(i, "PUT response with value");
      it->resp_pos = i;
      if (e.op == OpKind::get) it->value = *e.value;
      outstanding.erase(std::find(outstanding.begin(), outstanding.end(), e.process));
    }
  }

  auto read_by_someone = [&](const Operation& put) {
    return std::any_of(raw.begin(), raw.end(), [&](const Operation& g) {
      return g.kind == OpKind::get && !g.pending() && g.key == put.key && g.value == put.value;
    });
  };

  std::size_t included = 0;
  for (const auto& op : raw) {
    if (!op.pending() || (op.kind == OpKind::put && read_by_someone(op))) ++included;
  }
  if (included > max_ops || included > kMaxDecidableOps) {
    throw BoundExceeded("history has " + std::to_string(included) + " decidable operations; bound is " +
                        std::to_string(std::min(max_ops, kMaxDecidableOps)));
  }

  out = Prepared{};
  static_vector<Key, kMaxDecidableOps> keys;
  for (const auto& op : raw) {
    if (op.pending() && !(op.kind == OpKind::put && read_by_someone(op))) continue;
    const std::size_t idx = out.ops.size();
    out.ops.push_back(op);
    auto k = std::find(keys.begin(), keys.end(), op.key);
    if (k == keys.end()) {
      keys.push_back(op.key);
      k = keys.end() - 1;
    }
    out.key_slot.push_back(static_cast<std::uint8_t>(k - keys.begin()));
    (op.kind == OpKind::put ? out.puts : out.gets) |= bit(idx);
    out.all |= bit(idx);

    Mask po = 0;
    Mask rt = 0;
    for (std::size_t j = 0; j < idx; ++j) {
      const auto& prev = out.ops[j];
      if (prev.process == op.process) po |= bit(j);
      if (prev.resp_pos && *prev.resp_pos < op.call_pos) rt |= bit(j);
    }
    out.program_pred.push_back(po);
    out.realtime_pred.push_back(rt);

    auto p = std::find_if(out.processes.begin(), out.processes.end(),
                          [&](const auto& e) { return e.first == op.process; });
    if (p == out.processes.end()) {
      out.processes.emplace_back(op.process, bit(idx));
    } else {
      p->second |= bit(idx);
    }
  }
  out.num_keys = keys.size();

  for (const auto& g : out.ops) {
    if (g.kind != OpKind::get) continue;
    std::size_t writers = g.value == kInitialValue ? 1 : 0;
    for (const auto& w : raw)
      if (w.kind == OpKind::put && w.key == g.key && w.value == g.value) ++writers;
    if (writers > 1 && !out.ambiguous) {
      out.ambiguous = true;
      out.ambiguity = "GET op " + std::to_string(g.id) + " value " + std::to_string(g.value) +
                      " matches several writes to key " + std::to_string(g.key);
    }
  }
}

/// Depth-first search for a legal sequential order of `members` in which
/// every operation follows its `pred` mask.
///
/// An enabled GET that is legal in the current state is placed immediately:
/// it changes no state and only relaxes its successors, so any legal order
/// can be rewritten to place it there. Branching is therefore over PUTs only.
class OrderSearch {
 public:
  OrderSearch(const Prepared& p, Mask members, const Mask* pred) : p_(p), members_(members), pred_(pred) {
    store_.fill(kInitialValue);
    memo_ = std::popcount(members) > 10;
  }

  bool run() {
    if (!reads_have_sources()) return false;
    return dfs(0);
  }

  const static_vector<std::uint8_t, kMaxDecidableOps>& order() const { return order_; }

 private:
  bool reads_have_sources() const {
    bool ok = true;
    for_each_bit(members_ & p_.gets, [&](std::size_t g) {
      const auto& get = p_.ops[g];
      if (get.value == kInitialValue) return;
      bool found = false;
      for_each_bit(members_ & p_.puts, [&](std::size_t w) {
        if (p_.ops[w].key == get.key && p_.ops[w].value == get.value) found = true;
      });
      ok = ok && found;
    });
    return ok;
  }

  bool dfs(Mask placed) {
    const std::size_t mark = order_.size();
    bool progress = true;
    while (progress) {
      progress = false;
      for_each_bit(members_ & p_.gets & ~placed, [&](std::size_t g) {
        if ((pred_[g] & ~placed) == 0 && store_[p_.key_slot[g]] == p_.ops[g].value) {
          placed |= bit(g);
          order_.push_back(static_cast<std::uint8_t>(g));
          progress = true;
        }
      });
    }
    if (placed == members_) return true;

    std::string key;
    if (memo_) {
      key = memo_key(placed);
      if (failed_.contains(key)) {
        order_.resize(mark);
        return false;
      }
    }

    bool found = false;
    for_each_bit(members_ & p_.puts & ~placed, [&](std::size_t w) {
      if (found || (pred_[w] & ~placed) != 0) return;
      const auto slot = p_.key_slot[w];
      const Value saved = store_[slot];
      store_[slot] = p_.ops[w].value;
      order_.push_back(static_cast<std::uint8_t>(w));
      if (dfs(placed | bit(w))) {
        found = true;
        return;
      }
      order_.pop_back();
      store_[slot] = saved;
    });
    if (found) return true;

    if (memo_) failed_.insert(std::move(key));
    order_.resize(mark);
    return false;
  }

  std::string memo_key(Mask placed) const {
    std::string k(sizeof(Mask) + p_.num_keys * sizeof(Value), '\0');
    std::memcpy(k.data(), &placed, sizeof(Mask));
    std::memcpy(k.data() + sizeof(Mask), store_.data(), p_.num_keys * sizeof(Value));
    return k;
  }

  const Prepared& p_;
  Mask members_;
  const Mask* pred_;
  std::array<Value, kMaxDecidableOps> store_{};
  static_vector<std::uint8_t, kMaxDecidableOps> order_;
  bool memo_ = false;
  std::unordered_set<std::string> failed_;
};

Witness make_witness(const Prepared& p, const OrderSearch& s, std::optional<ProcessId> process) {
  Witness w;
  w.process = process;
  w.sequence.reserve(s.order().size());
  for (auto i : s.order()) w.sequence.push_back(p.ops[i]);
  return w;
}

/// Transitive closure of program order and reads-from over the prepared ops.
static_vector<Mask, kMaxDecidableOps> causal_ancestors(const Prepared& p) {
  static_vector<Mask, kMaxDecidableOps> anc(p.ops.size(), 0);
  for (std::size_t i = 0; i < p.ops.size(); ++i) {
    anc[i] = p.program_pred[i];
    const auto& op = p.ops[i];
    if (op.kind != OpKind::get) continue;
    for_each_bit(p.puts, [&](std::size_t w) {
      if (p.ops[w].key == op.key && p.ops[w].value == op.value) anc[i] |= bit(w);
    });
  }
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < anc.size(); ++i) {
      Mask grown = anc[i];
      for_each_bit(anc[i], [&](std::size_t j) { grown |= anc[j]; });
      if (grown != anc[i]) {
        anc[i] = grown;
        changed = true;
      }
    }
  }
  return anc;
}

Verdict decide(const History& h, Model model, const CheckOptions& opts) {
  Prepared p;
  prepare(h, opts.max_ops, p);
  Verdict v;

  if (model == Model::linearizable || model == Model::sequential) {
    static_vector<Mask, kMaxDecidableOps> pred(p.ops.size());
    for (std::size_t i = 0; i < p.ops.size(); ++i) {
      pred[i] = p.program_pred[i] | (model == Model::linearizable ? p.realtime_pred[i] : 0);
    }
    OrderSearch s(p, p.all, pred.data());
    v.satisfied = s.run();
    if (v.satisfied) {
      v.witnesses.push_back(make_witness(p, s, std::nullopt));
    } else {
      v.reason = model == Model::linearizable ? "no legal sequential order respects real-time precedence"
                                              : "no legal sequential order respects program order";
    }
    return v;
  }

  if (p.ambiguous) throw AmbiguousReadFrom(p.ambiguity);
  static_vector<Mask, kMaxDecidableOps> base;
  if (model == Model::causal) {
    base = causal_ancestors(p);
  } else {
    base.assign(p.program_pred.begin(), p.program_pred.end());
  }

  v.satisfied = true;
  for (const auto& [process, own] : p.processes) {
    const Mask members = own | p.puts;
    static_vector<Mask, kMaxDecidableOps> pred(p.ops.size());
    for (std::size_t i = 0; i < p.ops.size(); ++i) pred[i] = base[i] & members;
    OrderSearch s(p, members, pred.data());
    if (!s.run()) {
      v.satisfied = false;
      v.witnesses.clear();
      v.reason = "process " + std::to_string(process) + " has no legal view of its operations and all PUTs that " +
                 (model == Model::causal ? "respects causal order" : "respects writers' program order");
      return v;
    }
    v.witnesses.push_back(make_witness(p, s, process));
  }
  return v;
}

/// Drops one operation (its call and response) from a history.
History without(const History& h, OpId id) {
  History out;
  out.events.reserve(h.events.size());
  for (const auto& e : h.events)
    if (e.op_id != id) out.events.push_back(e);
  return out;
}

/// Greedy 1-minimal shrink: keeps removing operations while the history
/// still violates the model. PUTs that a remaining GET reads are kept so the
/// residue does not degenerate into a read of a nonexistent write.
History shrink(const History& h, Model model, const CheckOptions& opts) {
  History cur = h;
  const auto ops = operations(h);
  for (auto it = ops.rbegin(); it != ops.rend(); ++it) {
    const auto& op = *it;
    if (op.kind == OpKind::put) {
      bool read = false;
      for (const auto& e : cur.events) {
        if (e.kind == EventKind::response && e.op == OpKind::get && e.object == op.key && e.value == op.value)
          read = true;
      }
      if (read) continue;
    }
    History candidate = without(cur, op.id);
    if (candidate.events.size() == cur.events.size()) continue;
    CheckOptions inner = opts;
    inner.minimize = false;
    if (!decide(candidate, model, inner).satisfied) cur = std::move(candidate);
  }
  return cur;
}

Verdict run(const History& h, Model model, const CheckOptions& opts) {
  Verdict v = decide(h, model, opts);
  if (!v.satisfied) v.violation = opts.minimize ? shrink(h, model, opts) : h;
  return v;
}

}  // namespace

std::string_view to_string(Model m) {
  switch (m) {
    case Model::linearizable: return "lin";
    case Model::sequential: return "seq";
    case Model::causal: return "causal";
    case Model::pram: return "pram";
  }
  return "?";
}

std::optional<Model> parse_model(std::string_view s) {
  if (s == "lin" || s == "linearizable") return Model::linearizable;
  if (s == "seq" || s == "sequential") return Model::sequential;
  if (s == "causal") return Model::causal;
  if (s == "pram") return Model::pram;
  return std::nullopt;
}

bool CausalRelation::contains(OpId before, OpId after) const {
  return std::binary_search(edges.begin(), edges.end(), std::make_pair(before, after));
}

CausalRelation causal_order(const History& h) {
  const auto ops = operations(h);
  const std::size_t n = ops.size();
  std::vector<boost::dynamic_bitset<>> anc(n, boost::dynamic_bitset<>(n));

  std::unordered_map<ProcessId, std::size_t> last_of;
  std::unordered_map<Key, std::unordered_map<Value, std::vector<std::size_t>>> writers;
  for (std::size_t i = 0; i < n; ++i) {
    if (ops[i].kind == OpKind::put) writers[ops[i].key][ops[i].value].push_back(i);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto& op = ops[i];
    if (auto it = last_of.find(op.process); it != last_of.end()) {
      anc[i] = anc[it->second];
      anc[i].set(it->second);
    }
    last_of[op.process] = i;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto& op = ops[i];
    if (op.kind != OpKind::get || op.pending()) continue;
    const auto& ws = writers[op.key][op.value];
    const std::size_t sources = ws.size() + (op.value == kInitialValue ? 1 : 0);
    if (sources > 1) {
      throw AmbiguousReadFrom("GET op " + std::to_string(op.id) + " value " + std::to_string(op.value) +
                              " matches several writes to key " + std::to_string(op.key));
    }
    if (!ws.empty()) anc[i].set(ws.front());
  }
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      auto grown = anc[i];
      for (auto j = anc[i].find_first(); j != boost::dynamic_bitset<>::npos; j = anc[i].find_next(j)) grown |= anc[j];
      if (grown != anc[i]) {
        anc[i] = std::move(grown);
        changed = true;
      }
    }
  }
  CausalRelation rel;
  for (std::size_t i = 0; i < n; ++i) {
    for (auto j = anc[i].find_first(); j != boost::dynamic_bitset<>::npos; j = anc[i].find_next(j)) {
      rel.edges.emplace_back(ops[j].id, ops[i].id);
    }
  }
  std::sort(rel.edges.begin(), rel.edges.end());
  return rel;
}

Verdict check_linearizable(const History& h, const CheckOptions& opts) { return run(h, Model::linearizable, opts); }
Verdict check_sequential(const History& h, const CheckOptions& opts) { return run(h, Model::sequential, opts); }
Verdict check_causal(const History& h, const CheckOptions& opts) { return run(h, Model::causal, opts); }
Verdict check_pram(const History& h, const CheckOptions& opts) { return run(h, Model::pram, opts); }

Verdict check(const History& h, Model m, const CheckOptions& opts) { return run(h, m, opts); }

}  // namespace clab::consistency
