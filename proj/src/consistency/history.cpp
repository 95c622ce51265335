#include "clab/consistency/history.hpp"

#include <map>
#include <unordered_map>

namespace clab::consistency {

void validate(const History& h) {
  struct Open {
    std::size_t pos;
    Key object;
    OpKind op;
  };
  std::unordered_map<OpId, Open> open;
  std::unordered_map<OpId, bool> seen_call;
  std::unordered_map<OpId, bool> seen_resp;
  std::map<ProcessId, OpId> outstanding;

  for (std::size_t i = 0; i < h.events.size(); ++i) {
    const auto& e = h.events[i];
    const std::string at = "event " + std::to_string(i) + ": ";
    if (e.kind == EventKind::call) {
      if (seen_call[e.op_id]) throw MalformedHistory(at + "op id " + std::to_string(e.op_id) + " called twice");
      seen_call[e.op_id] = true;
      if (outstanding.contains(e.process))
        throw MalformedHistory(at + "process " + std::to_string(e.process) + " has an outstanding call");
      if (e.op == OpKind::put && !e.value) throw MalformedHistory(at + "PUT call without value");
      if (e.op == OpKind::get && e.value) throw MalformedHistory(at + "GET call with value");
      outstanding[e.process] = e.op_id;
      open[e.op_id] = {i, e.object, e.op};
    } else {
      if (seen_resp[e.op_id]) throw MalformedHistory(at + "op id " + std::to_string(e.op_id) + " answered twice");
      seen_resp[e.op_id] = true;
      auto it = open.find(e.op_id);
      if (it == open.end()) throw MalformedHistory(at + "response without a preceding call");
      const auto& c = h.events[it->second.pos];
      if (c.process != e.process || c.object != e.object || c.op != e.op)
        throw MalformedHistory(at + "response does not match its call");
      if (e.op == OpKind::get && !e.value) throw MalformedHistory(at + "GET response without value");
      if (e.op == OpKind::put && e.value) throw MalformedHistory(at + "PUT response with value");
      open.erase(it);
      outstanding.erase(e.process);
    }
  }
}

std::vector<Operation> operations(const History& h) {
  validate(h);
  std::vector<Operation> ops;
  std::unordered_map<OpId, std::size_t> index;
  for (std::size_t i = 0; i < h.events.size(); ++i) {
    const auto& e = h.events[i];
    if (e.kind == EventKind::call) {
      index[e.op_id] = ops.size();
      ops.push_back({e.op_id, e.process, e.op, e.object, e.value.value_or(kInitialValue), i, std::nullopt});
    } else {
      auto& op = ops[index.at(e.op_id)];
      op.resp_pos = i;
      if (e.op == OpKind::get) op.value = *e.value;
    }
  }
  return ops;
}

History complete(const History& h) {
  const auto ops = operations(h);
  std::unordered_map<OpId, bool> answered;
  for (const auto& op : ops) answered[op.id] = !op.pending();
  History out;
  for (const auto& e : h.events) {
    if (answered[e.op_id]) out.events.push_back(e);
  }
  return out;
}

History process_subhistory(const History& h, ProcessId p) {
  History out;
  for (const auto& e : h.events) {
    if (e.process == p) out.events.push_back(e);
  }
  return out;
}

std::optional<std::size_t> first_illegal_read(const std::vector<Operation>& ops) {
  std::unordered_map<Key, Value> store;
  for (std::size_t i = 0; i < ops.size(); ++i) {
    const auto& op = ops[i];
    if (op.kind == OpKind::put) {
      store[op.key] = op.value;
    } else {
      auto it = store.find(op.key);
      const Value current = it == store.end() ? kInitialValue : it->second;
      if (current != op.value) return i;
    }
  }
  return std::nullopt;
}

History as_sequential(const std::vector<Operation>& ops) {
  History h;
  for (const auto& op : ops) {
    if (op.kind == OpKind::put) {
      h.put(op.process, op.key, op.value, op.id);
    } else {
      h.get(op.process, op.key, op.value, op.id);
    }
  }
  return h;
}

}  // namespace clab::consistency
