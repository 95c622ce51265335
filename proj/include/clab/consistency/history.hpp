#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "clab/sim/types.hpp"

namespace clab::consistency {

using ProcessId = std::uint32_t;
using OpId = std::uint64_t;

enum class EventKind : std::uint8_t { call, response };
enum class OpKind : std::uint8_t { get, put };

/// One call or response event. PUT calls carry the written value, GET
/// responses carry the returned value; the other two kinds carry none.
struct HistoryEvent {
  EventKind kind = EventKind::call;
  ProcessId process = 0;
  Key object = 0;
  OpKind op = OpKind::get;
  std::optional<Value> value;
  OpId op_id = 0;

  friend bool operator==(const HistoryEvent&, const HistoryEvent&) = default;
};

class MalformedHistory : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A finite sequence of call and response events.
struct History {
  std::vector<HistoryEvent> events;

  void put_call(ProcessId p, Key k, Value v, OpId id) {
    events.push_back({EventKind::call, p, k, OpKind::put, v, id});
  }
  void put_response(ProcessId p, Key k, OpId id) {
    events.push_back({EventKind::response, p, k, OpKind::put, std::nullopt, id});
  }
  void get_call(ProcessId p, Key k, OpId id) {
    events.push_back({EventKind::call, p, k, OpKind::get, std::nullopt, id});
  }
  void get_response(ProcessId p, Key k, Value v, OpId id) {
    events.push_back({EventKind::response, p, k, OpKind::get, v, id});
  }

  /// Appends a complete PUT (call immediately followed by its response).
  void put(ProcessId p, Key k, Value v, OpId id) {
    put_call(p, k, v, id);
    put_response(p, k, id);
  }
  /// Appends a complete GET.
  void get(ProcessId p, Key k, Value v, OpId id) {
    get_call(p, k, id);
    get_response(p, k, v, id);
  }

  bool empty() const { return events.empty(); }
  friend bool operator==(const History&, const History&) = default;
};

/// An operation assembled from its call and (optional) response.
struct Operation {
  OpId id = 0;
  ProcessId process = 0;
  OpKind kind = OpKind::get;
  Key key = 0;
  Value value = kInitialValue;  // written value for PUT, returned value for GET
  std::size_t call_pos = 0;
  std::optional<std::size_t> resp_pos;

  bool pending() const { return !resp_pos.has_value(); }
  friend bool operator==(const Operation&, const Operation&) = default;
};

/// Checks well-formedness: responses match an earlier call on the same
/// process and object, op ids are used at most once per event kind, and no
/// process issues a call while one of its calls is outstanding.
/// Throws MalformedHistory.
void validate(const History& h);

/// Operations in call order. Validates first.
std::vector<Operation> operations(const History& h);

/// The maximal subsequence made of calls that have a matching response and
/// those responses.
History complete(const History& h);

/// H|p
History process_subhistory(const History& h, ProcessId p);

/// Replays `ops` as a sequential history against the read/write
/// specification: every GET must return the value of the most recent PUT to
/// its key, or the initial value. Returns the position of the first illegal
/// GET, or nullopt when legal.
std::optional<std::size_t> first_illegal_read(const std::vector<Operation>& ops);

/// Renders operations as a sequential history (each call followed by its response).
History as_sequential(const std::vector<Operation>& ops);

}  // namespace clab::consistency
