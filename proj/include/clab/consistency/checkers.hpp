#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "clab/consistency/history.hpp"

namespace clab::consistency {

/// Hard ceiling of the exhaustive deciders (operations are tracked in 64-bit masks).
inline constexpr std::size_t kMaxDecidableOps = 64;

class BoundExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A GET's value matches more than one PUT to the same key.
class AmbiguousReadFrom : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Model { linearizable, sequential, causal, pram };

std::string_view to_string(Model m);
std::optional<Model> parse_model(std::string_view s);

struct CheckOptions {
  /// Upper bound on operations that take part in the decision.
  std::size_t max_ops = 12;
  /// Shrink violations to a 1-minimal offending subset of operations.
  bool minimize = true;
};

/// A legal sequential ordering. For causal and PRAM checks there is one per
/// process, covering that process's operations plus every PUT.
struct Witness {
  std::optional<ProcessId> process;
  std::vector<Operation> sequence;
};

struct Verdict {
  bool satisfied = false;
  std::vector<Witness> witnesses;
  /// Offending events (calls and responses) when not satisfied.
  History violation;
  std::string reason;
};

/// Smallest transitively closed relation containing program order and
/// writes-into-reads edges.
struct CausalRelation {
  std::vector<std::pair<OpId, OpId>> edges;  // sorted

  bool contains(OpId before, OpId after) const;
  std::size_t size() const { return edges.size(); }
};

/// Throws AmbiguousReadFrom, MalformedHistory.
CausalRelation causal_order(const History& h);

/// Definition-level deciders. Response-less calls are handled by the
/// extension rule: a pending PUT whose value some GET returned is completed,
/// every other pending call is discarded. This is without loss of generality:
/// a pending PUT nobody read has no causal or real-time successors and can
/// always be ordered last, and a pending GET constrains nothing.
///
/// All throw BoundExceeded when more than `max_ops` operations participate.
Verdict check_linearizable(const History& h, const CheckOptions& opts = {});
Verdict check_sequential(const History& h, const CheckOptions& opts = {});
/// Also throws AmbiguousReadFrom.
Verdict check_causal(const History& h, const CheckOptions& opts = {});
Verdict check_pram(const History& h, const CheckOptions& opts = {});

Verdict check(const History& h, Model m, const CheckOptions& opts = {});

}  // namespace clab::consistency
