#include "clab/bench/sampling.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>

#include "clab/sim/rng.hpp"

namespace clab::bench {

using consistency::History;
using consistency::OpId;
using consistency::Operation;
using consistency::OpKind;
using consistency::ProcessId;

History restrict_to(const History& h, const std::vector<OpId>& ops) {
  const std::set<OpId> keep(ops.begin(), ops.end());
  History out;
  for (const auto& e : h.events)
    if (keep.count(e.op_id)) out.events.push_back(e);
  return out;
}

namespace {

struct Index {
  std::vector<Operation> ops;
  std::map<ProcessId, std::vector<std::size_t>> by_process;
  std::map<std::pair<Key, Value>, std::size_t> writer;  // (key, value) -> op position

  explicit Index(const History& h) : ops(consistency::operations(h)) {
    for (std::size_t i = 0; i < ops.size(); ++i) {
      by_process[ops[i].process].push_back(i);
      if (ops[i].kind == OpKind::put) writer[{ops[i].key, ops[i].value}] = i;
    }
  }

  std::optional<std::size_t> writer_of(const Operation& get) const {
    if (get.kind != OpKind::get || get.pending() || get.value == kInitialValue) return std::nullopt;
    auto it = writer.find({get.key, get.value});
    if (it == writer.end()) return std::nullopt;
    return it->second;
  }
};

// Adds writers until closed; false when the result would exceed `cap`.
bool close(const Index& idx, std::set<std::size_t>& chosen, std::size_t cap) {
  std::vector<std::size_t> work(chosen.begin(), chosen.end());
  while (!work.empty()) {
    const std::size_t i = work.back();
    work.pop_back();
    if (auto w = idx.writer_of(idx.ops[i]); w && chosen.insert(*w).second) {
      if (chosen.size() > cap) return false;
      work.push_back(*w);
    }
  }
  return chosen.size() <= cap;
}

}  // namespace

std::vector<History> sample_subhistories(const History& h, std::size_t count, std::size_t max_ops,
                                         std::uint64_t seed) {
  std::vector<History> out;
  const Index idx(h);
  if (idx.ops.empty() || max_ops == 0) return out;
  std::vector<ProcessId> procs;
  for (const auto& [p, _] : idx.by_process) procs.push_back(p);
  Rng rng(seed);

  const std::size_t attempts = count * 20;
  for (std::size_t a = 0; a < attempts && out.size() < count; ++a) {
    const auto& mine = idx.by_process.at(procs[rng.below(procs.size())]);
    std::size_t len = 1 + rng.below(std::min<std::size_t>(mine.size(), std::max<std::size_t>(max_ops / 2, 1)));
    const std::size_t start = rng.below(mine.size() - len + 1);
    for (; len > 0; --len) {
      std::set<std::size_t> chosen(mine.begin() + start, mine.begin() + start + len);
      // Pull in a window of a process this one read from.
      std::vector<std::size_t> sources;
      for (auto i : chosen)
        if (auto w = idx.writer_of(idx.ops[i]); w && idx.ops[*w].process != idx.ops[i].process) sources.push_back(*w);
      if (!sources.empty() && rng.below(2) == 0) {
        const auto& src = idx.ops[sources[rng.below(sources.size())]];
        const auto& theirs = idx.by_process.at(src.process);
        const auto pos = std::find_if(theirs.begin(), theirs.end(),
                                      [&](std::size_t i) { return idx.ops[i].id == src.id; }) - theirs.begin();
        const std::size_t before = rng.below(3);
        const std::size_t lo = static_cast<std::size_t>(pos) > before ? pos - before : 0;
        const std::size_t hi = std::min(theirs.size(), static_cast<std::size_t>(pos) + 1 + rng.below(2));
        std::set<std::size_t> joined = chosen;
        joined.insert(theirs.begin() + lo, theirs.begin() + hi);
        if (joined.size() <= max_ops && close(idx, joined, max_ops)) {
          chosen = std::move(joined);
        }
      }
      if (!close(idx, chosen, max_ops)) continue;
      std::vector<OpId> ids;
      for (auto i : chosen) ids.push_back(idx.ops[i].id);
      out.push_back(restrict_to(h, ids));
      break;
    }
  }
  return out;
}

}  // namespace clab::bench
