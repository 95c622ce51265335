#pragma once

// Independent replay of checker witnesses against the sequential
// specification and each model's ordering rules.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "clab/consistency/checkers.hpp"
#include "support/oracle.hpp"

namespace witness {

using clab::consistency::History;
using clab::consistency::Model;
using clab::consistency::Verdict;

/// nullopt when every witness of a satisfied verdict is sound, else a reason.
inline std::optional<std::string> problem(const History& h, const Verdict& v, Model m) {
  if (!v.satisfied) return std::string("verdict is not satisfied");
  const auto all = oracle::extract(h);

  // Canonical extension: completed ops plus pending PUTs that some GET read.
  std::vector<oracle::Op> ops;
  for (const auto& op : all) {
    bool keep = op.resp >= 0;
    if (!keep && op.put) {
      keep = std::any_of(all.begin(), all.end(), [&](const oracle::Op& g) {
        return !g.put && g.resp >= 0 && g.key == op.key && g.value == op.value;
      });
    }
    if (keep) ops.push_back(op);
  }
  std::map<std::uint64_t, std::size_t> at;
  for (std::size_t i = 0; i < ops.size(); ++i) at[ops[i].id] = i;

  // Causal order: program order plus reads-from, transitively closed.
  const std::size_t n = ops.size();
  std::vector<std::vector<bool>> before(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      if (ops[i].process == ops[j].process && ops[i].call < ops[j].call) before[i][j] = true;
      if (ops[i].put && !ops[j].put && ops[i].key == ops[j].key && ops[i].value == ops[j].value) before[i][j] = true;
    }
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (before[i][k] && before[k][j]) before[i][j] = true;

  std::set<std::uint32_t> processes;
  for (const auto& op : ops) processes.insert(op.process);
  const bool per_process = m == Model::causal || m == Model::pram;
  if (!per_process && (v.witnesses.size() > 1 || (v.witnesses.empty() && n > 0)))
    return std::string("expected one witness");

  std::set<std::uint32_t> covered;
  for (const auto& w : v.witnesses) {
    std::vector<std::size_t> seq;
    for (const auto& op : w.sequence) {
      auto it = at.find(op.id);
      if (it == at.end()) return "witness contains op " + std::to_string(op.id) + " outside the extension";
      seq.push_back(it->second);
    }
    std::set<std::size_t> expected;
    for (std::size_t i = 0; i < n; ++i) {
      if (!per_process || ops[i].put) expected.insert(i);
      if (per_process && w.process && ops[i].process == *w.process) expected.insert(i);
    }
    if (per_process) {
      if (!w.process) return std::string("per-process witness without a process");
      covered.insert(*w.process);
    }
    if (std::set<std::size_t>(seq.begin(), seq.end()) != expected || seq.size() != expected.size())
      return std::string("witness does not cover exactly the required operations");

    std::map<std::uint64_t, std::uint64_t> store;
    for (std::size_t idx : seq) {
      const auto& op = ops[idx];
      if (op.put) {
        store[op.key] = op.value;
      } else if ((store.count(op.key) ? store[op.key] : 0) != op.value) {
        return "illegal GET op " + std::to_string(op.id);
      }
    }
    for (std::size_t a = 0; a < seq.size(); ++a) {
      for (std::size_t b = a + 1; b < seq.size(); ++b) {
        const auto& first = ops[seq[a]];
        const auto& second = ops[seq[b]];
        if (first.process == second.process && second.call < first.call) return std::string("program order broken");
        if (m == Model::linearizable && second.resp >= 0 && second.resp < first.call)
          return std::string("real-time order broken");
        if (m == Model::causal && before[seq[b]][seq[a]]) return std::string("causal order broken");
      }
    }
  }
  if (per_process && !std::includes(covered.begin(), covered.end(), processes.begin(), processes.end()))
    return std::string("missing a per-process witness");
  return std::nullopt;
}

}  // namespace witness
