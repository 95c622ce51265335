// Acceptance suite: one PASS/FAIL line per criterion. Arguments select
// criteria by number; no arguments runs all of them.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <set>
#include <string>

#include "criteria.hpp"

namespace {

using acceptance::Outcome;

const std::map<int, std::pair<const char*, std::function<Outcome()>>>& suite() {
  static const std::map<int, std::pair<const char*, std::function<Outcome()>>> s{
      {3, {"causal safety under faults", acceptance::causal_safety_under_faults}},
      {4, {"throughput vs partitions", acceptance::throughput_vs_partitions}},
      {5, {"throughput vs GET:PUT ratio", acceptance::throughput_vs_ratio}},
      {6, {"update visibility latency", acceptance::visibility_latency}},
      {7, {"dynamo configurations", acceptance::dynamo_configurations}},
      {8, {"hybrid logical clocks", acceptance::hybrid_clock}},
      {9, {"determinism", acceptance::determinism}},
  };
  return s;
}

void print(int n, const char* name, const Outcome& o, double seconds) {
  std::printf("%s criterion %d (%s) [%.1fs]: %s\n", o.pass ? "PASS" : "FAIL", n, name, seconds, o.detail.c_str());
  std::fflush(stdout);
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
  if (wanted.empty())
    for (int i = 1; i <= 9; ++i) wanted.insert(i);

  bool ok = true;
  using clock = std::chrono::steady_clock;
  if (wanted.count(1) || wanted.count(2)) {
    const auto t0 = clock::now();
    const auto c = acceptance::checker_corpus();
    const double s = std::chrono::duration<double>(clock::now() - t0).count();
    if (wanted.count(1)) {
      const bool in_time = s <= 600.0;
      Outcome h = c.hierarchy;
      if (!in_time) h = {false, h.detail + "; exceeded 10 minutes"};
      print(1, "checker hierarchy", h, s);
      ok = ok && h.pass;
    }
    if (wanted.count(2)) {
      print(2, "witness soundness", c.witnesses, s);
      ok = ok && c.witnesses.pass;
    }
  }
  for (const auto& [n, entry] : suite()) {
    if (!wanted.count(n)) continue;
    const auto t0 = clock::now();
    Outcome o;
    try {
      o = entry.second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    print(n, entry.first, o, std::chrono::duration<double>(clock::now() - t0).count());
    ok = ok && o.pass;
  }
  return ok ? 0 : 1;
}
