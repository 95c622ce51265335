#pragma once

#include <string>

namespace acceptance {

struct Outcome {
  bool pass = false;
  std::string detail;
};

/// Criteria 1 and 2 share one enumeration pass.
struct CheckerOutcome {
  Outcome hierarchy;
  Outcome witnesses;
};
CheckerOutcome checker_corpus();

Outcome causal_safety_under_faults();  // 3
Outcome throughput_vs_partitions();    // 4
Outcome throughput_vs_ratio();         // 5
Outcome visibility_latency();          // 6
Outcome dynamo_configurations();       // 7
Outcome hybrid_clock();                // 8
Outcome determinism();                 // 9

}  // namespace acceptance
