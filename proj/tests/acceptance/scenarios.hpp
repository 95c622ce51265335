#pragma once

#include <string>

#include "clab/bench/experiment.hpp"
#include "criteria.hpp"

namespace acceptance {

/// NTT matrix used throughout: A-B 2.5 ms, A-C and B-C 40 ms.
clab::NetworkModel three_dc_network(double jitter);

/// Randomized fault run: 3 DCs, about 10^4 operations, 10% jitter, one or
/// two DC partitions and one or two node crashes, all healed before the end.
clab::bench::ExperimentConfig fault_run(clab::proto::ProtocolKind kind, std::uint64_t seed, std::uint32_t partitions);

struct CausalRuns {
  int runs = 0;
  int trace_violations = 0;
  int sample_violations = 0;
  int invariant_failures = 0;
  std::size_t samples = 0;
  std::size_t ops = 0;
  std::string first_problem;

  bool clean() const { return runs > 0 && trace_violations == 0 && sample_violations == 0 && invariant_failures == 0; }
  std::string summary() const;
};

/// Runs fault scenarios and checks dependency visibility plus `samples`
/// causal sub-history checks per run.
CausalRuns check_causal_runs(clab::proto::ProtocolKind kind, const clab::proto::ProtocolOptions* overrides, int runs,
                             std::size_t samples);

}  // namespace acceptance
