#pragma once

#include <istream>
#include <string>

#include "clab/bench/experiment.hpp"

namespace clab::cli {

// Experiment configuration as an INI document:
//
//   [experiment]  protocol, seed, duration_us, warmup_us, drain_us, ...
//   [topology]    datacenters, partitions, n, r, w, gst_interval_us, capacity
//   [protocol]    context_compaction, heartbeat_interval_us, clock_mode, ...
//   [network]     ntt_us = "0 2500; 2500 0", jitter, loss_rate, ...
//   [clock]       max_skew_us, drift_ppm, offsets = "0.1:1000"
//   [workload]    pattern, reads, writes, clients_per_dc, client_dcs = "0,2", ...
//   [faults]      partitions = "2@200000-600000", crashes = "0.1@100000-250000"
//
// Every setting is optional and defaults to the library default. Lines
// starting with ';' or '#' are comments. Unknown sections or keys are errors.

/// Throws ConfigError naming the offending setting.
bench::ExperimentConfig parse_config(std::istream& in);
bench::ExperimentConfig parse_config_text(const std::string& text);
bench::ExperimentConfig load_config(const std::string& path);

/// Writes every setting; parse_config(emit_config(c)) reproduces c.
std::string emit_config(const bench::ExperimentConfig& cfg);

}  // namespace clab::cli
