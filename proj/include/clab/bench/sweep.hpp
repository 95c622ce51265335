#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "clab/bench/experiment.hpp"

namespace clab::bench {

enum class Axis { partitions, ratio, rw_quorum };

std::string_view to_string(Axis a);
std::optional<Axis> parse_axis(std::string_view s);

/// Protocols compared along an axis: the causal pair plus the eventual
/// baseline for partitions and ratio, Dynamo alone for rw_quorum.
std::vector<proto::ProtocolKind> protocols_for(Axis a);

/// Applies one axis value ("8", "9:1", "3:2:2") to a copy of `base`.
/// Throws ConfigError for malformed values.
ExperimentConfig apply_axis(const ExperimentConfig& base, Axis axis, std::string_view value,
                            proto::ProtocolKind protocol);

struct SweepRow {
  proto::ProtocolKind protocol;
  std::string value;
  Metrics metrics;
};

/// One run per (value, protocol); every point shares the base seed.
/// `on_point` sees each finished run, e.g. to store per-point artifacts.
template <class OnPoint>
std::vector<SweepRow> run_sweep(const ExperimentConfig& base, Axis axis, const std::vector<std::string>& values,
                                OnPoint&& on_point) {
  std::vector<SweepRow> rows;
  for (const auto& v : values) {
    for (auto p : protocols_for(axis)) {
      const auto cfg = apply_axis(base, axis, v, p);
      auto result = run_experiment(cfg);
      on_point(p, v, result);
      rows.push_back({p, v, result.metrics});
    }
  }
  return rows;
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& base, Axis axis, const std::vector<std::string>& values);

/// Splits "1,2,4" into its items, dropping blanks.
std::vector<std::string> split_values(std::string_view text);

/// CSV header and rows; fixed three-decimal formatting so equal runs give equal bytes.
void write_csv_header(std::ostream& out);
void write_csv_row(std::ostream& out, std::string_view protocol, std::string_view point, const Metrics& m);
void write_csv(std::ostream& out, const std::vector<SweepRow>& rows);

}  // namespace clab::bench
