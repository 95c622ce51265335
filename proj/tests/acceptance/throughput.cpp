#include <cmath>
#include <map>
#include <sstream>

#include "clab/bench/sweep.hpp"
#include "scenarios.hpp"

namespace acceptance {

using namespace clab;
using namespace clab::bench;
using proto::ProtocolKind;

namespace {

// Saturating load: 8 closed-loop clients per partition in every DC.
ExperimentConfig saturated(std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.seed = seed;
  cfg.options.topology.num_dcs = 3;
  cfg.network = three_dc_network(0.1);
  cfg.clock.max_skew = kMillisecond;
  cfg.workload.clients_per_partition = 8;
  cfg.duration = 200 * kMillisecond;
  cfg.warmup = 50 * kMillisecond;
  cfg.drain = 200 * kMillisecond;
  cfg.record_history = false;
  return cfg;
}

using Table = std::map<std::string, std::map<ProtocolKind, double>>;

Table throughput_table(const std::vector<SweepRow>& rows) {
  Table t;
  for (const auto& r : rows) t[r.value][r.protocol] = r.metrics.throughput;
  return t;
}

double gap(const std::map<ProtocolKind, double>& row) {
  const double gr = row.at(ProtocolKind::gentlerain);
  return (gr - row.at(ProtocolKind::cops)) / gr;
}

std::string fixed(double v, int digits = 3) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(digits);
  out << v;
  return out.str();
}

}  // namespace

Outcome throughput_vs_partitions() {
  auto cfg = saturated(1);
  cfg.workload.pattern = Pattern::read_all_write_one;
  const std::vector<std::string> points{"1", "2", "4", "8", "16", "32"};
  const auto table = throughput_table(run_sweep(cfg, Axis::partitions, points));

  bool gr_ge_cops = true;
  bool gap_monotone = true;
  bool eventual_close = true;
  double last_gap = -1.0;
  std::ostringstream detail;
  detail << "gap(P)";
  for (const auto& p : points) {
    const auto& row = table.at(p);
    const double g = gap(row);
    gr_ge_cops = gr_ge_cops && row.at(ProtocolKind::gentlerain) >= row.at(ProtocolKind::cops);
    gap_monotone = gap_monotone && g >= last_gap;
    eventual_close = eventual_close && row.at(ProtocolKind::eventual) >= 0.97 * row.at(ProtocolKind::gentlerain);
    last_gap = g;
    detail << " " << p << ":" << fixed(g) << " ev/gr=" << fixed(row.at(ProtocolKind::eventual) / row.at(ProtocolKind::gentlerain));
  }
  const auto& one = table.at("1");
  const double at_one = std::abs(one.at(ProtocolKind::gentlerain) - one.at(ProtocolKind::cops)) /
                        std::max(one.at(ProtocolKind::gentlerain), one.at(ProtocolKind::cops));
  const bool equal_at_one = at_one <= 0.05;
  detail << "; gr>=cops " << (gr_ge_cops ? "yes" : "no") << ", |gr-cops| at P=1 " << fixed(at_one, 4)
         << ", gap non-decreasing " << (gap_monotone ? "yes" : "no") << ", eventual>=0.97*gr "
         << (eventual_close ? "yes" : "no");
  return {gr_ge_cops && equal_at_one && gap_monotone && eventual_close, detail.str()};
}

Outcome throughput_vs_ratio() {
  const std::vector<std::string> points{"9:1", "7:3", "5:5", "3:7", "1:9"};
  std::vector<double> mean(points.size(), 0.0);
  const int seeds = 5;
  for (int s = 1; s <= seeds; ++s) {
    auto cfg = saturated(s);
    cfg.options.topology.partitions_per_dc = 8;
    const auto table = throughput_table(run_sweep(cfg, Axis::ratio, points));
    for (std::size_t i = 0; i < points.size(); ++i) mean[i] += gap(table.at(points[i])) / seeds;
  }
  bool monotone = true;
  std::ostringstream detail;
  detail << "mean gap over " << seeds << " seeds";
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (i > 0 && mean[i] > mean[i - 1]) monotone = false;
    detail << " " << points[i] << ":" << fixed(mean[i]);
  }
  detail << "; non-increasing toward write-heavy " << (monotone ? "yes" : "no");
  return {monotone, detail.str()};
}

}  // namespace acceptance
