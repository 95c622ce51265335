#include "clab/bench/sweep.hpp"

#include <cstdio>
#include <ostream>
#include <sstream>

namespace clab::bench {

std::string_view to_string(Axis a) {
  switch (a) {
    case Axis::partitions: return "partitions";
    case Axis::ratio: return "ratio";
    case Axis::rw_quorum: return "rw_quorum";
  }
  return "?";
}

std::optional<Axis> parse_axis(std::string_view s) {
  for (auto a : {Axis::partitions, Axis::ratio, Axis::rw_quorum})
    if (to_string(a) == s) return a;
  return std::nullopt;
}

std::vector<proto::ProtocolKind> protocols_for(Axis a) {
  using proto::ProtocolKind;
  if (a == Axis::rw_quorum) return {ProtocolKind::dynamo};
  return {ProtocolKind::cops, ProtocolKind::gentlerain, ProtocolKind::eventual};
}

std::vector<std::string> split_values(std::string_view text) {
  std::vector<std::string> out;
  std::stringstream ss{std::string(text)};
  for (std::string item; std::getline(ss, item, ',');) {
    const auto b = item.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    const auto e = item.find_last_not_of(" \t");
    out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

namespace {

std::vector<std::uint32_t> parse_tuple(std::string_view value, std::size_t arity, const char* field) {
  std::vector<std::uint32_t> out;
  std::stringstream ss{std::string(value)};
  for (std::string item; std::getline(ss, item, ':');) {
    try {
      std::size_t used = 0;
      const auto v = std::stoul(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(static_cast<std::uint32_t>(v));
    } catch (const std::logic_error&) {
      throw ConfigError(field, "bad axis value '" + std::string(value) + "'");
    }
  }
  if (out.size() != arity) throw ConfigError(field, "bad axis value '" + std::string(value) + "'");
  return out;
}

}  // namespace

ExperimentConfig apply_axis(const ExperimentConfig& base, Axis axis, std::string_view value,
                            proto::ProtocolKind protocol) {
  ExperimentConfig cfg = base;
  cfg.protocol = protocol;
  switch (axis) {
    case Axis::partitions:
      cfg.options.topology.partitions_per_dc = parse_tuple(value, 1, "partitions_per_dc")[0];
      break;
    case Axis::ratio: {
      const auto t = parse_tuple(value, 2, "workload.ratio");
      cfg.workload.pattern = Pattern::ratio;
      cfg.workload.reads = t[0];
      cfg.workload.writes = t[1];
      break;
    }
    case Axis::rw_quorum: {
      const auto t = parse_tuple(value, 3, "rw_quorum");
      cfg.options.topology.n = t[0];
      cfg.options.topology.r = t[1];
      cfg.options.topology.w = t[2];
      break;
    }
  }
  return cfg;
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& base, Axis axis, const std::vector<std::string>& values) {
  return run_sweep(base, axis, values, [](auto, const auto&, const auto&) {});
}

void write_csv_header(std::ostream& out) {
  out << "protocol,point,throughput,uvl_mean,uvl_p99,availability,msgs_put_after,msgs_dep_check,msgs_quorum,"
         "stale_rate,unreplicated\n";
}

void write_csv_row(std::ostream& out, std::string_view protocol, std::string_view point, const Metrics& m) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%.3f,%.3f,%.3f,%.6f,%llu,%llu,%llu,%.6f,%llu", m.throughput, m.uvl_mean, m.uvl_p99,
                m.availability, static_cast<unsigned long long>(m.msgs_put_after),
                static_cast<unsigned long long>(m.msgs_dep_check), static_cast<unsigned long long>(m.msgs_quorum),
                m.stale_rate, static_cast<unsigned long long>(m.unreplicated));
  out << protocol << ',' << point << ',' << buf << '\n';
}

void write_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  write_csv_header(out);
  for (const auto& r : rows) write_csv_row(out, proto::to_string(r.protocol), r.value, r.metrics);
}

}  // namespace clab::bench
