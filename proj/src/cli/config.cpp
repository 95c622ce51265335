#include "clab/cli/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "clab/bench/workload.hpp"

namespace clab::cli {

namespace pt = boost::property_tree;
using bench::ExperimentConfig;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto end = s.find(sep, start);
    const auto item = trim(s.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start));
    if (!item.empty()) out.push_back(item);
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return out;
}

template <class T>
T number(const std::string& field, std::string_view text) {
  T v{};
  const auto s = trim(text);
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty())
    throw ConfigError(field, "'" + s + "' is not a valid number");
  return v;
}

bool boolean(const std::string& field, const std::string& text) {
  if (text == "true" || text == "on" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "off" || text == "0" || text == "no") return false;
  throw ConfigError(field, "'" + text + "' is not a boolean");
}

NodeId node_id(const std::string& field, const std::string& text) {
  const auto parts = split(text, '.');
  if (parts.size() != 2) throw ConfigError(field, "node '" + text + "' must look like <dc>.<partition>");
  return NodeId{number<std::uint32_t>(field, parts[0]), number<std::uint32_t>(field, parts[1])};
}

// "<what>@<start>-<end>"
template <class F>
void interval(const std::string& field, const std::string& text, F&& with) {
  const auto at = text.find('@');
  const auto dash = text.find('-', at == std::string::npos ? 0 : at);
  if (at == std::string::npos || dash == std::string::npos)
    throw ConfigError(field, "'" + text + "' must look like <target>@<start_us>-<end_us>");
  with(trim(text.substr(0, at)), number<SimTime>(field, text.substr(at + 1, dash - at - 1)),
       number<SimTime>(field, text.substr(dash + 1)));
}

std::string join_u32(const std::vector<std::uint32_t>& v, char sep) {
  std::string out;
  for (auto x : v) {
    if (!out.empty()) out += sep;
    out += std::to_string(x);
  }
  return out;
}

std::string format_double(double d) {
  std::ostringstream out;
  out.precision(17);
  out << d;
  return out.str();
}

// Hands out settings and remembers which ones were used.
class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  template <class F>
  void get(const std::string& section, const std::string& key, F&& apply) {
    used_.insert(section + "." + key);
    const auto sec = tree_.get_child_optional(pt::ptree::path_type(section, '/'));
    if (!sec) return;
    const auto v = sec->get_optional<std::string>(pt::ptree::path_type(key, '/'));
    if (v) apply(section + "." + key, trim(*v));
  }

  void reject_unknown() const {
    for (const auto& [section, body] : tree_) {
      if (body.empty()) throw ConfigError(section, "settings must be inside a [section]");
      for (const auto& [key, _] : body) {
        if (!used_.count(section + "." + key)) throw ConfigError(section + "." + key, "unknown setting");
      }
    }
  }

 private:
  const pt::ptree& tree_;
  std::set<std::string> used_;
};

template <class T>
auto set_num(T& target) {
  return [&target](const std::string& f, const std::string& v) { target = number<T>(f, v); };
}
auto set_bool(bool& target) {
  return [&target](const std::string& f, const std::string& v) { target = boolean(f, v); };
}

}  // namespace

ExperimentConfig parse_config(std::istream& in) {
  // Boost's INI reader only knows ';' comments.
  std::ostringstream cleaned;
  for (std::string line; std::getline(in, line);) {
    const auto t = trim(line);
    if (!t.empty() && t[0] == '#') continue;
    cleaned << line << '\n';
  }
  pt::ptree tree;
  std::istringstream text(cleaned.str());
  try {
    pt::read_ini(text, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config", "line " + std::to_string(e.line()) + ": " + e.message());
  }

  ExperimentConfig c;
  Reader r(tree);
  auto& o = c.options;
  auto& t = o.topology;
  auto& w = c.workload;

  r.get("experiment", "protocol", [&](const std::string& f, const std::string& v) {
    const auto p = proto::parse_protocol(v);
    if (!p) throw ConfigError(f, "unknown protocol '" + v + "'");
    c.protocol = *p;
  });
  r.get("experiment", "seed", set_num(c.seed));
  r.get("experiment", "duration_us", set_num(c.duration));
  r.get("experiment", "warmup_us", set_num(c.warmup));
  r.get("experiment", "drain_us", set_num(c.drain));
  r.get("experiment", "client_timeout_us", set_num(c.client_timeout));
  r.get("experiment", "retry_backoff_us", set_num(c.retry_backoff));
  r.get("experiment", "max_attempts", set_num(c.max_attempts));
  r.get("experiment", "reconcile", set_bool(c.reconcile));
  r.get("experiment", "record_history", set_bool(c.record_history));

  r.get("topology", "datacenters", set_num(t.num_dcs));
  r.get("topology", "partitions", set_num(t.partitions_per_dc));
  r.get("topology", "n", set_num(t.n));
  r.get("topology", "r", set_num(t.r));
  r.get("topology", "w", set_num(t.w));
  r.get("topology", "gst_interval_us", set_num(t.gst_interval));
  r.get("topology", "capacity", set_num(t.capacity));

  r.get("protocol", "context_compaction", set_bool(o.context_compaction));
  r.get("protocol", "heartbeat_interval_us", set_num(o.heartbeat_interval));
  r.get("protocol", "clock_mode", [&](const std::string& f, const std::string& v) {
    if (v == "physical") {
      o.clock_mode = proto::ClockMode::physical;
    } else if (v == "hlc") {
      o.clock_mode = proto::ClockMode::hlc;
    } else {
      throw ConfigError(f, "must be physical or hlc");
    }
  });
  r.get("protocol", "spares", set_num(o.spares));
  r.get("protocol", "quorum_timeout_us", set_num(o.quorum_timeout));
  r.get("protocol", "handoff_interval_us", set_num(o.handoff_interval));

  // Without an explicit matrix every pair of datacenters is 20 ms apart.
  bool have_ntt = false;
  SimTime uniform_ntt = 20 * kMillisecond;
  r.get("network", "uniform_ntt_us", set_num(uniform_ntt));
  r.get("network", "ntt_us", [&](const std::string& f, const std::string& v) {
    c.network.ntt.clear();
    for (const auto& row : split(v, ';')) {
      std::vector<SimTime> cells;
      std::istringstream in(row);
      for (std::string cell; in >> cell;) cells.push_back(number<SimTime>(f, cell));
      c.network.ntt.push_back(std::move(cells));
    }
    have_ntt = true;
  });
  if (!have_ntt) c.network.ntt = NetworkModel::uniform(t.num_dcs, uniform_ntt).ntt;
  r.get("network", "jitter", set_num(c.network.jitter));
  r.get("network", "intra_dc_latency_us", set_num(c.network.intra_dc_latency));
  r.get("network", "loss_rate", set_num(c.network.loss_rate));
  r.get("network", "fifo_channels", set_bool(c.network.fifo_channels));

  r.get("clock", "max_skew_us", set_num(c.clock.max_skew));
  r.get("clock", "drift_ppm", set_num(c.clock.drift_ppm));
  r.get("clock", "offsets", [&](const std::string& f, const std::string& v) {
    for (const auto& item : split(v, ',')) {
      const auto colon = item.find(':');
      if (colon == std::string::npos) throw ConfigError(f, "'" + item + "' must look like <dc>.<partition>:<us>");
      c.clock.fixed_offsets[node_id(f, trim(item.substr(0, colon)))] =
          number<std::int64_t>(f, item.substr(colon + 1));
    }
  });

  r.get("workload", "clients_per_dc", set_num(w.clients_per_dc));
  r.get("workload", "clients_per_partition", set_num(w.clients_per_partition));
  r.get("workload", "pattern", [&](const std::string& f, const std::string& v) {
    if (v == "ratio") {
      w.pattern = bench::Pattern::ratio;
    } else if (v == "read_all_write_one") {
      w.pattern = bench::Pattern::read_all_write_one;
    } else if (v == "custom") {
      w.pattern = bench::Pattern::custom;
    } else {
      throw ConfigError(f, "must be ratio, read_all_write_one or custom");
    }
  });
  r.get("workload", "reads", set_num(w.reads));
  r.get("workload", "writes", set_num(w.writes));
  r.get("workload", "custom", [&](const std::string&, const std::string& v) { w.custom = bench::parse_custom(v); });
  r.get("workload", "keys_per_partition", set_num(w.keys_per_partition));
  r.get("workload", "distribution", [&](const std::string& f, const std::string& v) {
    if (v == "uniform") {
      w.distribution = bench::KeyDistribution::uniform;
    } else if (v == "zipf") {
      w.distribution = bench::KeyDistribution::zipf;
    } else {
      throw ConfigError(f, "must be uniform or zipf");
    }
  });
  r.get("workload", "zipf_theta", set_num(w.zipf_theta));
  r.get("workload", "ops_per_client", set_num(w.ops_per_client));
  r.get("workload", "think_time_us", set_num(w.think_time));
  r.get("workload", "fresh_session_per_op", set_bool(w.fresh_session_per_op));
  r.get("workload", "client_dcs", [&](const std::string& f, const std::string& v) {
    w.client_dcs.clear();
    for (const auto& item : split(v, ',')) w.client_dcs.push_back(number<std::uint32_t>(f, item));
  });

  r.get("faults", "partitions", [&](const std::string& f, const std::string& v) {
    for (const auto& item : split(v, ';')) {
      interval(f, item, [&](const std::string& side, SimTime s, SimTime e) {
        PartitionFault p{{}, s, e};
        for (const auto& dc : split(side, ',')) p.side.push_back(number<std::uint32_t>(f, dc));
        c.faults.partitions.push_back(std::move(p));
      });
    }
  });
  r.get("faults", "crashes", [&](const std::string& f, const std::string& v) {
    for (const auto& item : split(v, ';')) {
      interval(f, item, [&](const std::string& node, SimTime s, SimTime e) {
        c.faults.crashes.push_back({node_id(f, node), s, e});
      });
    }
  });

  r.reject_unknown();
  c.validate();
  return c;
}

ExperimentConfig parse_config_text(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open " + path);
  return parse_config(in);
}

std::string emit_config(const ExperimentConfig& c) {
  const auto& o = c.options;
  const auto& t = o.topology;
  const auto& w = c.workload;
  const auto b = [](bool v) { return v ? "true" : "false"; };
  std::ostringstream out;

  out << "[experiment]\n"
      << "protocol = " << proto::to_string(c.protocol) << "\n"
      << "seed = " << c.seed << "\n"
      << "duration_us = " << c.duration << "\n"
      << "warmup_us = " << c.warmup << "\n"
      << "drain_us = " << c.drain << "\n"
      << "client_timeout_us = " << c.client_timeout << "\n"
      << "retry_backoff_us = " << c.retry_backoff << "\n"
      << "max_attempts = " << c.max_attempts << "\n"
      << "reconcile = " << b(c.reconcile) << "\n"
      << "record_history = " << b(c.record_history) << "\n\n";

  out << "[topology]\n"
      << "datacenters = " << t.num_dcs << "\n"
      << "partitions = " << t.partitions_per_dc << "\n"
      << "n = " << t.n << "\n"
      << "r = " << t.r << "\n"
      << "w = " << t.w << "\n"
      << "gst_interval_us = " << t.gst_interval << "\n"
      << "capacity = " << t.capacity << "\n\n";

  out << "[protocol]\n"
      << "context_compaction = " << b(o.context_compaction) << "\n"
      << "heartbeat_interval_us = " << o.heartbeat_interval << "\n"
      << "clock_mode = " << (o.clock_mode == proto::ClockMode::hlc ? "hlc" : "physical") << "\n"
      << "spares = " << o.spares << "\n"
      << "quorum_timeout_us = " << o.quorum_timeout << "\n"
      << "handoff_interval_us = " << o.handoff_interval << "\n\n";

  out << "[network]\nntt_us = ";
  for (std::size_t i = 0; i < c.network.ntt.size(); ++i) {
    if (i) out << "; ";
    for (std::size_t j = 0; j < c.network.ntt[i].size(); ++j) out << (j ? " " : "") << c.network.ntt[i][j];
  }
  out << "\n"
      << "jitter = " << format_double(c.network.jitter) << "\n"
      << "intra_dc_latency_us = " << c.network.intra_dc_latency << "\n"
      << "loss_rate = " << format_double(c.network.loss_rate) << "\n"
      << "fifo_channels = " << b(c.network.fifo_channels) << "\n\n";

  out << "[clock]\n"
      << "max_skew_us = " << c.clock.max_skew << "\n"
      << "drift_ppm = " << format_double(c.clock.drift_ppm) << "\n"
      << "offsets = ";
  bool first = true;
  for (const auto& [node, off] : c.clock.fixed_offsets) {
    out << (first ? "" : ", ") << node.dc << "." << node.partition << ":" << off;
    first = false;
  }
  out << "\n\n";

  out << "[workload]\n"
      << "clients_per_dc = " << w.clients_per_dc << "\n"
      << "clients_per_partition = " << w.clients_per_partition << "\n"
      << "pattern = " << bench::to_string(w.pattern) << "\n"
      << "reads = " << w.reads << "\n"
      << "writes = " << w.writes << "\n"
      << "custom = " << bench::format_custom(w.custom) << "\n"
      << "keys_per_partition = " << w.keys_per_partition << "\n"
      << "distribution = " << bench::to_string(w.distribution) << "\n"
      << "zipf_theta = " << format_double(w.zipf_theta) << "\n"
      << "ops_per_client = " << w.ops_per_client << "\n"
      << "think_time_us = " << w.think_time << "\n"
      << "fresh_session_per_op = " << b(w.fresh_session_per_op) << "\n"
      << "client_dcs = " << join_u32(w.client_dcs, ',') << "\n\n";

  out << "[faults]\npartitions = ";
  for (std::size_t i = 0; i < c.faults.partitions.size(); ++i) {
    const auto& p = c.faults.partitions[i];
    out << (i ? "; " : "") << join_u32(p.side, ',') << "@" << p.start << "-" << p.end;
  }
  out << "\ncrashes = ";
  for (std::size_t i = 0; i < c.faults.crashes.size(); ++i) {
    const auto& f = c.faults.crashes[i];
    out << (i ? "; " : "") << f.node.dc << "." << f.node.partition << "@" << f.start << "-" << f.end;
  }
  out << "\n";
  return out.str();
}

}  // namespace clab::cli
