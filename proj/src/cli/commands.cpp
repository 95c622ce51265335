#include "clab/cli/commands.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "clab/bench/sweep.hpp"
#include "clab/cli/config.hpp"
#include "clab/consistency/checkers.hpp"
#include "clab/consistency/history_io.hpp"

namespace clab::cli {

namespace fs = std::filesystem;
using bench::ExperimentConfig;

namespace {

std::string ids(const std::vector<consistency::VersionId>& v) {
  if (v.empty()) return "-";
  std::string out;
  for (auto id : v) out += (out.empty() ? "" : ",") + std::to_string(id);
  return out;
}

void apply_seed_override(ExperimentConfig& cfg) {
  const char* env = std::getenv("CONSISTENCY_LAB_SEED");
  if (!env || !*env) return;
  char* end = nullptr;
  const auto seed = std::strtoull(env, &end, 10);
  if (*end != '\0') throw ConfigError("CONSISTENCY_LAB_SEED", "must be an unsigned integer");
  cfg.seed = seed;
}

ExperimentConfig load(const std::string& path) {
  auto cfg = load_config(path);
  apply_seed_override(cfg);
  return cfg;
}

void write_file(const fs::path& path, const std::string& body) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << body;
}

// metrics.csv, history.txt, trace.txt and the effective config.
void write_artifacts(const fs::path& dir, std::string_view protocol, std::string_view point,
                     const bench::ExperimentResult& r, const ExperimentConfig& cfg) {
  fs::create_directories(dir);
  std::ostringstream csv;
  bench::write_csv_header(csv);
  bench::write_csv_row(csv, protocol, point, r.metrics);
  write_file(dir / "metrics.csv", csv.str());
  write_file(dir / "history.txt", consistency::format_history(r.history));
  std::ostringstream trace;
  write_trace(trace, r.trace);
  write_file(dir / "trace.txt", trace.str());
  write_file(dir / "config.ini", emit_config(cfg));
}

int report_invariants(const bench::ExperimentResult& r, std::ostream& err) {
  if (r.invariant_failures.empty()) return kOk;
  err << "invariant violated: " << r.invariant_failures.front();
  if (r.invariant_failures.size() > 1) err << " (and " << r.invariant_failures.size() - 1 << " more)";
  err << "\n";
  return kInvariant;
}

int cmd_run(const std::string& config, const std::string& out_dir, std::ostream& out, std::ostream& err) {
  const auto cfg = load(config);
  const auto r = bench::run_experiment(cfg);
  write_artifacts(out_dir, proto::to_string(cfg.protocol), "run", r, cfg);
  const auto& m = r.metrics;
  out << proto::to_string(cfg.protocol) << ": " << m.completed << " ops completed, throughput " << m.throughput
      << " ops/s, availability " << m.availability << ", mean UVL " << m.uvl_mean / 1000.0 << " ms\n"
      << "artifacts in " << out_dir << "\n";
  return report_invariants(r, err);
}

void print_op(std::ostream& out, const consistency::Operation& op) {
  out << "  p" << op.process << " " << (op.kind == consistency::OpKind::put ? "PUT" : "GET") << "(" << op.key
      << ") " << op.value << "\n";
}

int cmd_check(const std::string& path, const std::string& model_name, std::size_t max_ops, std::ostream& out) {
  const auto model = consistency::parse_model(model_name);
  if (!model) throw CLI::ValidationError("--model", "must be lin, seq, causal or pram");
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  const auto h = consistency::read_history(in);
  consistency::CheckOptions opts;
  opts.max_ops = max_ops;
  const auto v = consistency::check(h, *model, opts);
  out << consistency::to_string(*model) << ": " << (v.satisfied ? "satisfied" : "violated") << "\n";
  if (v.satisfied) {
    for (const auto& w : v.witnesses) {
      out << "witness";
      if (w.process) out << " for p" << *w.process;
      out << ":\n";
      for (const auto& op : w.sequence) print_op(out, op);
    }
    return kOk;
  }
  if (!v.reason.empty()) out << v.reason << "\n";
  out << "offending events:\n";
  consistency::write_history(out, v.violation);
  return kViolated;
}

int cmd_sweep(const std::string& config, const std::string& axis_name, const std::string& values,
              const std::string& out_dir, std::ostream& out, std::ostream& err) {
  const auto axis = bench::parse_axis(axis_name);
  if (!axis) throw ConfigError("--axis", "unknown axis '" + axis_name + "' (partitions, ratio, rw_quorum)");
  const auto items = bench::split_values(values);
  if (items.empty()) throw ConfigError("--values", "no values given");
  const auto cfg = load(config);
  for (const auto& v : items)  // fail before running anything
    for (auto p : bench::protocols_for(*axis)) bench::apply_axis(cfg, *axis, v, p).validate();

  int status = kOk;
  fs::create_directories(out_dir);
  const auto rows = bench::run_sweep(cfg, *axis, items, [&](proto::ProtocolKind p, const std::string& v,
                                                            const bench::ExperimentResult& r) {
    std::string point = v;
    for (auto& ch : point)
      if (ch == ':') ch = '-';
    const auto name = std::string(proto::to_string(p)) + "_" + point;
    write_artifacts(fs::path(out_dir) / name, proto::to_string(p), v, r, bench::apply_axis(cfg, *axis, v, p));
    out << name << ": throughput " << r.metrics.throughput << " ops/s\n";
    if (report_invariants(r, err) != kOk) status = kInvariant;
  });
  std::ostringstream csv;
  bench::write_csv(csv, rows);
  write_file(fs::path(out_dir) / "sweep.csv", csv.str());
  out << "table in " << (fs::path(out_dir) / "sweep.csv").string() << "\n";
  return status;
}

}  // namespace

void write_trace(std::ostream& out, const consistency::VisibilityTrace& trace) {
  for (const auto& v : trace.versions()) {
    out << "version " << v.id << " key " << v.key << " value " << v.value << " creator " << v.creator.dc << "."
        << v.creator.partition << " created " << v.created << " deps " << ids(v.deps) << " visible";
    for (const auto& t : v.visible_at) {
      if (t) {
        out << " " << *t;
      } else {
        out << " -";
      }
    }
    out << "\n";
  }
  for (const auto& [key, replicas] : trace.final_heads())
    for (const auto& r : replicas)
      out << "head " << key << " " << r.node.dc << "." << r.node.partition << " " << ids(r.heads) << "\n";
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulator and checkers for geo-replicated key-value stores"};
  app.require_subcommand(1);

  std::string config;
  std::string out_dir = "out";
  auto* run = app.add_subcommand("run", "Run one experiment and write its artifacts");
  run->add_option("config", config, "Experiment configuration (INI)")->required();
  run->add_option("--out", out_dir, "Output directory");

  std::string history;
  std::string model;
  std::size_t max_ops = consistency::CheckOptions{}.max_ops;
  auto* check = app.add_subcommand("check", "Check a recorded history against a consistency model");
  check->add_option("history", history, "History file")->required();
  check->add_option("--model", model, "lin, seq, causal or pram")->required();
  check->add_option("--max-ops", max_ops, "Largest history the deciders accept");

  std::string axis;
  std::string values;
  auto* sweep = app.add_subcommand("sweep", "Run one experiment per axis value and protocol");
  sweep->add_option("config", config, "Base configuration (INI)")->required();
  sweep->add_option("--axis", axis, "partitions, ratio or rw_quorum")->required();
  sweep->add_option("--values", values, "Comma-separated axis values")->required();
  sweep->add_option("--out", out_dir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return kBadInput;
  }

  try {
    if (*run) return cmd_run(config, out_dir, out, err);
    if (*check) return cmd_check(history, model, max_ops, out);
    return cmd_sweep(config, axis, values, out_dir, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
  } catch (const consistency::HistoryParseError& e) {
    err << "history error: " << e.what() << "\n";
  } catch (const consistency::BoundExceeded& e) {
    err << "bound exceeded: " << e.what() << "\n";
  } catch (const CLI::ValidationError& e) {
    err << e.what() << "\n";
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
  }
  return kBadInput;
}

}  // namespace clab::cli
