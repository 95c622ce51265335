#include "clab/bench/workload.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "clab/replica/topology.hpp"

namespace clab::bench {

std::string_view to_string(Pattern p) {
  switch (p) {
    case Pattern::read_all_write_one: return "read_all_write_one";
    case Pattern::ratio: return "ratio";
    case Pattern::custom: return "custom";
  }
  return "?";
}

std::string_view to_string(KeyDistribution d) { return d == KeyDistribution::uniform ? "uniform" : "zipf"; }

std::vector<CustomStep> parse_custom(std::string_view text) {
  std::vector<CustomStep> out;
  std::stringstream ss{std::string(text)};
  for (std::string item; std::getline(ss, item, ',');) {
    item.erase(std::remove_if(item.begin(), item.end(), ::isspace), item.end());
    if (item.empty()) continue;
    CustomStep s;
    if (item[0] == 'G') {
      s.kind = OpKind::get;
    } else if (item[0] == 'P') {
      s.kind = OpKind::put;
    } else {
      throw ConfigError("workload.custom", "step '" + item + "' must start with G or P");
    }
    const auto dot = item.find('.');
    try {
      if (dot == std::string::npos) throw std::invalid_argument("no dot");
      std::size_t used = 0;
      s.partition = static_cast<std::uint32_t>(std::stoul(item.substr(1, dot - 1), &used));
      if (used != dot - 1) throw std::invalid_argument("partition");
      s.index = std::stoull(item.substr(dot + 1), &used);
      if (used != item.size() - dot - 1) throw std::invalid_argument("index");
    } catch (const std::logic_error&) {
      throw ConfigError("workload.custom", "step '" + item + "' must look like G<partition>.<index>");
    }
    out.push_back(s);
  }
  return out;
}

std::string format_custom(const std::vector<CustomStep>& steps) {
  std::string out;
  for (const auto& s : steps) {
    if (!out.empty()) out += ',';
    out += (s.kind == OpKind::get ? 'G' : 'P') + std::to_string(s.partition) + '.' + std::to_string(s.index);
  }
  return out;
}

void WorkloadSpec::validate(std::uint32_t partitions) const {
  if (clients_per_dc < 1) throw ConfigError("workload.clients_per_dc", "must be at least 1");
  if (keys_per_partition < 1) throw ConfigError("workload.keys_per_partition", "must be at least 1");
  if (pattern == Pattern::ratio && writes < 1) throw ConfigError("workload.writes", "must be at least 1");
  if (pattern == Pattern::custom) {
    if (custom.empty()) throw ConfigError("workload.custom", "custom pattern needs at least one step");
    for (const auto& s : custom) {
      if (s.partition >= partitions) throw ConfigError("workload.custom", "partition out of range");
      if (s.index >= keys_per_partition) throw ConfigError("workload.custom", "key index out of range");
    }
  }
  if (distribution == KeyDistribution::zipf && !(zipf_theta > 0.0))
    throw ConfigError("workload.zipf_theta", "must be positive");
}

Key workload_key(std::uint32_t partition, std::uint64_t index, std::uint32_t partitions) {
  return first_key_of(partition, partitions) + index;
}

WorkloadStream::WorkloadStream(const WorkloadSpec& spec, std::uint32_t partitions, std::uint64_t seed)
    : spec_(&spec), partitions_(partitions), rng_(seed) {
  if (spec.distribution == KeyDistribution::zipf) {
    zipf_cdf_.resize(spec.keys_per_partition);
    double total = 0.0;
    for (std::uint64_t i = 0; i < spec.keys_per_partition; ++i) {
      total += 1.0 / std::pow(static_cast<double>(i + 1), spec.zipf_theta);
      zipf_cdf_[i] = total;
    }
    for (auto& c : zipf_cdf_) c /= total;
  }
}

std::uint64_t WorkloadStream::pick_index() {
  if (zipf_cdf_.empty()) return rng_.below(spec_->keys_per_partition);
  const double u = rng_.uniform();
  const auto it = std::lower_bound(zipf_cdf_.begin(), zipf_cdf_.end(), u);
  return std::min<std::uint64_t>(static_cast<std::uint64_t>(it - zipf_cdf_.begin()), zipf_cdf_.size() - 1);
}

void WorkloadStream::refill() {
  round_.clear();
  pos_ = 0;
  const auto key = [&](std::uint32_t p) { return workload_key(p, pick_index(), partitions_); };
  switch (spec_->pattern) {
    case Pattern::read_all_write_one:
      for (std::uint32_t p = 0; p < partitions_; ++p) round_.push_back({OpKind::get, key(p)});
      round_.push_back({OpKind::put, key(static_cast<std::uint32_t>(rng_.below(partitions_)))});
      break;
    case Pattern::ratio: {
      for (std::uint32_t i = 0; i < spec_->reads; ++i)
        round_.push_back({OpKind::get, key(static_cast<std::uint32_t>(rng_.below(partitions_)))});
      // Distinct partitions while they last; a shuffled cycle beyond that.
      std::vector<std::uint32_t> order(partitions_);
      std::iota(order.begin(), order.end(), 0u);
      for (std::uint32_t i = 0; i < spec_->writes; ++i) {
        const std::uint32_t slot = i % partitions_;
        if (slot == 0) {
          for (std::uint32_t j = partitions_; j > 1; --j) std::swap(order[j - 1], order[rng_.below(j)]);
        }
        round_.push_back({OpKind::put, key(order[slot])});
      }
      break;
    }
    case Pattern::custom:
      for (const auto& s : spec_->custom) round_.push_back({s.kind, workload_key(s.partition, s.index, partitions_)});
      break;
  }
}

WorkloadOp WorkloadStream::next() {
  if (pos_ >= round_.size()) refill();
  return round_[pos_++];
}

}  // namespace clab::bench
