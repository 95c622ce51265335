#include "clab/consistency/visibility.hpp"

namespace clab::consistency {

VersionId VisibilityTrace::add_version(Key key, Value value, NodeId creator, SimTime created,
                                       std::vector<VersionId> deps) {
  VersionRecord r;
  r.id = versions_.size() + 1;
  r.key = key;
  r.value = value;
  r.creator = creator;
  r.created = created;
  r.deps = std::move(deps);
  r.visible_at.assign(num_dcs_, std::nullopt);
  r.visible_at[creator.dc] = created;
  versions_.push_back(std::move(r));
  return versions_.back().id;
}

void VisibilityTrace::mark_visible(VersionId id, std::uint32_t dc, SimTime t) {
  auto& slot = at(id).visible_at.at(dc);
  if (!slot || t < *slot) slot = t;
}

TraceVerdict check_dependency_visibility(const VisibilityTrace& trace) {
  TraceVerdict v;
  for (const auto& x : trace.versions()) {
    for (std::uint32_t dc = 0; dc < trace.num_dcs(); ++dc) {
      const auto& seen = x.visible_at[dc];
      if (!seen) continue;
      for (VersionId dep : x.deps) {
        const auto& dep_seen = trace.at(dep).visible_at[dc];
        if (!dep_seen || *dep_seen > *seen) v.dependency_violations.push_back({x.id, dep, dc});
      }
    }
  }
  v.satisfied = v.dependency_violations.empty();
  if (!v.satisfied) {
    const auto& f = v.dependency_violations.front();
    v.reason = "version " + std::to_string(f.version) + " visible in dc " + std::to_string(f.dc) +
               " before its dependency " + std::to_string(f.dependency);
  }
  return v;
}

TraceVerdict check_eventual(const VisibilityTrace& trace, SimTime quiescence) {
  for (const auto& x : trace.versions()) {
    if (x.created > quiescence) {
      throw NotQuiesced("version " + std::to_string(x.id) + " created at " + std::to_string(x.created) +
                        " after quiescence " + std::to_string(quiescence));
    }
  }
  TraceVerdict v;
  for (const auto& [key, replicas] : trace.final_heads()) {
    bool agree = true;
    for (const auto& r : replicas) {
      if (r.heads.size() > 1 || r.heads != replicas.front().heads) agree = false;
    }
    if (!agree) v.divergent.push_back({key, replicas});
  }
  v.satisfied = v.divergent.empty();
  if (!v.satisfied) {
    v.reason = std::to_string(v.divergent.size()) + " keys have divergent or unreconciled heads (first key " +
               std::to_string(v.divergent.front().key) + ")";
  }
  return v;
}

}  // namespace clab::consistency
