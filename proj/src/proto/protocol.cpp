#include "clab/proto/protocol.hpp"

#include "clab/proto/cops.hpp"
#include "clab/proto/dynamo.hpp"
#include "clab/proto/eventual.hpp"
#include "clab/proto/gentlerain.hpp"

namespace clab::proto {

std::string_view to_string(ProtocolKind p) {
  switch (p) {
    case ProtocolKind::cops: return "cops";
    case ProtocolKind::gentlerain: return "gentlerain";
    case ProtocolKind::dynamo: return "dynamo";
    case ProtocolKind::eventual: return "eventual";
  }
  return "?";
}

std::optional<ProtocolKind> parse_protocol(std::string_view s) {
  for (auto p : {ProtocolKind::cops, ProtocolKind::gentlerain, ProtocolKind::dynamo, ProtocolKind::eventual})
    if (to_string(p) == s) return p;
  return std::nullopt;
}

std::unique_ptr<Protocol> make_protocol(ProtocolKind kind, SimKernel& kernel, const ProtocolOptions& opts,
                                        consistency::VisibilityTrace& trace) {
  opts.topology.validate(kind == ProtocolKind::dynamo);
  switch (kind) {
    case ProtocolKind::cops: return std::make_unique<Cops>(kernel, opts, trace);
    case ProtocolKind::gentlerain: return std::make_unique<GentleRain>(kernel, opts, trace);
    case ProtocolKind::dynamo: return std::make_unique<Dynamo>(kernel, opts, trace);
    case ProtocolKind::eventual: return std::make_unique<Eventual>(kernel, opts, trace);
  }
  return nullptr;
}

}  // namespace clab::proto
