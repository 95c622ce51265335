#include "clab/consistency/history_io.hpp"

#include <charconv>
#include <sstream>
#include <string_view>
#include <vector>

namespace clab::consistency {
namespace {

std::uint64_t parse_u64(std::string_view tok, std::size_t line, const char* what) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    throw HistoryParseError(line, std::string("bad ") + what + " '" + std::string(tok) + "'");
  return v;
}

}  // namespace

History read_history(std::istream& in) {
  History h;
  std::string text;
  std::size_t line_no = 0;
  std::optional<std::uint64_t> last_seq;
  while (std::getline(in, text)) {
    ++line_no;
    std::istringstream ss(text);
    std::vector<std::string> tok;
    for (std::string t; ss >> t;) tok.push_back(t);
    if (tok.empty() || tok.front().starts_with('#')) continue;
    if (tok.size() != 6 && tok.size() != 7) throw HistoryParseError(line_no, "expected 6 or 7 fields");

    HistoryEvent e;
    const auto seq = parse_u64(tok[0], line_no, "sequence number");
    if (last_seq && seq <= *last_seq) throw HistoryParseError(line_no, "sequence numbers must increase");
    last_seq = seq;
    const auto process = parse_u64(tok[1], line_no, "process");
    if (process > UINT32_MAX) throw HistoryParseError(line_no, "process id out of range");
    e.process = static_cast<ProcessId>(process);

    if (tok[2] == "call") {
      e.kind = EventKind::call;
    } else if (tok[2] == "resp") {
      e.kind = EventKind::response;
    } else {
      throw HistoryParseError(line_no, "expected call or resp, got '" + tok[2] + "'");
    }
    if (tok[3] == "GET") {
      e.op = OpKind::get;
    } else if (tok[3] == "PUT") {
      e.op = OpKind::put;
    } else {
      throw HistoryParseError(line_no, "expected GET or PUT, got '" + tok[3] + "'");
    }
    e.object = parse_u64(tok[4], line_no, "key");

    const bool wants_value = (e.kind == EventKind::call) == (e.op == OpKind::put);
    if (wants_value != (tok.size() == 7))
      throw HistoryParseError(line_no, wants_value ? "missing value" : "unexpected value");
    if (wants_value) e.value = parse_u64(tok[5], line_no, "value");
    e.op_id = parse_u64(tok.back(), line_no, "op id");
    h.events.push_back(e);
  }
  return h;
}

History parse_history(const std::string& text) {
  std::istringstream in(text);
  return read_history(in);
}

void write_history(std::ostream& out, const History& h) {
  std::uint64_t seq = 0;
  for (const auto& e : h.events) {
    out << seq++ << ' ' << e.process << ' ' << (e.kind == EventKind::call ? "call" : "resp") << ' '
        << (e.op == OpKind::get ? "GET" : "PUT") << ' ' << e.object;
    if (e.value) out << ' ' << *e.value;
    out << ' ' << e.op_id << '\n';
  }
}

std::string format_history(const History& h) {
  std::ostringstream out;
  write_history(out, h);
  return out.str();
}

}  // namespace clab::consistency
