#pragma once

#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "clab/consistency/history.hpp"

namespace clab::consistency {

class HistoryParseError : public std::runtime_error {
 public:
  HistoryParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Line format, one event per line:
//
//   <seq> <process> <call|resp> <GET|PUT> <key> [<value>] <op_id>
//
// <value> is present on PUT calls and GET responses only. Sequence numbers
// must strictly increase. Blank lines and lines starting with '#' are ignored.

History read_history(std::istream& in);
History parse_history(const std::string& text);
void write_history(std::ostream& out, const History& h);
std::string format_history(const History& h);

}  // namespace clab::consistency
