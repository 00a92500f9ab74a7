#include "vcit/exec/operator.hpp"

#include <istream>
#include <ostream>
#include <string>

#include "vcit/text.hpp"

namespace vcit::exec {

std::string_view to_string(OperatorResponse r) {
  return r == OperatorResponse::Confirmed ? "confirmed" : "aborted";
}

OperatorResponse ScriptedOperator::ask(const std::string& prompt_tag) {
  auto it = answers_.find(prompt_tag);
  if (it == answers_.end() || it->second.empty()) return OperatorResponse::Aborted;
  const auto r = it->second.front();
  it->second.pop_front();
  return r;
}

OperatorResponse TerminalOperator::ask(const std::string& prompt_tag) {
  out_ << "operator: " << prompt_tag << " -- confirm? [y/N] " << std::flush;
  std::string line;
  if (!std::getline(in_, line)) return OperatorResponse::Aborted;
  const auto answer = text::trim(line);
  return answer == "y" || answer == "Y" || answer == "yes" ? OperatorResponse::Confirmed
                                                           : OperatorResponse::Aborted;
}

}  // namespace vcit::exec
