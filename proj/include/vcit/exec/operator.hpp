#pragma once

#include <deque>
#include <iosfwd>
#include <map>
#include <string>

namespace vcit::exec {

enum class OperatorResponse { Confirmed, Aborted };

std::string_view to_string(OperatorResponse r);

class OperatorPort {
 public:
  virtual ~OperatorPort() = default;
  virtual OperatorResponse ask(const std::string& prompt_tag) = 0;
};

/// Replays canned answers per prompt tag; anything unscripted is an abort.
class ScriptedOperator : public OperatorPort {
 public:
  void script(const std::string& prompt_tag, OperatorResponse r) { answers_[prompt_tag].push_back(r); }
  OperatorResponse ask(const std::string& prompt_tag) override;

 private:
  std::map<std::string, std::deque<OperatorResponse>> answers_;
};

/// Plain confirm/abort question on a terminal. Only "y"/"yes" confirms.
class TerminalOperator : public OperatorPort {
 public:
  TerminalOperator(std::istream& in, std::ostream& out) : in_(in), out_(out) {}
  OperatorResponse ask(const std::string& prompt_tag) override;

 private:
  std::istream& in_;
  std::ostream& out_;
};

}  // namespace vcit::exec
