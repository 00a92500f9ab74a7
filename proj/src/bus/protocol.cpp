#include "vcit/bus/protocol.hpp"

#include <array>

#include "vcit/text.hpp"

namespace vcit::bus {

namespace {

constexpr std::array<std::pair<Verb, std::string_view>, 10> kVerbs{{
    {Verb::Hello, "HELLO"},
    {Verb::List, "LIST"},
    {Verb::Select, "SELECT"},
    {Verb::Waveform, "WAVEFORM"},
    {Verb::Limits, "LIMITS"},
    {Verb::Arm, "ARM"},
    {Verb::Trig, "TRIG"},
    {Verb::Read, "READ"},
    {Verb::Status, "STATUS"},
    {Verb::Quit, "QUIT"},
}};

std::string_view strip_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

}  // namespace

std::string_view to_string(Verb verb) {
  for (const auto& [v, name] : kVerbs)
    if (v == verb) return name;
  return "?";
}

std::optional<Verb> parse_verb(std::string_view word) {
  for (const auto& [v, name] : kVerbs)
    if (name == word) return v;
  return std::nullopt;
}

Command waveform_command(const prober::StimulusWaveform& wf) {
  wf.validate();
  Command c;
  c.verb = Verb::Waveform;
  c.args.push_back(std::to_string(wf.samples.size()));
  c.payload.push_back(prober::format_waveform_header(wf));
  for (double s : wf.samples) c.payload.push_back(text::format_double(s));
  return c;
}

std::string encode(const Command& command) {
  std::string out(to_string(command.verb));
  for (const auto& a : command.args) {
    out += ' ';
    out += a;
  }
  out += '\n';
  if (command.verb == Verb::Waveform) {
    for (const auto& line : command.payload) {
      out += line;
      out += '\n';
    }
    out += ".\n";
  }
  return out;
}

Reply Reply::success(std::string text) {
  Reply r;
  r.text = std::move(text);
  return r;
}

Reply Reply::with_block(std::string text, std::vector<std::string> block) {
  Reply r;
  r.text = std::move(text);
  r.has_block = true;
  r.block = std::move(block);
  return r;
}

Reply Reply::failure(int code, std::string text) {
  Reply r;
  r.ok = false;
  r.code = code;
  r.text = std::move(text);
  return r;
}

std::string Reply::block_text() const {
  std::string out;
  for (const auto& line : block) {
    out += line;
    out += '\n';
  }
  return out;
}

std::string encode(const Reply& reply) {
  std::string out;
  if (!reply.ok) {
    out = "ERR " + std::to_string(reply.code);
  } else {
    out = reply.has_block ? "OK+" : "OK";
  }
  if (!reply.text.empty()) {
    out += ' ';
    out += reply.text;
  }
  out += '\n';
  if (reply.ok && reply.has_block) {
    out += reply.block_text();
    out += ".\n";
  }
  return out;
}

RemoteError::RemoteError(int status, const std::string& message)
    : Error(Errc::Remote, std::to_string(status) + " " + message), status_(status) {}

std::vector<std::string> split_commands(std::string_view script) {
  std::vector<std::string> out;
  bool in_block = false;
  std::size_t pos = 0;
  while (pos < script.size()) {
    auto end = script.find('\n', pos);
    auto next = end == std::string_view::npos ? script.size() : end + 1;
    auto raw = script.substr(pos, next - pos);
    auto line = strip_cr(raw.substr(0, raw.size() - (end == std::string_view::npos ? 0 : 1)));
    if (in_block) {
      out.back().append(raw);
      if (line == ".") in_block = false;
    } else {
      out.emplace_back(raw);
      auto words = text::split_ws(line);
      in_block = !words.empty() && words[0] == "WAVEFORM";
    }
    pos = next;
  }
  return out;
}

Address parse_address(std::string_view text) {
  auto colon = text.rfind(':');
  if (colon == std::string_view::npos || colon == 0)
    throw Error(Errc::InvalidArgument, "bus address must be host:port, got '" + std::string(text) + "'");
  Address a;
  a.host = std::string(text.substr(0, colon));
  auto port = text::parse_int(text.substr(colon + 1));
  if (port < 0 || port > 65535) throw Error(Errc::InvalidArgument, "bus port out of range");
  a.port = static_cast<std::uint16_t>(port);
  return a;
}

}  // namespace vcit::bus
