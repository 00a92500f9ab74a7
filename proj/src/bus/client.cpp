#include "vcit/bus/client.hpp"

#include "vcit/text.hpp"

namespace vcit::bus {

namespace {

std::string read_or_throw(LineStream& conn) {
  auto line = conn.read_line();
  if (!line) throw Error(Errc::Transport, "connection closed before the reply");
  return *line;
}

// "OK", "OK+" or "ERR" followed by the end of line or a space.
bool has_head(std::string_view line, std::string_view head) {
  return line.substr(0, head.size()) == head && (line.size() == head.size() || line[head.size()] == ' ');
}

std::string rest_after(std::string_view line, std::size_t n) {
  return line.size() > n ? std::string(line.substr(n + 1)) : std::string();
}

}  // namespace

Reply client_call(const Command& command, LineStream& connection) {
  connection.write(encode(command));
  const auto line = read_or_throw(connection);
  if (has_head(line, "OK+")) {
    std::vector<std::string> block;
    for (auto next = read_or_throw(connection); next != "."; next = read_or_throw(connection))
      block.push_back(std::move(next));
    return Reply::with_block(rest_after(line, 3), std::move(block));
  }
  if (has_head(line, "OK")) return Reply::success(rest_after(line, 2));
  if (has_head(line, "ERR")) {
    const auto words = text::split_ws(line);
    long long code = 0;
    try {
      code = words.size() >= 2 ? text::parse_int(words[1]) : 0;
    } catch (const Error&) {
    }
    if (code < 100 || code > 999) throw Error(Errc::Protocol, "unparseable reply: " + line);
    const auto text = rest_after(line, 7);
    throw RemoteError(static_cast<int>(code), text);
  }
  throw Error(Errc::Protocol, "unparseable reply: " + line);
}

std::vector<prober::CaptureRecord> RemoteProber::run(const prober::StimulusWaveform& wf,
                                                     const prober::ProtectionLimits& limits) {
  client_call({Verb::Select, {std::to_string(index_)}, {}}, *conn_);
  client_call(waveform_command(wf), *conn_);
  client_call({Verb::Limits,
               {text::format_double(limits.max_abs_voltage), text::format_double(limits.max_abs_current)},
               {}},
              *conn_);
  client_call({Verb::Arm, {}, {}}, *conn_);
  client_call({Verb::Trig, {}, {}}, *conn_);
  const auto reply = client_call({Verb::Read, {}, {}}, *conn_);
  return prober::parse_captures(reply.block_text());
}

}  // namespace vcit::bus
