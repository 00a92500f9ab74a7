#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vcit/error.hpp"
#include "vcit/prober/waveform.hpp"

namespace vcit::bus {

inline constexpr std::string_view kProtocolVersion = "VCIT/1";
inline constexpr std::string_view kDefaultAddress = "127.0.0.1:5025";
inline constexpr std::string_view kAddressEnv = "VCIT_BUS";
inline constexpr std::size_t kMaxLine = 4096;
inline constexpr std::size_t kMaxSamples = 1u << 20;

// Status codes carried by ERR replies.
inline constexpr int kMalformed = 400;
inline constexpr int kUnknownVerb = 404;
inline constexpr int kSequence = 409;
inline constexpr int kOutOfRange = 416;
inline constexpr int kInvalid = 422;
inline constexpr int kInternal = 500;

enum class Verb { Hello, List, Select, Waveform, Limits, Arm, Trig, Read, Status, Quit };

std::string_view to_string(Verb verb);
std::optional<Verb> parse_verb(std::string_view word);

/// One request. WAVEFORM carries its block in `payload`: the header line
/// followed by one sample per line, without the closing ".".
struct Command {
  Verb verb = Verb::Hello;
  std::vector<std::string> args;
  std::vector<std::string> payload;
};

Command waveform_command(const prober::StimulusWaveform& wf);
std::string encode(const Command& command);

/// `OK <text>`, `OK+ <text>` followed by `block` lines and ".", or
/// `ERR <code> <text>`.
struct Reply {
  bool ok = true;
  int code = 0;
  std::string text;
  bool has_block = false;
  std::vector<std::string> block;

  static Reply success(std::string text);
  static Reply with_block(std::string text, std::vector<std::string> block);
  static Reply failure(int code, std::string text);

  std::string block_text() const;  // block lines, each ending in '\n'
};

std::string encode(const Reply& reply);

/// ERR reply surfaced by the client.
class RemoteError : public Error {
 public:
  RemoteError(int status, const std::string& message);
  int status() const noexcept { return status_; }

 private:
  int status_;
};

/// Ordered, reliable line transport. Lines are returned without the
/// terminator; a trailing '\r' is dropped.
class LineStream {
 public:
  virtual ~LineStream() = default;
  virtual std::optional<std::string> read_line() = 0;  // nullopt at end of stream
  virtual void write(std::string_view bytes) = 0;
};

/// Split a request script into the raw bytes of each command, keeping
/// WAVEFORM blocks attached to their command line.
std::vector<std::string> split_commands(std::string_view script);

struct Address {
  std::string host;
  std::uint16_t port = 0;
};

Address parse_address(std::string_view text);

}  // namespace vcit::bus
