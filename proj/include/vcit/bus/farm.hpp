#pragma once

#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "vcit/bus/protocol.hpp"
#include "vcit/prober/prober.hpp"

namespace vcit::bus {

/// A staged waveform together with the lines it was uploaded as.
struct StagedWaveform {
  prober::StimulusWaveform waveform;
  std::vector<std::string> lines;  // header then samples, verbatim
};

struct ProberSlot {
  std::optional<StagedWaveform> staged;
  prober::ProtectionLimits limits;
  bool armed = false;
  std::optional<std::vector<prober::CaptureRecord>> last;
};

/// N probers on one bench. Every public call is atomic with respect to the
/// others.
class ProberFarm {
 public:
  ProberFarm(sim::Bench bench, std::size_t count, prober::Perturbation perturb = {});

  std::size_t size() const { return slots_.size(); }

  // Each returns the reply for the verb; an ERR leaves the farm untouched.
  Reply stage(std::size_t index, StagedWaveform staged);
  Reply set_limits(std::size_t index, const prober::ProtectionLimits& limits);
  Reply arm(std::size_t index);
  Reply trigger(std::size_t index);
  Reply read(std::size_t index) const;
  Reply status(std::size_t index) const;

  /// Full state of every prober as text, for before/after comparison.
  std::string snapshot() const;

 private:
  std::vector<std::string> status_lines(std::size_t index) const;

  mutable std::mutex mutex_;
  sim::Bench bench_;
  prober::Perturbation perturb_;
  std::vector<ProberSlot> slots_;
};

/// Per-connection command dispatch.
class ServerSession {
 public:
  explicit ServerSession(ProberFarm& farm) : farm_(&farm) {}

  /// Reads and answers one command. False once the stream ended or QUIT
  /// was answered.
  bool step(LineStream& stream);

  std::size_t selected() const { return selected_; }

 private:
  Reply dispatch(const std::string& line, LineStream& stream, bool& quit, bool& ended);

  ProberFarm* farm_;
  std::size_t selected_ = 0;
};

void serve(ProberFarm& farm, LineStream& stream);

/// In-memory stream over a fixed input; output is collected.
class BufferStream : public LineStream {
 public:
  explicit BufferStream(std::string input = {}) : input_(std::move(input)) {}

  std::optional<std::string> read_line() override;
  void write(std::string_view bytes) override { output_.append(bytes); }

  void feed(std::string_view bytes) { input_.append(bytes); }
  bool has_line() const;
  const std::string& output() const { return output_; }
  std::string take_output();

 private:
  std::string input_;
  std::size_t pos_ = 0;
  std::string output_;
};

/// Reply bytes for a whole request script run through one session.
std::string loopback_transcript(ProberFarm& farm, std::string_view script);

/// Client end of an in-process connection; the server runs on demand in
/// the caller's thread.
class LoopbackConnection : public LineStream {
 public:
  explicit LoopbackConnection(ProberFarm& farm) : session_(farm) {}

  std::optional<std::string> read_line() override;
  void write(std::string_view bytes) override { to_server_.feed(bytes); }

 private:
  ServerSession session_;
  BufferStream to_server_;
  BufferStream from_server_;
  bool done_ = false;
};

}  // namespace vcit::bus
