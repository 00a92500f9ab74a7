#pragma once

#include <memory>

#include "vcit/bus/protocol.hpp"
#include "vcit/prober/prober.hpp"

namespace vcit::bus {

/// Sends one command and decodes its reply. ERR becomes RemoteError; a
/// closed or garbled stream becomes Transport or Protocol.
Reply client_call(const Command& command, LineStream& connection);

/// A prober reached over the bus. Each run selects the slot, stages the
/// waveform and limits, arms, triggers and reads back.
class RemoteProber : public prober::ProberPort {
 public:
  RemoteProber(LineStream& connection, std::size_t index) : conn_(&connection), index_(index) {}

  std::vector<prober::CaptureRecord> run(const prober::StimulusWaveform& wf,
                                         const prober::ProtectionLimits& limits) override;

 private:
  LineStream* conn_;
  std::size_t index_;
};

}  // namespace vcit::bus
