#include "vcit/bus/farm.hpp"

#include "vcit/text.hpp"

namespace vcit::bus {

ProberFarm::ProberFarm(sim::Bench bench, std::size_t count, prober::Perturbation perturb)
    : bench_(std::move(bench)), perturb_(std::move(perturb)), slots_(count) {
  if (count == 0) throw Error(Errc::InvalidArgument, "prober farm needs at least one prober");
}

Reply ProberFarm::stage(std::size_t index, StagedWaveform staged) {
  std::lock_guard lock(mutex_);
  for (const auto& pad : staged.waveform.target_pads)
    if (!bench_.uut.find(pad)) return Reply::failure(kInvalid, "unknown pad " + pad);
  auto& slot = slots_.at(index);
  const auto count = staged.waveform.samples.size();
  slot.staged = std::move(staged);
  slot.armed = false;
  return Reply::success(std::to_string(count));
}

Reply ProberFarm::set_limits(std::size_t index, const prober::ProtectionLimits& limits) {
  try {
    limits.validate();
  } catch (const Error&) {
    return Reply::failure(kInvalid, "limits must be positive and finite");
  }
  std::lock_guard lock(mutex_);
  auto& slot = slots_.at(index);
  slot.limits = limits;
  slot.armed = false;
  return Reply::success("");
}

Reply ProberFarm::arm(std::size_t index) {
  std::lock_guard lock(mutex_);
  auto& slot = slots_.at(index);
  if (!slot.staged) return Reply::failure(kSequence, "no waveform staged");
  slot.armed = true;
  return Reply::success("armed");
}

Reply ProberFarm::trigger(std::size_t index) {
  std::lock_guard lock(mutex_);
  auto& slot = slots_.at(index);
  if (!slot.armed) return Reply::failure(kSequence, "not armed");
  std::vector<prober::CaptureRecord> captures;
  try {
    captures = prober::execute(slot.staged->waveform, slot.limits, bench_, perturb_);
  } catch (const std::exception& e) {
    return Reply::failure(kInternal, e.what());
  }
  const auto n = captures.size();
  slot.last = std::move(captures);
  slot.armed = false;
  return Reply::success(std::to_string(n));
}

Reply ProberFarm::read(std::size_t index) const {
  std::lock_guard lock(mutex_);
  const auto& slot = slots_.at(index);
  if (!slot.last) return Reply::failure(kSequence, "nothing captured");
  return Reply::with_block(std::to_string(slot.last->size()),
                           text::split_lines(prober::serialize_captures(*slot.last)));
}

std::vector<std::string> ProberFarm::status_lines(std::size_t index) const {
  const auto& slot = slots_.at(index);
  std::vector<std::string> out;
  out.push_back("prober " + std::to_string(index));
  out.push_back("limits " + text::format_double(slot.limits.max_abs_voltage) + " " +
                text::format_double(slot.limits.max_abs_current));
  out.push_back(std::string("armed ") + (slot.armed ? "1" : "0"));
  out.push_back("captured " + (slot.last ? std::to_string(slot.last->size()) : std::string("-")));
  if (!slot.staged) {
    out.push_back("waveform none");
  } else {
    out.push_back("waveform " + std::to_string(slot.staged->waveform.samples.size()));
    out.insert(out.end(), slot.staged->lines.begin(), slot.staged->lines.end());
  }
  return out;
}

Reply ProberFarm::status(std::size_t index) const {
  std::lock_guard lock(mutex_);
  return Reply::with_block("STATUS", status_lines(index));
}

std::string ProberFarm::snapshot() const {
  std::lock_guard lock(mutex_);
  std::string out;
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    for (const auto& line : status_lines(i)) out += line + "\n";
    if (slots_[i].last) out += prober::serialize_captures(*slots_[i].last);
  }
  return out;
}

namespace {

bool no_args(const std::vector<std::string_view>& words) { return words.size() == 1; }

// Parses the WAVEFORM block; nullopt with `error` set on failure.
std::optional<StagedWaveform> parse_block(const std::vector<std::string_view>& words,
                                          const std::vector<std::string>& lines, Reply& error) {
  auto fail = [&](int code, std::string why) {
    error = Reply::failure(code, std::move(why));
    return std::nullopt;
  };
  if (words.size() != 2) return fail(kMalformed, "WAVEFORM takes a sample count");
  long long count = 0;
  try {
    count = text::parse_int(words[1]);
  } catch (const Error&) {
    return fail(kMalformed, "bad sample count");
  }
  if (count < 1 || static_cast<unsigned long long>(count) > kMaxSamples)
    return fail(kMalformed, "sample count out of range");
  if (lines.empty()) return fail(kMalformed, "missing waveform header");
  if (lines.size() - 1 != static_cast<std::size_t>(count))
    return fail(kMalformed, "declared " + std::to_string(count) + " samples, got " +
                                std::to_string(lines.size() - 1));
  StagedWaveform staged;
  auto& wf = staged.waveform;
  auto header = text::split_ws(lines[0]);
  if (header.size() < 3) return fail(kMalformed, "waveform header needs: mode dt pad...");
  try {
    wf.mode = sim::parse_drive_mode(header[0]);
    wf.dt = text::parse_double(header[1]);
  } catch (const Error&) {
    return fail(kMalformed, "bad waveform header");
  }
  for (std::size_t i = 2; i < header.size(); ++i) wf.target_pads.emplace_back(header[i]);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto tok = text::split_ws(lines[i]);
    try {
      if (tok.size() != 1) throw Error(Errc::InvalidArgument, "");
      wf.samples.push_back(text::parse_double(tok[0]));
    } catch (const Error&) {
      return fail(kMalformed, "bad sample on block line " + std::to_string(i + 1));
    }
  }
  try {
    wf.validate();
  } catch (const Error&) {
    return fail(kInvalid, "waveform rejected");
  }
  staged.lines = lines;
  return staged;
}

}  // namespace

bool ServerSession::step(LineStream& stream) {
  auto line = stream.read_line();
  if (!line) return false;
  bool quit = false;
  bool ended = false;
  Reply reply;
  try {
    reply = dispatch(*line, stream, quit, ended);
  } catch (const std::exception& e) {
    reply = Reply::failure(kInternal, e.what());
  }
  if (ended) return false;
  stream.write(encode(reply));
  return !quit;
}

Reply ServerSession::dispatch(const std::string& line, LineStream& stream, bool& quit,
                              bool& ended) {
  auto words = text::split_ws(line);
  const bool block = !words.empty() && words[0] == "WAVEFORM";
  std::vector<std::string> lines;
  if (block) {
    bool overflow = false;
    for (;;) {
      auto next = stream.read_line();
      if (!next) {
        ended = true;
        return {};
      }
      if (*next == ".") break;
      if (lines.size() > kMaxSamples)
        overflow = true;
      else
        lines.push_back(std::move(*next));
    }
    if (overflow) return Reply::failure(kMalformed, "waveform block too long");
  }
  if (line.size() > kMaxLine) return Reply::failure(kMalformed, "line too long");
  if (words.empty()) return Reply::failure(kMalformed, "empty command");
  auto verb = parse_verb(words[0]);
  if (!verb) return Reply::failure(kUnknownVerb, "unknown verb " + std::string(words[0]));
  const auto n = farm_->size();
  switch (*verb) {
    case Verb::Hello:
      if (!no_args(words)) break;
      return Reply::success(std::string(kProtocolVersion) + " probers " + std::to_string(n));
    case Verb::List:
      if (!no_args(words)) break;
      return Reply::success(std::to_string(n));
    case Verb::Select: {
      if (words.size() != 2) break;
      long long index = 0;
      try {
        index = text::parse_int(words[1]);
      } catch (const Error&) {
        break;
      }
      if (index < 0 || static_cast<unsigned long long>(index) >= n)
        return Reply::failure(kOutOfRange, "prober index out of range [0, " + std::to_string(n) + ")");
      selected_ = static_cast<std::size_t>(index);
      return Reply::success(std::to_string(index));
    }
    case Verb::Waveform: {
      Reply error;
      auto staged = parse_block(words, lines, error);
      if (!staged) return error;
      return farm_->stage(selected_, std::move(*staged));
    }
    case Verb::Limits: {
      if (words.size() != 3) break;
      prober::ProtectionLimits limits;
      try {
        limits.max_abs_voltage = text::parse_double(words[1]);
        limits.max_abs_current = text::parse_double(words[2]);
      } catch (const Error&) {
        break;
      }
      return farm_->set_limits(selected_, limits);
    }
    case Verb::Arm:
      if (!no_args(words)) break;
      return farm_->arm(selected_);
    case Verb::Trig:
      if (!no_args(words)) break;
      return farm_->trigger(selected_);
    case Verb::Read:
      if (!no_args(words)) break;
      return farm_->read(selected_);
    case Verb::Status:
      if (!no_args(words)) break;
      return farm_->status(selected_);
    case Verb::Quit:
      if (!no_args(words)) break;
      quit = true;
      return Reply::success("bye");
  }
  return Reply::failure(kMalformed, "bad arguments for " + std::string(words[0]));
}

void serve(ProberFarm& farm, LineStream& stream) {
  ServerSession session(farm);
  while (session.step(stream)) {
  }
}

std::optional<std::string> BufferStream::read_line() {
  if (pos_ >= input_.size()) return std::nullopt;
  auto end = input_.find('\n', pos_);
  if (end == std::string::npos) end = input_.size();
  std::string line = input_.substr(pos_, end - pos_);
  pos_ = end + 1;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

bool BufferStream::has_line() const { return pos_ < input_.size(); }

std::string BufferStream::take_output() {
  std::string out;
  out.swap(output_);
  return out;
}

std::string loopback_transcript(ProberFarm& farm, std::string_view script) {
  BufferStream stream{std::string(script)};
  serve(farm, stream);
  return stream.output();
}

std::optional<std::string> LoopbackConnection::read_line() {
  while (!from_server_.has_line()) {
    if (done_ || !to_server_.has_line()) return std::nullopt;
    done_ = !session_.step(to_server_);
    from_server_.feed(to_server_.take_output());
  }
  return from_server_.read_line();
}

}  // namespace vcit::bus
