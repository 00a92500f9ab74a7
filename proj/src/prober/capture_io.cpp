#include <cmath>

#include "vcit/error.hpp"
#include "vcit/prober/prober.hpp"
#include "vcit/text.hpp"

namespace vcit::prober {

std::string serialize_captures(const std::vector<CaptureRecord>& captures) {
  using text::format_double;
  std::string out;
  for (const auto& c : captures) {
    const std::size_t n = c.sample_count();
    out += "capture " + c.pad + ' ' + format_double(c.dt) + ' ' + std::to_string(n) + ' ' +
           (c.protection_tripped ? "1" : "0") + ' ' +
           (c.trip_index ? std::to_string(*c.trip_index) : std::string("-")) + '\n';
    for (std::size_t i = 0; i < n; ++i) {
      out += format_double(c.applied[i]);
      out += ' ';
      out += format_double(c.source_voltage[i]);
      out += ' ';
      out += format_double(c.measured_voltage[i]);
      out += ' ';
      out += format_double(c.measured_current[i]);
      out += '\n';
    }
  }
  return out;
}

std::vector<CaptureRecord> parse_captures(std::string_view body) {
  auto lines = text::split_lines(body);
  std::vector<CaptureRecord> out;
  std::size_t k = 0;
  auto bad = [](const std::string& why) { return Error(Errc::Protocol, "capture text: " + why); };
  while (k < lines.size()) {
    if (text::trim(lines[k]).empty()) {
      ++k;
      continue;
    }
    auto head = text::split_ws(lines[k++]);
    if (head.size() != 6 || head[0] != "capture") throw bad("expected capture header");
    CaptureRecord c;
    c.pad = std::string(head[1]);
    c.dt = text::parse_double(head[2]);
    const long long n = text::parse_int(head[3]);
    if (n < 0) throw bad("negative sample count");
    if (head[4] != "0" && head[4] != "1") throw bad("tripped flag must be 0 or 1");
    c.protection_tripped = head[4] == "1";
    if (head[5] != "-") {
      const long long t = text::parse_int(head[5]);
      if (t < 0 || t >= n) throw bad("trip index out of range");
      c.trip_index = static_cast<std::size_t>(t);
    }
    if (c.protection_tripped != c.trip_index.has_value())
      throw bad("tripped flag disagrees with trip index");
    for (long long i = 0; i < n; ++i) {
      if (k >= lines.size()) throw bad("truncated sample block");
      auto tok = text::split_ws(lines[k++]);
      if (tok.size() != 4) throw bad("sample line needs four values");
      c.applied.push_back(text::parse_double(tok[0]));
      c.source_voltage.push_back(text::parse_double(tok[1]));
      c.measured_voltage.push_back(text::parse_double(tok[2]));
      c.measured_current.push_back(text::parse_double(tok[3]));
    }
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace vcit::prober
