#include "vcit/exec/fixture.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <nlohmann/json.hpp>

#include "vcit/error.hpp"

namespace vcit::exec {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw Error(Errc::Config, where + ": " + what);
}

void allow_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) fail(where, "expected an object");
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (const char* key : keys) ok = ok || k == key;
    if (!ok) fail(where, "unknown key '" + k + "'");
  }
}

double num(const json& j, const char* key, const std::string& where, double fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number()) fail(where + "." + key, "expected a number");
  return v.get<double>();
}

double num(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) fail(where, std::string("missing '") + key + "'");
  return num(j, key, where, 0.0);
}

std::uint64_t count(const json& j, const char* key, const std::string& where,
                    std::uint64_t fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
    fail(where + "." + key, "expected a non-negative integer");
  return v.get<std::uint64_t>();
}

std::string str(const json& j, const char* key, const std::string& where,
                const std::string& fallback = {}) {
  if (!j.contains(key)) {
    if (fallback.empty()) fail(where, std::string("missing '") + key + "'");
    return fallback;
  }
  const auto& v = j.at(key);
  if (!v.is_string()) fail(where + "." + key, "expected a string");
  return v.get<std::string>();
}

std::vector<double> numbers(const json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) fail(where, "expected an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

Window window(const json& j, const std::string& where) {
  auto v = numbers(j, where);
  if (v.size() != 2) fail(where, "window is [lo, hi]");
  if (!(v[0] <= v[1])) fail(where, "window needs lo <= hi");
  return {v[0], v[1]};
}

template <class F>
auto wrap(const std::string& where, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.code() == Errc::Config) throw;
    fail(where, e.what());
  }
}

sim::DiodeModel diode(const json& j, const std::string& where) {
  allow_keys(j, where, {"is", "n", "vt", "rs"});
  sim::DiodeModel d;
  d.saturation_current = num(j, "is", where, d.saturation_current);
  d.ideality = num(j, "n", where, d.ideality);
  d.thermal_voltage = num(j, "vt", where, d.thermal_voltage);
  d.series_resistance = num(j, "rs", where, d.series_resistance);
  return d;
}

sim::Rail rail(const json& j, const char* key, const std::string& where, sim::Rail fallback) {
  if (!j.contains(key)) return fallback;
  return wrap(where, [&] { return sim::parse_rail(str(j, key, where)); });
}

sim::Pad pad(const json& j, const std::string& where) {
  allow_keys(j, where,
             {"id", "kind", "to_vcc", "to_gnd", "diode", "polarity", "rail", "color", "ohms",
              "capacitance"});
  sim::Pad p;
  p.id = str(j, "id", where);
  const std::string w = where + "(" + p.id + ")";
  const std::string kind = str(j, "kind", w);
  p.circuit.shunt_capacitance = num(j, "capacitance", w, 0.0);
  auto need = [&](const char* key) -> const json& {
    if (!j.contains(key)) fail(w, std::string("missing '") + key + "'");
    return j.at(key);
  };
  if (kind == "esd_pair") {
    p.circuit.kind = sim::EsdPair{diode(need("to_vcc"), w + ".to_vcc"),
                                  diode(need("to_gnd"), w + ".to_gnd")};
  } else if (kind == "series_diode") {
    sim::SeriesDiode s{diode(need("diode"), w + ".diode"), sim::Polarity::Forward,
                       rail(j, "rail", w, sim::Rail::Gnd)};
    const std::string pol = str(j, "polarity", w, "forward");
    if (pol == "reverse")
      s.polarity = sim::Polarity::Reverse;
    else if (pol != "forward")
      fail(w, "polarity is forward or reverse");
    p.circuit.kind = s;
  } else if (kind == "led") {
    p.circuit.kind = sim::Led{diode(need("diode"), w + ".diode"), str(j, "color", w, "unknown")};
  } else if (kind == "resistive") {
    p.circuit.kind = sim::Resistive{num(j, "ohms", w), rail(j, "rail", w, sim::Rail::Gnd)};
  } else if (kind == "open") {
    p.circuit.kind = sim::OpenPad{};
  } else {
    fail(w, "unknown pad kind '" + kind + "'");
  }
  return p;
}

sim::RailState rail_state(const json& j, const std::string& where) {
  allow_keys(j, where, {"kind", "volts", "sink_limit", "sink_knee", "bleed_ohms"});
  const std::string kind = str(j, "kind", where);
  if (kind == "grounded") return sim::Grounded{};
  if (kind == "floating") return sim::Floating{};
  if (kind == "biased") return sim::Biased{num(j, "volts", where)};
  if (kind == "sensed") {
    sim::Sensed s;
    s.sink_limit = num(j, "sink_limit", where, s.sink_limit);
    s.sink_knee = num(j, "sink_knee", where, s.sink_knee);
    s.bleed_ohms = num(j, "bleed_ohms", where, s.bleed_ohms);
    return s;
  }
  fail(where, "unknown rail kind '" + kind + "'");
}

sim::UutModel uut(const json& j, const std::string& where) {
  allow_keys(j, where, {"pads", "vcc", "gnd", "supply_volts", "consumption"});
  sim::UutModel m;
  if (!j.contains("pads") || !j.at("pads").is_array()) fail(where, "'pads' must be an array");
  for (std::size_t i = 0; i < j.at("pads").size(); ++i)
    m.pads.push_back(pad(j.at("pads")[i], where + ".pads[" + std::to_string(i) + "]"));
  if (j.contains("vcc")) m.vcc = rail_state(j.at("vcc"), where + ".vcc");
  if (j.contains("gnd")) m.gnd = rail_state(j.at("gnd"), where + ".gnd");
  m.supply_volts = num(j, "supply_volts", where, 0.0);
  if (j.contains("consumption")) {
    const auto& c = j.at("consumption");
    if (!c.is_array()) fail(where + ".consumption", "expected [[volts, amps], ...]");
    std::vector<std::pair<double, double>> knots;
    for (const auto& k : c) {
      auto v = numbers(k, where + ".consumption");
      if (v.size() != 2) fail(where + ".consumption", "each knot is [volts, amps]");
      knots.emplace_back(v[0], v[1]);
    }
    m.consumption = wrap(where + ".consumption", [&] { return sim::ConsumptionCurve(knots); });
  }
  wrap(where, [&] {
    m.validate();
    return 0;
  });
  return m;
}

sim::ContactState contact(const json& j, const std::string& where, sim::ContactState base) {
  allow_keys(j, where, {"resistance", "wear_rate", "open_threshold", "cycles"});
  base.resistance = num(j, "resistance", where, base.resistance);
  base.wear_rate = num(j, "wear_rate", where, base.wear_rate);
  base.open_threshold = num(j, "open_threshold", where, base.open_threshold);
  base.cycles = count(j, "cycles", where, base.cycles);
  return base;
}

CheckSpec check(const json& j, const std::string& where) {
  allow_keys(j, where,
             {"type", "pads", "mode", "levels", "samples", "dt", "window", "windows", "region",
              "expect", "offset", "amplitude", "threshold"});
  CheckSpec s;
  s.kind = parse_check_kind(str(j, "type", where));
  const std::string w = where + "(" + std::string(to_string(s.kind)) + ")";
  if (j.contains("pads")) {
    if (!j.at("pads").is_array()) fail(w, "'pads' must be an array of pad ids");
    for (const auto& p : j.at("pads")) {
      if (!p.is_string()) fail(w, "'pads' must be an array of pad ids");
      s.pads.push_back(p.get<std::string>());
    }
  }
  if (j.contains("mode"))
    s.mode = wrap(w, [&] { return sim::parse_drive_mode(str(j, "mode", w)); });
  if (j.contains("levels")) s.levels = numbers(j.at("levels"), w + ".levels");
  s.samples = count(j, "samples", w, s.kind == CheckKind::Corr ? 64 : 4);
  s.dt = num(j, "dt", w, s.kind == CheckKind::Corr ? 1e-4 : 1e-3);
  if (j.contains("window")) s.windows.push_back(window(j.at("window"), w + ".window"));
  if (j.contains("windows")) {
    if (!j.at("windows").is_array()) fail(w, "'windows' must be an array of [lo, hi]");
    for (const auto& x : j.at("windows")) s.windows.push_back(window(x, w + ".windows"));
  }
  if (j.contains("region")) {
    const auto& r = j.at("region");
    allow_keys(r, w + ".region", {"normals", "offsets"});
    std::vector<std::vector<double>> normals;
    if (!r.contains("normals") || !r.at("normals").is_array())
      fail(w + ".region", "'normals' must be an array of rows");
    for (const auto& row : r.at("normals")) normals.push_back(numbers(row, w + ".region.normals"));
    if (!r.contains("offsets")) fail(w + ".region", "missing 'offsets'");
    auto offsets = numbers(r.at("offsets"), w + ".region.offsets");
    s.region = wrap(w + ".region",
                    [&] { return checks::HalfSpaceRegion::normalized(normals, offsets); });
  }
  if (j.contains("expect")) s.expect = str(j, "expect", w);
  s.offset = num(j, "offset", w, 0.0);
  s.amplitude = num(j, "amplitude", w, 0.0);
  s.threshold = num(j, "threshold", w, s.threshold);
  return s;
}

std::vector<CheckSpec> battery(const json& j, const std::string& where) {
  std::vector<CheckSpec> out;
  if (!j.is_array()) fail(where, "expected an array of checks");
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(check(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

void validate_check(const CheckSpec& s, const Fixture& fx, const std::string& where) {
  const std::string w = where + " '" + s.describe() + "'";
  for (const auto& p : s.pads)
    if (!fx.bench.uut.find(p)) fail(w, "unknown pad '" + p + "'");
  if (s.kind == CheckKind::RailSense) {
    if (!fx.rail_sense) fail(w, "fixture has no rail_sense section");
    return;
  }
  if (s.pads.empty()) fail(w, "needs at least one pad");
  if (!(s.dt > 0.0)) fail(w, "dt must be > 0");
  if (s.samples < 1) fail(w, "samples must be >= 1");
  switch (s.kind) {
    case CheckKind::Single:
      if (s.levels.size() != 1 || s.windows.size() != 1)
        fail(w, "single check needs one level and one window");
      break;
    case CheckKind::Diff:
      if (s.levels.size() < 2 || s.windows.size() != s.levels.size() - 1)
        fail(w, "diff check needs >= 2 levels and one window per step");
      for (std::size_t a = 0; a < s.levels.size(); ++a)
        for (std::size_t b = a + 1; b < s.levels.size(); ++b)
          if (s.levels[a] == s.levels[b]) fail(w, "diff levels must be distinct");
      break;
    case CheckKind::Shape:
      if (s.levels.empty() || !s.region) fail(w, "shape check needs levels and a region");
      if (s.region->dimension() != s.pads.size() * s.levels.size())
        fail(w, "region dimension must equal pads x levels");
      break;
    case CheckKind::Classify:
      if (s.levels.empty() || s.expect.empty()) fail(w, "classify check needs levels and expect");
      if (fx.catalog.empty()) fail(w, "classify check needs a catalog");
      for (const auto& [tag, region] : fx.catalog)
        if (region.dimension() != s.pads.size() * s.levels.size())
          fail(w, "catalog region '" + tag + "' has the wrong dimension");
      break;
    case CheckKind::Corr:
      if (s.pads.size() != 1) fail(w, "corr check drives exactly one pad");
      if (s.samples < 2) fail(w, "corr check needs >= 2 samples");
      if (!fx.bench.uut.consumption) fail(w, "corr check needs uut.consumption");
      if (!(s.amplitude != 0.0)) fail(w, "corr drive amplitude must be nonzero");
      if (!(s.threshold >= -1.0 && s.threshold <= 1.0)) fail(w, "threshold must lie in [-1, 1]");
      break;
    default:
      break;
  }
}

}  // namespace

void Fixture::validate() const {
  wrap("uut", [&] {
    bench.uut.validate();
    return 0;
  });
  for (const auto& [id, c] : bench.contacts) {
    if (!bench.uut.find(id)) fail("contacts", "unknown pad '" + id + "'");
    wrap("contacts." + id, [&] {
      c.validate();
      return 0;
    });
  }
  wrap("protection", [&] {
    protection.validate();
    return 0;
  });
  if (rail_sense) {
    if (rail_sense->inject.empty()) fail("rail_sense", "inject at least one pad");
    for (const auto& [id, a] : rail_sense->inject) {
      if (!bench.uut.find(id)) fail("rail_sense", "unknown pad '" + id + "'");
      if (!std::isfinite(a)) fail("rail_sense", "injection must be finite");
    }
  }
  for (const auto& s : plan.setup) validate_check(s, *this, "plan.setup");
  for (const auto& s : plan.diagnosis) validate_check(s, *this, "plan.diagnosis");
  for (const auto& s : plan.cleanup) validate_check(s, *this, "plan.cleanup");
  if (dummy) {
    wrap("dummy", [&] {
      dummy->validate();
      return 0;
    });
    for (const auto& sig : dummy->signatures)
      if (!bench.uut.find(sig.pad))
        fail("dummy", "pad '" + sig.pad + "' has no needle on this fixture");
  }
  if (probers < 1) fail("probers", "need at least one prober");
  if (!(meter_noise >= 0.0) || !std::isfinite(meter_noise))
    fail("meter_noise", "must be finite and >= 0");
}

sim::UutModel Fixture::powered_uut() const {
  sim::UutModel m = bench.uut;
  m.powered = true;
  return m;
}

Fixture parse_fixture(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(Errc::Config, std::string("fixture is not valid JSON: ") + e.what());
  }
  allow_keys(root, "fixture",
             {"name", "uut", "contacts", "protection", "rail_sense", "needle_log", "plan", "dummy",
              "catalog", "probers", "meter_noise"});
  Fixture fx;
  fx.name = str(root, "name", "fixture", "fixture");
  if (!root.contains("uut")) fail("fixture", "missing 'uut'");
  fx.bench.uut = uut(root.at("uut"), "uut");

  sim::ContactState base;
  if (root.contains("contacts")) {
    const auto& c = root.at("contacts");
    allow_keys(c, "contacts", {"default", "pads"});
    if (c.contains("default")) base = contact(c.at("default"), "contacts.default", base);
    for (const auto& p : fx.bench.uut.pads) fx.bench.contacts[p.id] = base;
    if (c.contains("pads")) {
      if (!c.at("pads").is_object()) fail("contacts.pads", "expected an object");
      for (const auto& [id, v] : c.at("pads").items()) {
        if (!fx.bench.uut.find(id)) fail("contacts.pads", "unknown pad '" + id + "'");
        fx.bench.contacts[id] = contact(v, "contacts.pads." + id, base);
      }
    }
  } else {
    for (const auto& p : fx.bench.uut.pads) fx.bench.contacts[p.id] = base;
  }

  if (root.contains("protection")) {
    const auto& p = root.at("protection");
    allow_keys(p, "protection", {"max_abs_voltage", "max_abs_current"});
    fx.protection.max_abs_voltage = num(p, "max_abs_voltage", "protection", 5.0);
    fx.protection.max_abs_current = num(p, "max_abs_current", "protection", 50e-3);
  }

  if (root.contains("rail_sense")) {
    const auto& r = root.at("rail_sense");
    allow_keys(r, "rail_sense", {"rail", "inject", "band"});
    RailSenseConfig rs;
    rs.rail = rail(r, "rail", "rail_sense", sim::Rail::Vcc);
    if (!r.contains("inject") || !r.at("inject").is_object())
      fail("rail_sense", "'inject' maps pad ids to amperes");
    for (const auto& [id, v] : r.at("inject").items()) {
      if (!v.is_number()) fail("rail_sense.inject", "expected amperes");
      rs.inject[id] = v.get<double>();
    }
    if (r.contains("band")) rs.band = window(r.at("band"), "rail_sense.band");
    fx.rail_sense = rs;
  }

  if (root.contains("needle_log")) {
    const auto& n = root.at("needle_log");
    allow_keys(n, "needle_log", {"last_replacement_cycle", "current_cycle", "window_cycles"});
    fx.needle_log.last_replacement_cycle = count(n, "last_replacement_cycle", "needle_log", 0);
    fx.needle_log.current_cycle = count(n, "current_cycle", "needle_log", 0);
    fx.needle_log.window_cycles = count(n, "window_cycles", "needle_log", 0);
  }

  if (root.contains("plan")) {
    const auto& p = root.at("plan");
    allow_keys(p, "plan", {"setup", "diagnosis", "cleanup"});
    if (p.contains("setup")) fx.plan.setup = battery(p.at("setup"), "plan.setup");
    if (p.contains("diagnosis")) fx.plan.diagnosis = battery(p.at("diagnosis"), "plan.diagnosis");
    if (p.contains("cleanup")) fx.plan.cleanup = battery(p.at("cleanup"), "plan.cleanup");
  }

  if (root.contains("dummy")) {
    const auto& d = root.at("dummy");
    allow_keys(d, "dummy", {"uut", "signatures"});
    sim::DummyUutSpec spec;
    if (!d.contains("uut")) fail("dummy", "missing 'uut'");
    spec.model = uut(d.at("uut"), "dummy.uut");
    if (d.contains("signatures")) {
      if (!d.at("signatures").is_array()) fail("dummy.signatures", "expected an array");
      for (const auto& s : d.at("signatures")) {
        allow_keys(s, "dummy.signatures", {"pad", "mode", "level", "band"});
        sim::DummySignature sig;
        sig.pad = str(s, "pad", "dummy.signatures");
        if (s.contains("mode"))
          sig.mode = wrap("dummy.signatures",
                          [&] { return sim::parse_drive_mode(str(s, "mode", "dummy")); });
        sig.level = num(s, "level", "dummy.signatures", sig.level);
        if (!s.contains("band")) fail("dummy.signatures(" + sig.pad + ")", "missing 'band'");
        auto b = numbers(s.at("band"), "dummy.signatures.band");
        if (b.size() != 2) fail("dummy.signatures(" + sig.pad + ")", "band is [lo, hi]");
        sig.lo = b[0];
        sig.hi = b[1];
        spec.signatures.push_back(sig);
      }
    }
    fx.dummy = std::move(spec);
  }

  if (root.contains("catalog")) {
    const auto& c = root.at("catalog");
    if (!c.is_array()) fail("catalog", "expected an array");
    for (const auto& e : c) {
      allow_keys(e, "catalog", {"tag", "normals", "offsets"});
      const std::string tag = str(e, "tag", "catalog");
      std::vector<std::vector<double>> normals;
      if (!e.contains("normals") || !e.at("normals").is_array())
        fail("catalog(" + tag + ")", "'normals' must be an array of rows");
      for (const auto& row : e.at("normals")) normals.push_back(numbers(row, "catalog.normals"));
      if (!e.contains("offsets")) fail("catalog(" + tag + ")", "missing 'offsets'");
      auto offsets = numbers(e.at("offsets"), "catalog.offsets");
      fx.catalog.emplace_back(tag, wrap("catalog(" + tag + ")", [&] {
                                return checks::HalfSpaceRegion::normalized(normals, offsets);
                              }));
    }
  }

  fx.probers = count(root, "probers", "fixture", 1);
  fx.meter_noise = num(root, "meter_noise", "fixture", 0.0);
  fx.validate();
  return fx;
}

Fixture load_fixture(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Config, "cannot open fixture '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_fixture(ss.str());
}

checks::HalfSpaceRegion parse_region(std::string_view json_text) {
  json r;
  try {
    r = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(Errc::Config, std::string("region is not valid JSON: ") + e.what());
  }
  if (!r.is_object()) fail("region", "expected an object");
  allow_keys(r, "region", {"normals", "offsets"});
  if (!r.contains("normals") || !r.at("normals").is_array())
    fail("region", "'normals' must be an array of rows");
  std::vector<std::vector<double>> normals;
  for (const auto& row : r.at("normals")) normals.push_back(numbers(row, "region.normals"));
  if (!r.contains("offsets")) fail("region", "missing 'offsets'");
  auto offsets = numbers(r.at("offsets"), "region.offsets");
  return wrap("region", [&] { return checks::HalfSpaceRegion::normalized(normals, offsets); });
}

}  // namespace vcit::exec
