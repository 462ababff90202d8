#include "qkdsim/config.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "qkdsim/errors.hpp"
#include "qkdsim/scenarios.hpp"

namespace qkdsim {
namespace {

namespace pt = boost::property_tree;

const std::set<std::string> kRootKeys{"preset",        "scenario",   "rounds",
                                      "seed",          "attack",     "invalid_policy",
                                      "test_fraction", "abort_qber", "channel_loss",
                                      "max_photons"};
const std::map<std::string, std::set<std::string>> kSections{
    {"source", {"multi_photon_prob"}},
    {"receiver",
     {"preset", "style", "compromised", "basis_leak", "gate", "computational_gate",
      "hadamard_gate", "n1", "linear_threshold", "n2"}},
    {"trojan_pony", {"photons"}},
    {"bright_illumination", {"pulse_photons", "background", "match_channel_loss"}},
};

[[noreturn]] void fail(std::string_view field, std::string_view why) {
  throw ConfigError(fmt::format("{}: {}", field, why));
}

template <class T>
T parse_number(std::string_view field, const std::string& text) {
  T value{};
  const char* first = text.data();
  const char* last = first + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || text.empty()) {
    fail(field, fmt::format("expected a number, got '{}'", text));
  }
  return value;
}

bool parse_bool(std::string_view field, const std::string& text) {
  if (text == "true" || text == "yes" || text == "1") return true;
  if (text == "false" || text == "no" || text == "0") return false;
  fail(field, fmt::format("expected true or false, got '{}'", text));
}

std::pair<TimeBin, TimeBin> parse_gate(std::string_view field, const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) fail(field, fmt::format("expected open:close, got '{}'", text));
  const auto open = parse_time_bin(std::string_view(text).substr(0, colon));
  const auto close = parse_time_bin(std::string_view(text).substr(colon + 1));
  if (!open || !close) {
    fail(field, fmt::format("time bins are t0, t_half, t1 (got '{}')", text));
  }
  return {*open, *close};
}

// Accessor that remembers the dotted field name for diagnostics.
class Section {
 public:
  Section(std::string prefix, const pt::ptree* tree) : prefix_(std::move(prefix)), tree_(tree) {}

  std::optional<std::string> get(const std::string& key) const {
    if (!tree_) return std::nullopt;
    const auto it = tree_->find(key);
    if (it == tree_->not_found()) return std::nullopt;
    return it->second.data();
  }
  std::string field(const std::string& key) const {
    return prefix_.empty() ? key : prefix_ + "." + key;
  }

 private:
  std::string prefix_;
  const pt::ptree* tree_;
};

void check_keys(const pt::ptree& root) {
  std::set<std::string> seen_root;
  for (const auto& [name, child] : root) {
    if (const auto sec = kSections.find(name); sec != kSections.end()) {
      if (!child.data().empty()) fail(name, "is a section, not a key");
      std::set<std::string> seen;
      for (const auto& [key, value] : child) {
        if (!sec->second.contains(key)) fail(name + "." + key, "unknown key");
        if (!seen.insert(key).second) fail(name + "." + key, "duplicate key");
      }
      continue;
    }
    if (!child.empty()) fail(name, "unknown section");
    if (!kRootKeys.contains(name)) fail(name, "unknown key");
    if (!seen_root.insert(name).second) fail(name, "duplicate key");
  }
}

void apply_receiver(const Section& s, ReceiverConfig& r) {
  if (const auto v = s.get("preset")) {
    const ReceiverPreset* preset = find_receiver_preset(*v);
    if (!preset) fail(s.field("preset"), fmt::format("unknown receiver preset '{}'", *v));
    r = preset->config;
  }
  if (const auto v = s.get("style")) {
    ReceiverStyle style;
    if (*v == "active") {
      style = ReceiverStyle::active;
    } else if (*v == "passive") {
      style = ReceiverStyle::passive;
    } else {
      fail(s.field("style"), fmt::format("expected active or passive, got '{}'", *v));
    }
    if (style != r.style) {
      r.style = style;
      r.detectors.assign(style == ReceiverStyle::active ? 2 : 4, r.detectors.front());
      if (style == ReceiverStyle::active) r.compromised = false;
      if (style == ReceiverStyle::passive) r.basis_leak = false;
    }
  }
  if (const auto v = s.get("compromised")) r.compromised = parse_bool(s.field("compromised"), *v);
  if (const auto v = s.get("basis_leak")) r.basis_leak = parse_bool(s.field("basis_leak"), *v);

  auto set_gate = [&](const std::string& key, std::size_t first, std::size_t count) {
    const auto v = s.get(key);
    if (!v) return;
    const auto [open, close] = parse_gate(s.field(key), *v);
    for (std::size_t i = first; i < first + count && i < r.detectors.size(); ++i) {
      r.detectors[i].gate_open = open;
      r.detectors[i].gate_close = close;
    }
  };
  set_gate("gate", 0, r.detectors.size());
  const bool passive = r.style == ReceiverStyle::passive;
  for (const char* key : {"computational_gate", "hadamard_gate"}) {
    if (s.get(key) && !passive) fail(s.field(key), "only a passive receiver has per-arm gates");
  }
  set_gate("computational_gate", 0, 2);
  set_gate("hadamard_gate", 2, 2);

  for (const char* key : {"n1", "linear_threshold", "n2"}) {
    const auto v = s.get(key);
    if (!v) continue;
    const auto value = parse_number<std::int64_t>(s.field(key), *v);
    for (DetectorModel& d : r.detectors) {
      (std::string_view(key) == "n1"                 ? d.n1
       : std::string_view(key) == "linear_threshold" ? d.linear_threshold
                                                     : d.n2) = value;
    }
  }
}

void apply_attack(const Section& root, const pt::ptree& tree, RunConfig& c) {
  if (const auto v = root.get("attack")) {
    const auto spec = attack_from_name(*v);
    if (!spec) {
      fail("attack", fmt::format("unknown attack '{}' (known: {})", *v,
                                 fmt::join(attack_names(), ", ")));
    }
    if (spec->index() != c.attack.index()) c.attack = *spec;
  }
  // Parameter sections are named after their strategy; a section for any
  // other strategy is almost certainly a mistake.
  const std::string name(attack_name(c.attack));
  for (const char* section : {"trojan_pony", "bright_illumination"}) {
    if (section != name && tree.find(section) != tree.not_found()) {
      fail(section, fmt::format("parameters given, but the attack is '{}'", name));
    }
  }
  const auto it = tree.find(name);
  const Section s(name, it == tree.not_found() ? nullptr : &it->second);
  if (auto* t = std::get_if<attack::TrojanPony>(&c.attack)) {
    if (const auto v = s.get("photons")) t->photons = parse_number<unsigned>(s.field("photons"), *v);
  } else if (auto* b = std::get_if<attack::BrightIllumination>(&c.attack)) {
    if (const auto v = s.get("pulse_photons")) {
      b->pulse_photons = parse_number<double>(s.field("pulse_photons"), *v);
    }
    if (const auto v = s.get("background")) {
      b->background = parse_number<double>(s.field("background"), *v);
    }
    if (const auto v = s.get("match_channel_loss")) {
      b->match_channel_loss = parse_bool(s.field("match_channel_loss"), *v);
    }
  }
}

const pt::ptree* child(const pt::ptree& root, const std::string& name) {
  const auto it = root.find(name);
  return it == root.not_found() ? nullptr : &it->second;
}

std::string gate_string(const DetectorModel& d) {
  return fmt::format("{}:{}", to_string(d.gate_open), to_string(d.gate_close));
}

}  // namespace

RunConfig parse_config(std::string_view text, std::string_view source_name) {
  pt::ptree tree;
  std::istringstream in{std::string(text)};
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(fmt::format("{}:{}: {}", source_name, e.line(), e.message()));
  }
  check_keys(tree);

  const Section root("", &tree);
  RunConfig c;
  if (const auto v = root.get("preset")) {
    const Scenario* s = find_scenario(*v);
    if (!s) fail("preset", fmt::format("unknown scenario preset '{}'", *v));
    c = s->config;
  }
  if (const auto v = root.get("scenario")) c.scenario = *v;
  if (const auto v = root.get("rounds")) c.rounds = parse_number<std::uint64_t>("rounds", *v);
  if (const auto v = root.get("seed")) c.seed = parse_number<std::uint64_t>("seed", *v);
  if (const auto v = root.get("invalid_policy")) {
    const auto p = parse_invalid_policy(*v);
    if (!p) fail("invalid_policy", fmt::format("expected as_error or as_loss, got '{}'", *v));
    c.invalid_policy = *p;
  }
  if (const auto v = root.get("test_fraction")) {
    c.test_fraction = parse_number<double>("test_fraction", *v);
  }
  if (const auto v = root.get("abort_qber")) c.abort_qber = parse_number<double>("abort_qber", *v);
  if (const auto v = root.get("channel_loss")) {
    c.channel_loss = parse_number<double>("channel_loss", *v);
  }
  if (const auto v = root.get("max_photons")) {
    c.max_photons = parse_number<unsigned>("max_photons", *v);
  }

  const Section source("source", child(tree, "source"));
  if (const auto v = source.get("multi_photon_prob")) {
    c.source.multi_photon_prob = parse_number<double>(source.field("multi_photon_prob"), *v);
  }
  apply_receiver(Section("receiver", child(tree, "receiver")), c.receiver);
  apply_attack(root, tree, c);

  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config file '{}'", path.string()));
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.string());
}

std::string serialize_config(const RunConfig& c) {
  const ReceiverConfig& r = c.receiver;
  for (const DetectorModel& d : r.detectors) {
    const DetectorModel& f = r.detectors.front();
    if (d.n1 != f.n1 || d.linear_threshold != f.linear_threshold || d.n2 != f.n2) {
      throw UsageError("config files describe detectors with shared thresholds only");
    }
  }

  std::string out;
  auto line = [&](std::string_view key, const auto& value) {
    out += fmt::format("{} = {}\n", key, value);
  };
  line("scenario", c.scenario);
  line("rounds", c.rounds);
  line("seed", c.seed);
  line("attack", attack_name(c.attack));
  line("invalid_policy", to_string(c.invalid_policy));
  // {} prints the shortest string that reads back to the same double.
  line("test_fraction", c.test_fraction);
  line("abort_qber", c.abort_qber);
  line("channel_loss", c.channel_loss);
  line("max_photons", c.max_photons);

  out += "\n[source]\n";
  line("multi_photon_prob", c.source.multi_photon_prob);

  out += "\n[receiver]\n";
  line("style", to_string(r.style));
  if (r.style == ReceiverStyle::active) {
    if (r.detectors[0] != r.detectors[1]) {
      throw UsageError("config files describe active receivers with one gate");
    }
    line("basis_leak", r.basis_leak);
    line("gate", gate_string(r.detectors[0]));
  } else {
    if (r.detectors[0] != r.detectors[1] || r.detectors[2] != r.detectors[3]) {
      throw UsageError("config files describe passive receivers with one gate per arm");
    }
    line("compromised", r.compromised);
    line("computational_gate", gate_string(r.detectors[0]));
    line("hadamard_gate", gate_string(r.detectors[2]));
  }
  line("n1", r.detectors[0].n1);
  line("linear_threshold", r.detectors[0].linear_threshold);
  line("n2", r.detectors[0].n2);

  if (const auto* t = std::get_if<attack::TrojanPony>(&c.attack)) {
    out += "\n[trojan_pony]\n";
    line("photons", t->photons);
  } else if (const auto* b = std::get_if<attack::BrightIllumination>(&c.attack)) {
    out += "\n[bright_illumination]\n";
    line("pulse_photons", b->pulse_photons);
    line("background", b->background);
    line("match_channel_loss", b->match_channel_loss);
  }
  return out;
}

}  // namespace qkdsim
