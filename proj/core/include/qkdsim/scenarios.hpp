#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qkdsim/protocol.hpp"
#include "qkdsim/receiver.hpp"

namespace qkdsim {

struct Expected {
  double value = 0.0;
  double tolerance = 0.0;

  bool matches(double observed) const;
};

/// What a preset's report should look like at its default seed.
struct ExpectedSignature {
  std::optional<Expected> qber;
  std::optional<Expected> loss_rate;
  std::optional<Expected> eve_info;
  std::optional<bool> aborted;

  bool empty() const { return !qber && !loss_rate && !eve_info && !aborted; }
};

struct Scenario {
  std::string name;
  std::string description;
  RunConfig config;
  ExpectedSignature expected;
};

const std::vector<Scenario>& scenarios();
const Scenario* find_scenario(std::string_view name);

struct ReceiverPreset {
  std::string name;
  std::string description;
  ReceiverConfig config;
};

/// ideal      active, detectors that burn before they can be blinded
/// blindable  active, default detectors (N1 = 50, L = 1000, N2 = 1e6)
/// leaky      blindable, with the basis set before the gate opens
/// passive    passive basis choice, blocked port intact
/// gated      passive, computational gate [t0, t_half], hadamard gate [t_half, t1]
/// compromised passive with the blocked port opened
const std::vector<ReceiverPreset>& receiver_presets();
const ReceiverPreset* find_receiver_preset(std::string_view name);

struct SignatureCheck {
  bool passed = true;
  std::vector<std::string> failures;
};

SignatureCheck check_signature(const ExpectedSignature& expected, const RunReport& report);

}  // namespace qkdsim
