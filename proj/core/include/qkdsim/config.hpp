#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "qkdsim/protocol.hpp"

namespace qkdsim {

/// INI-style run configuration. Root keys:
///
///   preset          start from a named scenario, then apply the keys below
///   scenario        report label
///   rounds, seed, attack, invalid_policy, test_fraction, abort_qber,
///   channel_loss, max_photons
///
/// Sections:
///
///   [source]    multi_photon_prob
///   [receiver]  preset, style (active|passive), compromised, basis_leak,
///               gate, computational_gate, hadamard_gate (each "open:close",
///               e.g. "t0:t_half"), n1, linear_threshold, n2
///   [trojan_pony]          photons
///   [bright_illumination]  pulse_photons, background, match_channel_loss
///
/// A parameter section is only accepted for the selected attack.
///
/// Unknown keys and sections are errors. The result is validated.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(std::string_view text, std::string_view source_name = "<config>");

/// Writes every field explicitly, so that parse_config(serialize_config(c)) == c.
std::string serialize_config(const RunConfig& config);

}  // namespace qkdsim
