#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qkdsim/attacks.hpp"
#include "qkdsim/receiver.hpp"

namespace qkdsim {

enum class InvalidPolicy : std::uint8_t { as_error, as_loss };

std::string_view to_string(InvalidPolicy p);
std::optional<InvalidPolicy> parse_invalid_policy(std::string_view s);

struct SourceConfig {
  /// Probability that a pulse carries two photons instead of one.
  double multi_photon_prob = 0.0;
  friend bool operator==(const SourceConfig&, const SourceConfig&) = default;
};

struct RunConfig {
  std::string scenario = "custom";
  std::uint64_t rounds = 100'000;
  std::uint64_t seed = 1;
  ReceiverConfig receiver;
  SourceConfig source;
  AttackSpec attack = attack::None{};
  InvalidPolicy invalid_policy = InvalidPolicy::as_error;
  double test_fraction = 0.5;
  double abort_qber = 0.10;
  double channel_loss = 0.0;
  unsigned max_photons = kDefaultMaxPhotons;

  /// Throws ConfigError naming the first out-of-range field.
  void validate() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Alice's emission for one round.
struct Emission {
  Bit bit = 0;
  Basis basis = Basis::computational;
  unsigned photons = 1;
  PureState state;
};

/// Alice's pulses travel on the regular path at t_half.
inline constexpr PulseId kAlicePulse{TimeBin::t_half, Path::regular};

Emission alice_prepare(const SourceConfig& source, Rng& rng);
/// `photons` photons in Alice's pulse, vacuum when zero.
PureState alice_state(Basis basis, Bit bit, unsigned photons);

/// Bob's three-way classification of a round.
struct OutcomeClass {
  enum class Kind : std::uint8_t { valid, loss, invalid };
  Kind kind = Kind::loss;
  Bit bit = 0;  // meaningful for valid only

  static OutcomeClass valid(Bit b) { return {Kind::valid, b}; }
  static OutcomeClass loss() { return {Kind::loss, 0}; }
  static OutcomeClass invalid() { return {Kind::invalid, 0}; }

  friend bool operator==(const OutcomeClass&, const OutcomeClass&) = default;
};

std::string to_string(const OutcomeClass& c);

/// No click -> loss; one click -> valid; double clicks (including clicks in
/// both arms of a passive receiver) -> invalid, or loss under as_loss. A
/// burned detector produces no usable click; the run-level flag is raised
/// separately from `ClickPattern::any_burned`.
OutcomeClass classify_outcome(const ClickPattern& clicks, InvalidPolicy policy);

struct RoundRecord {
  Bit alice_bit = 0;
  Basis alice_basis = Basis::computational;
  unsigned photons_emitted = 1;
  std::optional<EveRecord> eve;
  EveClaim claim = Bit{0};
  std::string delivered;  // filled only when records are kept
  Basis bob_basis = Basis::computational;
  ClickPattern raw_clicks;
  OutcomeClass outcome;
  /// Bob's key bit: the valid bit, or a coin flip for an invalid round.
  Bit bob_bit = 0;
};

struct SiftedPair {
  Bit alice_bit = 0;
  Bit bob_bit = 0;
  /// Invalid round kept under as_error: always counted as a mismatch.
  bool flagged_error = false;
  std::size_t round = 0;

  bool mismatched() const { return flagged_error || alice_bit != bob_bit; }
};

/// Rounds with matching bases whose outcome is valid (or invalid under
/// as_error, flagged), in round order.
std::vector<SiftedPair> sift(std::span<const RoundRecord> records);

struct QberEstimate {
  std::optional<double> qber;  // empty when there was nothing to test
  std::size_t sample_size = 0;
  std::vector<SiftedPair> remaining;
};

/// Reveals ceil(test_fraction * n) positions chosen without replacement.
QberEstimate estimate_qber(std::vector<SiftedPair> sifted, double test_fraction, Rng& rng);

struct RunReport {
  std::string scenario;
  std::string attack;
  std::uint64_t rounds = 0;
  std::uint64_t seed = 0;
  std::optional<double> qber;
  double loss_rate = 0.0;
  double invalid_rate = 0.0;
  double double_click_rate = 0.0;
  bool aborted = false;
  double eve_info = 0.0;
  /// Eve information over retained bits that came from two-photon pulses.
  std::optional<double> multi_photon_eve_info;
  std::size_t sifted_key_length = 0;
  std::size_t test_sample_size = 0;
  std::size_t final_key_length = 0;
  std::size_t matched_rounds = 0;
  std::size_t valid_rounds = 0;
  std::size_t loss_rounds = 0;
  std::size_t invalid_rounds = 0;
  bool burned = false;

  friend bool operator==(const RunReport&, const RunReport&) = default;
};

struct RunOptions {
  bool keep_records = false;
  /// Replaces the seed of Bob's private random stream (basis draws and
  /// measurement randomness). Used to check that Eve's behaviour does not
  /// depend on Bob's choices.
  std::optional<std::uint64_t> bob_seed;
};

struct RunResult {
  RunReport report;
  std::vector<RoundRecord> records;
};

/// Runs the configured scenario. Deterministic for a fixed config.
RunReport run(const RunConfig& config);
RunResult run_detailed(const RunConfig& config, const RunOptions& options = {});
/// Runs with a caller-supplied strategy; `config.attack` is ignored.
RunResult run_with(const RunConfig& config, AttackStrategy& strategy,
                   const RunOptions& options = {});

}  // namespace qkdsim
