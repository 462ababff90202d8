#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "qkdsim/pure_state.hpp"
#include "qkdsim/receiver.hpp"
#include "qkdsim/rng.hpp"

namespace qkdsim {

/// Parameter blocks, one per strategy. The variant index doubles as the
/// strategy identity in configuration files.
namespace attack {

struct None {
  friend bool operator==(const None&, const None&) = default;
};
struct InterceptResend {
  friend bool operator==(const InterceptResend&, const InterceptResend&) = default;
};
/// Resends `photons` identical photons in the measured polarization.
struct TrojanPony {
  unsigned photons = 20;
  friend bool operator==(const TrojanPony&, const TrojanPony&) = default;
};
struct FakedStatesTiming {
  friend bool operator==(const FakedStatesTiming&, const FakedStatesTiming&) = default;
};
struct FixedApparatus {
  friend bool operator==(const FixedApparatus&, const FixedApparatus&) = default;
};
/// Blinding background plus a bright resend pulse. With `match_channel_loss`
/// Eve sits at the source, bypasses the lossy line and suppresses rounds so
/// Bob sees exactly the configured channel loss.
struct BrightIllumination {
  double pulse_photons = 1100;
  double background = 100;
  bool match_channel_loss = false;
  friend bool operator==(const BrightIllumination&, const BrightIllumination&) = default;
};
struct PhotonNumberSplitting {
  friend bool operator==(const PhotonNumberSplitting&, const PhotonNumberSplitting&) = default;
};
struct BasisProbe {
  friend bool operator==(const BasisProbe&, const BasisProbe&) = default;
};

}  // namespace attack

using AttackSpec =
    std::variant<attack::None, attack::InterceptResend, attack::TrojanPony,
                 attack::FakedStatesTiming, attack::FixedApparatus, attack::BrightIllumination,
                 attack::PhotonNumberSplitting, attack::BasisProbe>;

std::string_view attack_name(const AttackSpec& spec);
/// Default-parameter spec for a strategy name, or nullopt if unknown.
std::optional<AttackSpec> attack_from_name(std::string_view name);
std::vector<std::string_view> attack_names();

/// Everything a strategy may know about the deployment before the run.
struct AttackSetup {
  ReceiverConfig receiver;
  double multi_photon_prob = 0.0;
  double channel_loss = 0.0;
  unsigned max_photons = kDefaultMaxPhotons;
};

/// Per-round side information. `leaked_bob_basis` is only filled for
/// strategies that declare basis-oracle access on a leaking receiver.
struct RoundContext {
  std::optional<Basis> leaked_bob_basis;
};

/// A stored photon Eve measures once Alice's basis is public.
struct DeferredMeasurement {
  PureState stored;
};

/// Eve's statement about this round's key bit, fixed when she hands the
/// incident to Bob.
using EveClaim = std::variant<Bit, DeferredMeasurement>;

struct EveRecord {
  Basis measured_basis = Basis::computational;
  Bit measured_bit = 0;
};

struct Delivery {
  Incident incident;
  EveClaim claim;
  std::optional<Basis> forced_arm;
  std::optional<EveRecord> record;
};

/// Eve in the channel. `bind` is called once before any round and refuses
/// (AttackRefused) setups the strategy cannot work against.
class AttackStrategy {
 public:
  virtual ~AttackStrategy() = default;

  virtual std::string_view name() const = 0;
  virtual bool uses_basis_oracle() const { return false; }
  /// Eve sits at Alice's output, before the lossy channel.
  virtual bool intercepts_at_source() const { return false; }
  virtual void bind(const AttackSetup& setup) { (void)setup; }
  virtual Delivery intercept(const PureState& in_flight, const RoundContext& ctx, Rng& rng) = 0;
};

std::unique_ptr<AttackStrategy> make_attack(const AttackSpec& spec);

/// Eve's photon-counting measurement of Alice's pulse in `basis`. Returns
/// nullopt when no photon arrived; multi-photon disagreements go by majority,
/// ties by coin.
std::optional<Bit> measure_ideal(const PureState& state, Basis basis, Rng& rng);

/// Resend table for a generic measure-resend attack: what to send after
/// measuring (basis, bit). Indexed [basis][bit].
struct ResendTable {
  std::array<std::array<std::optional<Incident>, 2>, 2> entries;
  /// Sent when Alice's photon never arrives (keeps any blinding in place).
  std::optional<Incident> on_vacuum;

  const Incident& at(Basis b, Bit bit) const;
};

/// Measure in a uniformly random basis, resend the table entry, claim the
/// measured bit. Used to replay synthesized recipes end to end.
std::unique_ptr<AttackStrategy> make_table_attack(std::string name, ResendTable table);

}  // namespace qkdsim
