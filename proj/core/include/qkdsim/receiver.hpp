#pragma once

#include <array>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qkdsim/detector.hpp"
#include "qkdsim/linear_optics.hpp"
#include "qkdsim/macro_pulse.hpp"
#include "qkdsim/pure_state.hpp"
#include "qkdsim/rng.hpp"

namespace qkdsim {

enum class ReceiverStyle : std::uint8_t { active, passive };

std::string_view to_string(ReceiverStyle s);

/// Bob's measurement setup.
///
/// Active: one polarizing beam splitter whose basis Bob sets per round, two
/// detectors ordered {bit 0, bit 1}.
///
/// Passive: a 50/50 polarization-independent beam splitter picks the arm, each
/// arm measures in a fixed basis with two detectors. Detectors are ordered
/// {computational 0, computational 1, hadamard 0, hadamard 1}. The splitter's
/// second input port is normally blocked; `compromised` means it has been
/// opened to the outside.
///
/// `basis_leak` (active only) means the PBS orientation is set, and can be
/// probed, before the detectors are gated on.
struct ReceiverConfig {
  ReceiverStyle style = ReceiverStyle::active;
  std::vector<DetectorModel> detectors{DetectorModel{}, DetectorModel{}};
  bool compromised = false;
  bool basis_leak = false;

  static ReceiverConfig active(DetectorModel model = {}, bool basis_leak = false);
  static ReceiverConfig passive(DetectorModel computational = {}, DetectorModel hadamard = {},
                                bool compromised = false);

  void validate() const;
  std::size_t detector_index(Basis arm, Bit bit) const;
  const DetectorModel& detector(Basis arm, Bit bit) const {
    return detectors[detector_index(arm, bit)];
  }
  /// Pulses an outsider can inject light into.
  std::vector<PulseId> input_pulses() const;

  friend bool operator==(const ReceiverConfig&, const ReceiverConfig&) = default;
};

/// What arrives at Bob's input ports: either a few-photon quantum state or a
/// bright semiclassical pulse (which carries any blinding background).
class Incident {
 public:
  Incident(PureState state) : signal_(std::move(state)) {}  // NOLINT(google-explicit-constructor)
  Incident(MacroPulse pulse) : signal_(std::move(pulse)) {}  // NOLINT(google-explicit-constructor)

  /// No light at all on Alice's pulse.
  static Incident nothing();

  bool exact() const { return std::holds_alternative<PureState>(signal_); }
  const PureState& state() const { return std::get<PureState>(signal_); }
  const MacroPulse& macro() const { return std::get<MacroPulse>(signal_); }
  double background() const { return exact() ? 0.0 : macro().background(); }

  std::string describe() const;

 private:
  std::variant<PureState, MacroPulse> signal_;
};

struct ActiveResponse {
  DetectorOutcome bit0 = DetectorOutcome::no_click;
  DetectorOutcome bit1 = DetectorOutcome::no_click;
};

struct PassiveResponse {
  Basis arm = Basis::computational;
  /// {computational 0, computational 1, hadamard 0, hadamard 1}
  std::array<DetectorOutcome, 4> outcomes{};
};

/// The click pair Bob interprets for a round, in the basis he ended up using.
/// `other_arm_click` is set when a passive receiver saw clicks in both arms.
struct ClickPattern {
  Basis basis = Basis::computational;
  DetectorOutcome bit0 = DetectorOutcome::no_click;
  DetectorOutcome bit1 = DetectorOutcome::no_click;
  bool other_arm_click = false;
  bool any_burned = false;

  bool double_click() const {
    return other_arm_click ||
           (bit0 == DetectorOutcome::click && bit1 == DetectorOutcome::click);
  }
  friend bool operator==(const ClickPattern&, const ClickPattern&) = default;
};

ClickPattern to_pattern(Basis basis, const ActiveResponse& r);
ClickPattern to_pattern(const PassiveResponse& r);

template <class T>
struct Weighted {
  double probability = 0.0;
  T value;
};

/// Optics Bob applies before detection (U_B) as a transform chain. For a
/// passive receiver `active_basis` is ignored; `forced_arm` models an opened
/// blocked port being used to steer the entry splitter.
std::vector<ModeTransform> receiver_optics(const ReceiverConfig& config, Basis active_basis,
                                           std::optional<Basis> forced_arm = std::nullopt);

/// Detector-facing output mode for (arm, bit) at time `t`.
ModeId detector_mode(const ReceiverConfig& config, Basis arm, Bit bit, TimeBin t);

/// A receiver instance. Detector burn state persists across calls.
class Receiver {
 public:
  explicit Receiver(ReceiverConfig config, unsigned max_photons = kDefaultMaxPhotons);

  const ReceiverConfig& config() const { return config_; }

  ActiveResponse receive_active(Basis basis, const Incident& incident, Rng& rng);
  PassiveResponse receive_passive(const Incident& incident, std::optional<Basis> forced_arm,
                                  Rng& rng);
  /// Style-independent entry point. `active_basis` is ignored by passive receivers.
  ClickPattern receive(Basis active_basis, const Incident& incident,
                       std::optional<Basis> forced_arm, Rng& rng);

  bool burned() const;

 private:
  ReceiverConfig config_;
  unsigned max_photons_;
  std::vector<Detector> detectors_;
};

/// Every outcome a fresh receiver can produce for `incident`, with its
/// probability. Branches with identical patterns are merged.
std::vector<Weighted<ClickPattern>> response_branches(
    const ReceiverConfig& config, Basis active_basis, const Incident& incident,
    std::optional<Basis> forced_arm = std::nullopt, unsigned max_photons = kDefaultMaxPhotons);

}  // namespace qkdsim
