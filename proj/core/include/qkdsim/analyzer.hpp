#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qkdsim/attacks.hpp"
#include "qkdsim/detector.hpp"
#include "qkdsim/protocol.hpp"
#include "qkdsim/receiver.hpp"

namespace qkdsim {

// ---------------------------------------------------------------------------
// Black-box threshold discovery
// ---------------------------------------------------------------------------

/// A detector whose internals are unknown: all we can do is shine a
/// continuous background on it, fire one pulse into its gate, and look at the
/// result. Probing may destroy it.
class BlackBoxDetector {
 public:
  virtual ~BlackBoxDetector() = default;
  virtual DetectorOutcome probe(double background, double pulse) = 0;
};

/// Hands out fresh, identical detectors.
using DetectorFactory = std::function<std::unique_ptr<BlackBoxDetector>()>;

DetectorFactory model_detector_factory(DetectorModel model);

/// Half-open integer interval: low < value <= high.
struct Bracket {
  std::int64_t low = 0;
  std::int64_t high = 0;
  bool contains(std::int64_t v) const { return low < v && v <= high; }
};

struct ThresholdEstimate {
  Bracket n1;  // blinding onset, background photons per gate
  Bracket n2;  // damage, photons per gate
  std::size_t probe_count = 0;
  /// Detectors spent escalating pulse energy toward damage.
  std::size_t sacrificial_probes = 0;
};

class ThresholdNotFound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Doubling-then-bisection on the background level finds the blinding onset
/// (a Geiger detector clicks on a one-photon probe, a blinded one stays
/// silent). Doubling pulse energies on sacrificial detectors then brackets the
/// damage threshold within a factor of two.
ThresholdEstimate probe_thresholds(const DetectorFactory& make_detector, std::int64_t k_max);

// ---------------------------------------------------------------------------
// Space of the protocol
// ---------------------------------------------------------------------------

struct CandidateIncident {
  Incident incident;
  std::string label;
  /// Rank in enumeration order.
  std::size_t index = 0;

  double background() const { return incident.background(); }
};

struct EnumerationBounds {
  std::vector<ModeId> modes;
  unsigned max_photons = kDefaultMaxPhotons;
  std::vector<double> intensities;
  std::vector<double> backgrounds;
  std::size_t candidate_cap = 100'000;
};

/// Candidates for one receiver: every mode its input ports expose.
EnumerationBounds bounds_for(const ReceiverConfig& receiver, unsigned max_photons,
                             std::vector<double> intensities = {},
                             std::vector<double> backgrounds = {});

/// Intensity and background grids derived from measured thresholds: powers of
/// two above `max_photons` and safely below the damage bracket, and
/// backgrounds {0, just past blinding, twice that}.
EnumerationBounds bounds_for(const ReceiverConfig& receiver, unsigned max_photons,
                             const ThresholdEstimate& thresholds);

std::size_t count_candidates(const EnumerationBounds& bounds);

/// Exact candidates first (occupation basis states by photon number, then
/// |+>, |-> on each pulse), then macro pulses over intensity x polarization
/// {H, V, +45, -45} x pulse x background. Throws UsageError past the cap.
std::vector<CandidateIncident> enumerate_protocol_space(const EnumerationBounds& bounds);

// ---------------------------------------------------------------------------
// Response classification
// ---------------------------------------------------------------------------

enum class ResponseClass : std::uint8_t { valid0, valid1, loss, invalid, burned };
inline constexpr std::size_t kResponseClassCount = 5;

std::string_view to_string(ResponseClass c);

struct ResponseDistribution {
  std::array<double, kResponseClassCount> probability{};
  /// Zero for exact classification.
  std::array<double, kResponseClassCount> std_error{};

  double operator[](ResponseClass c) const { return probability[static_cast<std::size_t>(c)]; }
  double valid() const { return (*this)[ResponseClass::valid0] + (*this)[ResponseClass::valid1]; }
};

/// Outcome distribution in each of Bob's bases. For a passive receiver the
/// distribution is conditioned on the arm Bob attributes the round to, and
/// `basis_weight` holds how often each arm occurs (0.5/0.5 when active).
struct ResponseProfile {
  std::array<ResponseDistribution, 2> per_basis;
  std::array<double, 2> basis_weight{0.5, 0.5};

  const ResponseDistribution& in(Basis b) const { return per_basis[static_cast<std::size_t>(b)]; }
};

struct ClassifyOptions {
  bool exact = true;
  std::size_t trials = 10'000;
  std::uint64_t seed = 1;
  unsigned max_photons = kDefaultMaxPhotons;
};

ResponseProfile classify_response(const ReceiverConfig& receiver,
                                  const CandidateIncident& candidate,
                                  const ClassifyOptions& options = {});

// ---------------------------------------------------------------------------
// Attack synthesis
// ---------------------------------------------------------------------------

struct RecipeEntry {
  Basis eve_basis = Basis::computational;
  Bit eve_bit = 0;
  CandidateIncident candidate;
  ResponseProfile profile;
};

struct AttackRecipe {
  /// Ordered (computational,0), (computational,1), (hadamard,0), (hadamard,1).
  std::vector<RecipeEntry> entries;
  double background = 0.0;
  /// Fraction of rounds Bob loses when Eve's basis is uniformly random.
  double loss_rate = 0.0;

  const RecipeEntry& at(Basis b, Bit bit) const;
  ResendTable resend_table() const;
};

struct SynthesisOptions {
  /// Defaults to 0 for exact classification, 1e-3 for Monte Carlo.
  std::optional<double> epsilon;
  InvalidPolicy policy = InvalidPolicy::as_error;
  ClassifyOptions classify;
};

/// First recipe (in enumeration order, backgrounds in order of appearance)
/// whose every entry makes Bob report Eve's bit when his basis matches hers,
/// and nothing but losses when it does not, with no burns and no errors.
std::optional<AttackRecipe> synthesize_faked_states(const ReceiverConfig& receiver,
                                                    std::span<const CandidateIncident> candidates,
                                                    const SynthesisOptions& options = {});

/// True when `profile` satisfies the synthesis acceptance test for (basis, bit).
bool accepts(const ResponseProfile& profile, Basis eve_basis, Bit eve_bit, double epsilon,
             InvalidPolicy policy);

// ---------------------------------------------------------------------------
// Reversal
// ---------------------------------------------------------------------------

struct DesiredClick {
  Basis basis = Basis::computational;
  Bit bit = 0;
  TimeBin time = TimeBin::t_half;
};

/// The state that Bob's optics map onto a single photon at the detector for
/// `desired`: U_B^dagger applied to that occupation state. Empty when the
/// detector is gated off at that time or the preimage needs an input port an
/// outsider cannot reach.
std::optional<PureState> reverse_bob_unitary(const ReceiverConfig& receiver,
                                             const DesiredClick& desired,
                                             unsigned max_photons = kDefaultMaxPhotons);

// ---------------------------------------------------------------------------
// End-to-end analysis
// ---------------------------------------------------------------------------

struct AnalysisOptions {
  unsigned max_photons = kDefaultMaxPhotons;
  std::int64_t k_max = 2'000'000;
  bool probe = true;
  /// Rounds for replaying a synthesized recipe through the protocol; 0 skips.
  std::uint64_t verify_rounds = 20'000;
  std::uint64_t seed = 1;
  InvalidPolicy policy = InvalidPolicy::as_error;
};

struct Preimage {
  DesiredClick desired;
  std::optional<PureState> state;
};

struct AnalysisReport {
  std::string receiver_name;
  std::optional<ThresholdEstimate> thresholds;
  std::size_t candidate_count = 0;
  std::optional<AttackRecipe> recipe;
  std::vector<Preimage> preimages;
  std::optional<RunReport> verification;
};

AnalysisReport analyze_receiver(const std::string& name, const ReceiverConfig& receiver,
                                const AnalysisOptions& options = {});

/// Replays a recipe as a measure-resend attack through a full protocol run.
RunReport verify_recipe(const ReceiverConfig& receiver, const AttackRecipe& recipe,
                        std::uint64_t rounds, std::uint64_t seed,
                        InvalidPolicy policy = InvalidPolicy::as_error);

}  // namespace qkdsim
