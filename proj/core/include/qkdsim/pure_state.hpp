#pragma once

#include <complex>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qkdsim/mode.hpp"
#include "qkdsim/rng.hpp"

namespace qkdsim {

/// Default photon-number bound of the exact regime.
inline constexpr unsigned kDefaultMaxPhotons = 4;

/// Photon counts per mode. Only non-zero counts are stored, sorted by mode, so
/// an absent mode means zero photons.
class OccupationVector {
 public:
  using Entry = std::pair<ModeId, unsigned>;

  OccupationVector() = default;
  OccupationVector(std::initializer_list<Entry> entries);

  unsigned count(ModeId mode) const;
  void set(ModeId mode, unsigned count);
  void add(ModeId mode, unsigned count) { set(mode, this->count(mode) + count); }
  unsigned total() const;
  bool empty() const { return entries_.empty(); }

  /// Counts restricted to `modes` (which must be sorted).
  OccupationVector restricted_to(std::span<const ModeId> modes) const;
  /// Counts on modes not in `modes` (which must be sorted).
  OccupationVector without(std::span<const ModeId> modes) const;

  const std::vector<Entry>& entries() const { return entries_; }

  friend auto operator<=>(const OccupationVector&, const OccupationVector&) = default;
  friend bool operator==(const OccupationVector&, const OccupationVector&) = default;

 private:
  std::vector<Entry> entries_;
};

/// Sparse superposition over occupation basis vectors of a declared mode set.
///
/// Values are immutable once built; every operation returns a new state.
/// Amplitudes with magnitude at or below kAmplitudeFloor are pruned on
/// construction.
class PureState {
 public:
  using Amplitude = std::complex<double>;
  using Terms = std::map<OccupationVector, Amplitude>;
  static constexpr double kAmplitudeFloor = 1e-12;

  /// Builds a state over `modes` (any order; stored sorted). Throws UsageError
  /// if a term populates a mode outside the set or the set has duplicates.
  PureState(std::vector<ModeId> modes, Terms terms);

  const std::vector<ModeId>& modes() const { return modes_; }
  const Terms& terms() const { return terms_; }
  bool has_mode(ModeId mode) const;

  Amplitude amplitude(const OccupationVector& occ) const;
  double norm() const;
  PureState normalized() const;
  /// Largest total photon number over all terms.
  unsigned max_photons() const;
  /// True when every term holds zero photons.
  bool is_vacuum() const;

  PureState scaled(Amplitude factor) const;
  /// Same amplitudes over a larger mode set (new modes are vacuum).
  PureState with_modes(std::span<const ModeId> extra) const;

  /// One line per term, sorted: "t_half.r.H:1 t_half.r.V:0 -> (re,im)".
  std::string debug_string() const;

 private:
  std::vector<ModeId> modes_;
  Terms terms_;
};

/// <a|b>, conjugate-linear in `a`. Mode sets need not match.
PureState::Amplitude inner_product(const PureState& a, const PureState& b);

/// Largest amplitude-wise difference after removing a global phase.
double distance_up_to_phase(const PureState& a, const PureState& b);

PureState vacuum(std::span<const ModeId> modes);

/// Single photon at (time, path): |0,1> (H) for computational 0, |1,0> (V) for
/// computational 1, (|0,1> +/- |1,0>)/sqrt(2) for hadamard 0/1.
PureState encode_qubit(Basis basis, Bit bit, TimeBin time, Path path);

/// `photons` identical photons in the polarization encoding (basis, bit).
/// Throws RegimeError past `max_photons`.
PureState encode_pulse(Basis basis, Bit bit, unsigned photons, TimeBin time, Path path,
                       unsigned max_photons = kDefaultMaxPhotons);

/// Product state over the union of the two (disjoint) mode sets.
PureState tensor(const PureState& a, const PureState& b);

/// Born-rule distribution of the photon counts on `modes`.
std::map<OccupationVector, double> outcome_distribution(const PureState& state,
                                                        std::span<const ModeId> modes);

struct Measurement {
  OccupationVector outcome;
  PureState posterior;
};

/// Projective photon-number measurement of `modes`, sampled with `rng`.
Measurement measure_occupation(const PureState& state, std::span<const ModeId> modes, Rng& rng);

/// Splits a product state into its factor over `modes` and the remainder.
/// Throws UsageError when the state is entangled across the cut.
std::pair<PureState, PureState> factor_product(const PureState& state,
                                               std::span<const ModeId> modes);

}  // namespace qkdsim
