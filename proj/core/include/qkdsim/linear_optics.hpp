#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qkdsim/macro_pulse.hpp"
#include "qkdsim/pure_state.hpp"

namespace qkdsim {

/// A passive linear-optical element acting on creation operators:
///   a_in[j]^dag  ->  sum_k matrix(k, j) * a_out[k]^dag.
/// Output modes that are not also inputs must be empty in the incoming state.
struct ModeTransform {
  std::vector<ModeId> inputs;
  std::vector<ModeId> outputs;
  Eigen::MatrixXcd matrix;  // outputs.size() x inputs.size()

  /// Adjoint transform (outputs become inputs). Inverts a unitary element.
  ModeTransform inverse() const;
  bool is_unitary(double tol = 1e-12) const;
};

/// Sequential composition helper: apply `first`, then `second`.
std::vector<ModeTransform> then(std::vector<ModeTransform> first,
                                const std::vector<ModeTransform>& second);

PureState apply(const PureState& state, const ModeTransform& t,
                unsigned max_photons = kDefaultMaxPhotons);
PureState apply(const PureState& state, const std::vector<ModeTransform>& chain,
                unsigned max_photons = kDefaultMaxPhotons);
MacroPulse apply(const MacroPulse& pulse, const ModeTransform& t);
MacroPulse apply(const MacroPulse& pulse, const std::vector<ModeTransform>& chain);

/// Two-mode beam splitter with amplitude transmittance sqrt(T). Phase
/// convention: transmitted amplitude real sqrt(T), reflected i*sqrt(1-T), so
///   a^dag -> sqrt(T) c^dag + i sqrt(1-T) d^dag,  b^dag -> i sqrt(1-T) c^dag + sqrt(T) d^dag
/// for in_pair (a, b) and out_pair (c, d).
ModeTransform beam_splitter(std::pair<ModeId, ModeId> in_pair, std::pair<ModeId, ModeId> out_pair,
                            double transmittance);

/// Real rotation of a pulse's (H, V) modes:
///   a_H^dag -> cos(angle) a_H^dag - sin(angle) a_V^dag
///   a_V^dag -> sin(angle) a_H^dag + cos(angle) a_V^dag
/// angle = pi/4 sends |+> to H and |-> to V (up to sign).
ModeTransform polarization_rotation(PulseId pulse, double angle);

PureState apply_beam_splitter(const PureState& state, std::pair<ModeId, ModeId> in_pair,
                              std::pair<ModeId, ModeId> out_pair, double transmittance,
                              unsigned max_photons = kDefaultMaxPhotons);

PureState apply_polarization_rotation(const PureState& state, PulseId pulse, double angle,
                                      unsigned max_photons = kDefaultMaxPhotons);

/// Moves exactly one photon from `from` modes into the matching `to` modes
/// without disturbing polarization: (1/sqrt(n)) sum_p a_to[p]^dag a_from[p].
/// Requires every term to carry the same photon number n >= 1 on `from`.
PureState split_one_photon(const PureState& state, PulseId from, PulseId to);

}  // namespace qkdsim
