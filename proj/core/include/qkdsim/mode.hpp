#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qkdsim {

/// Photon arrival slots. Alice emits at t_half; t0 < t_half < t1.
enum class TimeBin : std::uint8_t { t0, t_half, t1 };
inline constexpr std::size_t kTimeBinCount = 3;
inline constexpr std::array<TimeBin, kTimeBinCount> kAllTimeBins{TimeBin::t0, TimeBin::t_half,
                                                                 TimeBin::t1};

/// Spatial path of a pulse. `regular` and `blocked` are the two input ports of
/// a passive receiver's entry beam splitter; the arm paths are its outputs.
/// `memory` is the eavesdropper's private storage.
enum class Path : std::uint8_t { regular, blocked, computational_arm, hadamard_arm, memory };

enum class Polarization : std::uint8_t { H, V };
inline constexpr std::array<Polarization, 2> kPolarizations{Polarization::H, Polarization::V};

enum class Basis : std::uint8_t { computational, hadamard };
inline constexpr std::array<Basis, 2> kBases{Basis::computational, Basis::hadamard};

using Bit = std::uint8_t;

inline Basis other(Basis b) {
  return b == Basis::computational ? Basis::hadamard : Basis::computational;
}

/// One photonic mode. The defaulted ordering (time bin, path, polarization) is
/// the canonical order used everywhere a mode set is serialized.
struct ModeId {
  TimeBin time = TimeBin::t_half;
  Path path = Path::regular;
  Polarization pol = Polarization::H;

  friend auto operator<=>(const ModeId&, const ModeId&) = default;
};

/// A pulse is a (time bin, path) pair carrying two polarization modes.
struct PulseId {
  TimeBin time = TimeBin::t_half;
  Path path = Path::regular;

  ModeId mode(Polarization p) const { return {time, path, p}; }
  friend auto operator<=>(const PulseId&, const PulseId&) = default;
};

std::string_view to_string(TimeBin t);
std::string_view to_string(Path p);
std::string_view to_string(Polarization p);
std::string_view to_string(Basis b);
std::string to_string(ModeId m);
std::string to_string(PulseId p);

std::optional<TimeBin> parse_time_bin(std::string_view s);
std::optional<Basis> parse_basis(std::string_view s);

/// All modes of the given pulses, sorted and deduplicated.
std::vector<ModeId> modes_of(const std::vector<PulseId>& pulses);

}  // namespace qkdsim
