#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include "qkdsim/mode.hpp"

namespace qkdsim {

enum class DetectorOutcome : std::uint8_t { no_click, click, burned };

std::string_view to_string(DetectorOutcome o);

/// Photons arriving at one detector in each time bin.
using Arrivals = std::array<double, kTimeBinCount>;

inline constexpr Arrivals kNoArrivals{0.0, 0.0, 0.0};

/// Threshold detector with a sensitive time window and three regimes:
///   background < n1              Geiger mode: clicks on any photon in the gate
///   n1 <= background, G < n2     blinded: clicks only on a pulse >= linear_threshold
///   G >= n2                      burned, permanently
/// where G is everything arriving in the gate plus the background. All
/// thresholds are photons per gate.
struct DetectorModel {
  TimeBin gate_open = TimeBin::t_half;
  TimeBin gate_close = TimeBin::t_half;
  std::int64_t n1 = 50;
  std::int64_t linear_threshold = 1000;
  std::int64_t n2 = 1'000'000;

  /// Throws UsageError unless n1 < linear_threshold <= n2 and the gate is ordered.
  void validate() const;
  bool in_gate(TimeBin t) const { return gate_open <= t && t <= gate_close; }

  friend bool operator==(const DetectorModel&, const DetectorModel&) = default;
};

/// Stateless response of a fresh detector.
DetectorOutcome detector_respond(const DetectorModel& model, const Arrivals& arrivals,
                                 double background);

/// A physical detector instance: remembers being burned.
class Detector {
 public:
  explicit Detector(DetectorModel model);

  DetectorOutcome respond(const Arrivals& arrivals, double background);
  bool burned() const { return burned_; }
  const DetectorModel& model() const { return model_; }

 private:
  DetectorModel model_;
  bool burned_ = false;
};

}  // namespace qkdsim
