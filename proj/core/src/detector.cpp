#include "qkdsim/detector.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "qkdsim/errors.hpp"

namespace qkdsim {

std::string_view to_string(DetectorOutcome o) {
  switch (o) {
    case DetectorOutcome::no_click:
      return "no_click";
    case DetectorOutcome::click:
      return "click";
    case DetectorOutcome::burned:
      return "burned";
  }
  return "?";
}

void DetectorModel::validate() const {
  if (n1 <= 0 || linear_threshold <= 0 || n2 <= 0) {
    throw UsageError("detector thresholds must be positive");
  }
  if (!(n1 < linear_threshold)) {
    throw UsageError(fmt::format("detector needs n1 < linear_threshold (got {} and {})", n1,
                                 linear_threshold));
  }
  if (!(linear_threshold <= n2)) {
    throw UsageError(fmt::format("detector needs linear_threshold <= n2 (got {} and {})",
                                 linear_threshold, n2));
  }
  if (gate_close < gate_open) {
    throw UsageError(fmt::format("detector gate closes ({}) before it opens ({})",
                                 to_string(gate_close), to_string(gate_open)));
  }
}

DetectorOutcome detector_respond(const DetectorModel& model, const Arrivals& arrivals,
                                 double background) {
  double gated = background;
  double largest_pulse = 0.0;
  for (TimeBin t : kAllTimeBins) {
    if (!model.in_gate(t)) continue;
    const double n = arrivals[static_cast<std::size_t>(t)];
    gated += n;
    largest_pulse = std::max(largest_pulse, n);
  }
  if (gated >= static_cast<double>(model.n2)) return DetectorOutcome::burned;
  if (background >= static_cast<double>(model.n1)) {
    return largest_pulse >= static_cast<double>(model.linear_threshold) ? DetectorOutcome::click
                                                                        : DetectorOutcome::no_click;
  }
  return gated >= 1.0 ? DetectorOutcome::click : DetectorOutcome::no_click;
}

Detector::Detector(DetectorModel model) : model_(model) { model_.validate(); }

DetectorOutcome Detector::respond(const Arrivals& arrivals, double background) {
  if (burned_) return DetectorOutcome::burned;
  const DetectorOutcome o = detector_respond(model_, arrivals, background);
  if (o == DetectorOutcome::burned) burned_ = true;
  return o;
}

}  // namespace qkdsim
