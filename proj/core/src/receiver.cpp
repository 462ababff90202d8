#include "qkdsim/receiver.hpp"

#include <algorithm>
#include <numbers>

#include <fmt/format.h>

#include "qkdsim/errors.hpp"

namespace qkdsim {
namespace {

constexpr double kAnalyzerAngle = std::numbers::pi / 4;

struct Port {
  ModeId mode;
  std::size_t detector;
  Basis arm;
};

std::vector<Port> detector_ports(const ReceiverConfig& config) {
  std::vector<Port> ports;
  const std::vector<Basis> arms = config.style == ReceiverStyle::active
                                      ? std::vector<Basis>{Basis::computational}
                                      : std::vector<Basis>{Basis::computational, Basis::hadamard};
  for (TimeBin t : kAllTimeBins) {
    for (Basis arm : arms) {
      for (Bit bit : {Bit{0}, Bit{1}}) {
        ports.push_back({detector_mode(config, arm, bit, t), config.detector_index(arm, bit), arm});
      }
    }
  }
  return ports;
}

/// Light delivered to each detector, after the optics, for one measurement branch.
struct Delivered {
  std::vector<Arrivals> arrivals;
  std::array<double, 2> per_arm{0.0, 0.0};  // indexed by Basis
  double background = 0.0;
};

bool injectable(const ReceiverConfig& config, Path path) {
  if (path == Path::regular) return true;
  return path == Path::blocked && config.style == ReceiverStyle::passive && config.compromised;
}

void check_reachable(const ReceiverConfig& config, const Incident& incident) {
  auto check = [&](ModeId m) {
    if (!injectable(config, m.path)) {
      throw UsageError(fmt::format("mode {} cannot reach this receiver", to_string(m)));
    }
  };
  if (incident.exact()) {
    for (const auto& [occ, amp] : incident.state().terms()) {
      for (const auto& [mode, count] : occ.entries()) check(mode);
    }
  } else {
    for (const auto& [mode, field] : incident.macro().fields()) {
      if (std::norm(field) > 0.0) check(mode);
    }
  }
}

std::vector<Weighted<Delivered>> propagate(const ReceiverConfig& config, Basis active_basis,
                                           const Incident& incident,
                                           std::optional<Basis> forced_arm, unsigned max_photons) {
  check_reachable(config, incident);
  const auto chain = receiver_optics(config, active_basis, forced_arm);
  const auto ports = detector_ports(config);

  auto blank = [&] {
    Delivered d;
    d.arrivals.assign(config.detectors.size(), kNoArrivals);
    d.background = incident.background();
    return d;
  };

  std::vector<Weighted<Delivered>> branches;
  if (incident.exact()) {
    const PureState out = apply(incident.state(), chain, max_photons);
    std::vector<ModeId> measured;
    for (const Port& p : ports) {
      if (out.has_mode(p.mode)) measured.push_back(p.mode);
    }
    if (measured.empty() || out.terms().empty()) {
      branches.push_back({1.0, blank()});
      return branches;
    }
    for (const auto& [occ, prob] : outcome_distribution(out, measured)) {
      Delivered d = blank();
      for (const Port& p : ports) {
        const double n = occ.count(p.mode);
        d.arrivals[p.detector][static_cast<std::size_t>(p.mode.time)] += n;
        d.per_arm[static_cast<std::size_t>(p.arm)] += n;
      }
      branches.push_back({prob, std::move(d)});
    }
  } else {
    const MacroPulse out = apply(incident.macro(), chain);
    Delivered d = blank();
    for (const Port& p : ports) {
      const double n = out.intensity(p.mode);
      d.arrivals[p.detector][static_cast<std::size_t>(p.mode.time)] += n;
      d.per_arm[static_cast<std::size_t>(p.arm)] += n;
    }
    branches.push_back({1.0, std::move(d)});
  }
  return branches;
}

bool clicked(DetectorOutcome o) { return o == DetectorOutcome::click; }

/// Which arm Bob attributes a passive round to. Empty means a fair coin decides.
std::optional<Basis> attributed_arm(const std::array<DetectorOutcome, 4>& o,
                                    const std::array<double, 2>& per_arm) {
  const bool c = clicked(o[0]) || clicked(o[1]);
  const bool h = clicked(o[2]) || clicked(o[3]);
  if (c != h) return c ? Basis::computational : Basis::hadamard;
  if (c && h) return std::nullopt;
  // No click: the arm the light physically took, when unambiguous.
  const bool lit_c = per_arm[0] > 0.0;
  const bool lit_h = per_arm[1] > 0.0;
  if (lit_c != lit_h) return lit_c ? Basis::computational : Basis::hadamard;
  return std::nullopt;
}

template <class Respond>
std::array<DetectorOutcome, 4> respond_all(const Delivered& d, std::size_t count,
                                           Respond&& respond) {
  std::array<DetectorOutcome, 4> out{};
  for (std::size_t i = 0; i < count; ++i) out[i] = respond(i, d.arrivals[i], d.background);
  return out;
}

}  // namespace

std::string_view to_string(ReceiverStyle s) { return s == ReceiverStyle::active ? "active" : "passive"; }

ReceiverConfig ReceiverConfig::active(DetectorModel model, bool basis_leak) {
  ReceiverConfig c;
  c.style = ReceiverStyle::active;
  c.detectors = {model, model};
  c.basis_leak = basis_leak;
  return c;
}

ReceiverConfig ReceiverConfig::passive(DetectorModel computational, DetectorModel hadamard,
                                       bool compromised) {
  ReceiverConfig c;
  c.style = ReceiverStyle::passive;
  c.detectors = {computational, computational, hadamard, hadamard};
  c.compromised = compromised;
  return c;
}

void ReceiverConfig::validate() const {
  const std::size_t expected = style == ReceiverStyle::active ? 2 : 4;
  if (detectors.size() != expected) {
    throw UsageError(fmt::format("{} receiver needs exactly {} detectors, got {}",
                                 to_string(style), expected, detectors.size()));
  }
  for (const DetectorModel& d : detectors) d.validate();
  if (style == ReceiverStyle::active && compromised) {
    throw UsageError("only a passive receiver has a blocked port to compromise");
  }
  if (style == ReceiverStyle::passive && basis_leak) {
    throw UsageError("basis_leak applies to active basis choice only");
  }
}

std::size_t ReceiverConfig::detector_index(Basis arm, Bit bit) const {
  if (style == ReceiverStyle::active) return bit;
  return (arm == Basis::computational ? 0U : 2U) + bit;
}

std::vector<PulseId> ReceiverConfig::input_pulses() const {
  std::vector<PulseId> pulses;
  for (TimeBin t : kAllTimeBins) {
    pulses.push_back({t, Path::regular});
    if (style == ReceiverStyle::passive && compromised) pulses.push_back({t, Path::blocked});
  }
  std::sort(pulses.begin(), pulses.end());
  return pulses;
}

Incident Incident::nothing() {
  return Incident(vacuum(modes_of({{TimeBin::t_half, Path::regular}})));
}

std::string Incident::describe() const {
  if (!exact()) return macro().describe();
  std::string out = "exact{";
  bool first = true;
  for (const auto& [occ, amp] : state().terms()) {
    if (!first) out += " + ";
    first = false;
    std::string ket;
    for (const auto& [mode, count] : occ.entries()) {
      if (!ket.empty()) ket += ",";
      ket += fmt::format("{}:{}", to_string(mode), count);
    }
    out += fmt::format("({:.4f}{:+.4f}i)|{}>", amp.real(), amp.imag(), ket.empty() ? "vac" : ket);
  }
  return out + "}";
}

ClickPattern to_pattern(Basis basis, const ActiveResponse& r) {
  ClickPattern p;
  p.basis = basis;
  p.bit0 = r.bit0;
  p.bit1 = r.bit1;
  p.any_burned = r.bit0 == DetectorOutcome::burned || r.bit1 == DetectorOutcome::burned;
  return p;
}

ClickPattern to_pattern(const PassiveResponse& r) {
  ClickPattern p;
  p.basis = r.arm;
  const std::size_t base = r.arm == Basis::computational ? 0 : 2;
  const std::size_t other = 2 - base;
  p.bit0 = r.outcomes[base];
  p.bit1 = r.outcomes[base + 1];
  p.other_arm_click = clicked(r.outcomes[other]) || clicked(r.outcomes[other + 1]);
  p.any_burned = std::any_of(r.outcomes.begin(), r.outcomes.end(),
                             [](DetectorOutcome o) { return o == DetectorOutcome::burned; });
  return p;
}

std::vector<ModeTransform> receiver_optics(const ReceiverConfig& config, Basis active_basis,
                                           std::optional<Basis> forced_arm) {
  std::vector<ModeTransform> chain;
  if (config.style == ReceiverStyle::active) {
    if (forced_arm) throw UsageError("an active receiver has no entry splitter to steer");
    if (active_basis == Basis::hadamard) {
      for (TimeBin t : kAllTimeBins) {
        chain.push_back(polarization_rotation({t, Path::regular}, kAnalyzerAngle));
      }
    }
    return chain;
  }

  if (forced_arm) {
    if (!config.compromised) {
      throw UsageError("forced-arm directive needs a compromised receiver (open blocked port)");
    }
    // Feed the regular port's light into both ports with the relative phase
    // that interferes constructively on the chosen output arm.
    const std::complex<double> phase =
        *forced_arm == Basis::computational ? std::complex<double>{0.0, -1.0}
                                            : std::complex<double>{0.0, 1.0};
    for (TimeBin t : kAllTimeBins) {
      for (Polarization p : kPolarizations) {
        Eigen::MatrixXcd m(2, 1);
        m << (1.0 / std::numbers::sqrt2), phase * (1.0 / std::numbers::sqrt2);
        chain.push_back({{ModeId{t, Path::regular, p}},
                         {ModeId{t, Path::regular, p}, ModeId{t, Path::blocked, p}},
                         m});
      }
    }
  }
  for (TimeBin t : kAllTimeBins) {
    for (Polarization p : kPolarizations) {
      chain.push_back(beam_splitter({{t, Path::regular, p}, {t, Path::blocked, p}},
                                    {{t, Path::computational_arm, p}, {t, Path::hadamard_arm, p}},
                                    0.5));
    }
  }
  for (TimeBin t : kAllTimeBins) {
    chain.push_back(polarization_rotation({t, Path::hadamard_arm}, kAnalyzerAngle));
  }
  return chain;
}

ModeId detector_mode(const ReceiverConfig& config, Basis arm, Bit bit, TimeBin t) {
  const Polarization pol = bit == 0 ? Polarization::H : Polarization::V;
  if (config.style == ReceiverStyle::active) return {t, Path::regular, pol};
  return {t, arm == Basis::computational ? Path::computational_arm : Path::hadamard_arm, pol};
}

Receiver::Receiver(ReceiverConfig config, unsigned max_photons)
    : config_(std::move(config)), max_photons_(max_photons) {
  config_.validate();
  for (const DetectorModel& m : config_.detectors) detectors_.emplace_back(m);
}

bool Receiver::burned() const {
  return std::any_of(detectors_.begin(), detectors_.end(),
                     [](const Detector& d) { return d.burned(); });
}

namespace {

template <class T>
const T& sample_branch(const std::vector<Weighted<T>>& branches, Rng& rng) {
  if (branches.size() == 1) return branches.front().value;
  const double u = rng.uniform();
  double acc = 0.0;
  for (const auto& b : branches) {
    acc += b.probability;
    if (u < acc) return b.value;
  }
  return branches.back().value;
}

}  // namespace

ActiveResponse Receiver::receive_active(Basis basis, const Incident& incident, Rng& rng) {
  if (config_.style != ReceiverStyle::active) throw UsageError("receiver is not active");
  const auto branches = propagate(config_, basis, incident, std::nullopt, max_photons_);
  const Delivered& d = sample_branch(branches, rng);
  const auto o = respond_all(d, 2, [&](std::size_t i, const Arrivals& a, double bg) {
    return detectors_[i].respond(a, bg);
  });
  return {o[0], o[1]};
}

PassiveResponse Receiver::receive_passive(const Incident& incident,
                                          std::optional<Basis> forced_arm, Rng& rng) {
  if (config_.style != ReceiverStyle::passive) throw UsageError("receiver is not passive");
  const auto branches =
      propagate(config_, Basis::computational, incident, forced_arm, max_photons_);
  const Delivered& d = sample_branch(branches, rng);
  PassiveResponse r;
  r.outcomes = respond_all(d, 4, [&](std::size_t i, const Arrivals& a, double bg) {
    return detectors_[i].respond(a, bg);
  });
  const auto arm = attributed_arm(r.outcomes, d.per_arm);
  r.arm = arm ? *arm : (rng.bit() == 0 ? Basis::computational : Basis::hadamard);
  return r;
}

ClickPattern Receiver::receive(Basis active_basis, const Incident& incident,
                               std::optional<Basis> forced_arm, Rng& rng) {
  if (config_.style == ReceiverStyle::active) {
    if (forced_arm) throw UsageError("an active receiver has no entry splitter to steer");
    return to_pattern(active_basis, receive_active(active_basis, incident, rng));
  }
  return to_pattern(receive_passive(incident, forced_arm, rng));
}

std::vector<Weighted<ClickPattern>> response_branches(const ReceiverConfig& config,
                                                      Basis active_basis,
                                                      const Incident& incident,
                                                      std::optional<Basis> forced_arm,
                                                      unsigned max_photons) {
  config.validate();
  std::vector<Weighted<ClickPattern>> merged;
  auto add = [&](double p, const ClickPattern& pattern) {
    if (p <= 0.0) return;
    for (auto& w : merged) {
      if (w.value == pattern) {
        w.probability += p;
        return;
      }
    }
    merged.push_back({p, pattern});
  };

  for (const auto& [prob, d] :
       propagate(config, active_basis, incident, forced_arm, max_photons)) {
    const auto o = respond_all(d, config.detectors.size(),
                               [&](std::size_t i, const Arrivals& a, double bg) {
                                 return detector_respond(config.detectors[i], a, bg);
                               });
    if (config.style == ReceiverStyle::active) {
      add(prob, to_pattern(active_basis, ActiveResponse{o[0], o[1]}));
      continue;
    }
    PassiveResponse r;
    r.outcomes = o;
    if (const auto arm = attributed_arm(o, d.per_arm)) {
      r.arm = *arm;
      add(prob, to_pattern(r));
    } else {
      for (Basis arm_choice : kBases) {
        r.arm = arm_choice;
        add(prob / 2, to_pattern(r));
      }
    }
  }
  return merged;
}

}  // namespace qkdsim
