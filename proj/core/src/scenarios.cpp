#include "qkdsim/scenarios.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace qkdsim {
namespace {

// Exact targets still need a floor for floating-point noise.
constexpr double kExact = 1e-12;

DetectorModel gated(TimeBin open, TimeBin close) {
  DetectorModel m;
  m.gate_open = open;
  m.gate_close = close;
  return m;
}

std::vector<ReceiverPreset> build_receivers() {
  DetectorModel unblindable;
  unblindable.n1 = 999'999;
  unblindable.linear_threshold = 1'000'000;
  unblindable.n2 = 1'000'000;

  return {
      {"ideal", "active receiver whose detectors burn before they can be blinded",
       ReceiverConfig::active(unblindable)},
      {"blindable", "active receiver with blindable detectors", ReceiverConfig::active()},
      {"leaky", "active receiver that sets its basis before gating its detectors",
       ReceiverConfig::active({}, true)},
      {"passive", "passive basis choice, blocked port intact", ReceiverConfig::passive()},
      {"gated", "passive receiver with mismatched detector gates",
       ReceiverConfig::passive(gated(TimeBin::t0, TimeBin::t_half),
                               gated(TimeBin::t_half, TimeBin::t1))},
      {"compromised", "passive receiver with the blocked port opened",
       ReceiverConfig::passive({}, {}, true)},
  };
}

RunConfig with(std::string name, std::string_view receiver, AttackSpec attack) {
  RunConfig c;
  c.scenario = std::move(name);
  c.receiver = find_receiver_preset(receiver)->config;
  c.attack = attack;
  return c;
}

std::vector<Scenario> build_scenarios() {
  std::vector<Scenario> out;

  out.push_back({"baseline", "no eavesdropper",
                 with("baseline", "blindable", attack::None{}),
                 {Expected{0.0, kExact}, Expected{0.0, kExact}, Expected{0.5, 0.01}, false}});

  out.push_back({"intercept_resend", "textbook measure-resend control",
                 with("intercept_resend", "blindable", attack::InterceptResend{}),
                 {Expected{0.25, 0.01}, Expected{0.0, kExact}, Expected{0.75, 0.01}, true}});

  out.push_back({"bright_illumination", "blinding background plus bright resend pulses",
                 with("bright_illumination", "blindable", attack::BrightIllumination{}),
                 {Expected{0.0, kExact}, Expected{0.5, 0.01}, Expected{1.0, kExact}, false}});

  {
    RunConfig c = with("bright_illumination_matched", "blindable",
                       attack::BrightIllumination{1100, 100, true});
    c.channel_loss = 0.8;
    out.push_back({"bright_illumination_matched",
                   "bright illumination shaped to the loss of an 80% lossy line", c,
                   {Expected{0.0, kExact}, Expected{0.8, 0.01}, Expected{1.0, kExact}, false}});
  }

  {
    RunConfig c = with("trojan_pony_error", "blindable", attack::TrojanPony{20});
    c.invalid_policy = InvalidPolicy::as_error;
    out.push_back({"trojan_pony_error", "20-photon resend, invalid rounds count as errors", c,
                   {Expected{0.5, 0.02}, std::nullopt, std::nullopt, true}});
  }
  {
    RunConfig c = with("trojan_pony_loss", "blindable", attack::TrojanPony{20});
    c.invalid_policy = InvalidPolicy::as_loss;
    out.push_back({"trojan_pony_loss", "20-photon resend, invalid rounds count as losses", c,
                   {Expected{0.0, kExact}, std::nullopt, Expected{1.0, kExact}, false}});
  }

  out.push_back({"faked_states", "time-shifted resend against mismatched gates",
                 with("faked_states", "gated", attack::FakedStatesTiming{}),
                 {Expected{0.0, kExact}, Expected{0.5, 0.01}, Expected{1.0, kExact}, false}});

  out.push_back({"fixed_apparatus", "steering the basis choice through the opened port",
                 with("fixed_apparatus", "compromised", attack::FixedApparatus{}),
                 {Expected{0.0, kExact}, Expected{0.0, kExact}, Expected{1.0, kExact}, false}});

  out.push_back({"basis_probe", "reading the basis before the gate opens",
                 with("basis_probe", "leaky", attack::BasisProbe{}),
                 {Expected{0.0, kExact}, Expected{0.0, kExact}, Expected{1.0, kExact}, false}});

  {
    RunConfig c = with("pns", "blindable", attack::PhotonNumberSplitting{});
    c.source.multi_photon_prob = 0.1;
    out.push_back({"pns", "photon-number splitting on a source with 10% two-photon pulses", c,
                   {Expected{0.0, kExact}, Expected{0.0, kExact},
                    Expected{0.1 + 0.9 * 0.5, 0.02}, false}});
  }
  return out;
}

template <class T>
const T* find_named(const std::vector<T>& items, std::string_view name) {
  const auto it =
      std::find_if(items.begin(), items.end(), [&](const T& s) { return s.name == name; });
  return it == items.end() ? nullptr : &*it;
}

}  // namespace

bool Expected::matches(double observed) const {
  return std::abs(observed - value) <= tolerance;
}

const std::vector<ReceiverPreset>& receiver_presets() {
  static const std::vector<ReceiverPreset> presets = build_receivers();
  return presets;
}

const ReceiverPreset* find_receiver_preset(std::string_view name) {
  return find_named(receiver_presets(), name);
}

const std::vector<Scenario>& scenarios() {
  static const std::vector<Scenario> presets = build_scenarios();
  return presets;
}

const Scenario* find_scenario(std::string_view name) { return find_named(scenarios(), name); }

SignatureCheck check_signature(const ExpectedSignature& expected, const RunReport& report) {
  SignatureCheck check;
  auto expect = [&](const char* field, const std::optional<Expected>& e,
                    std::optional<double> observed) {
    if (!e) return;
    if (!observed) {
      check.failures.push_back(fmt::format("{}: undefined, expected {}", field, e->value));
    } else if (!e->matches(*observed)) {
      check.failures.push_back(fmt::format("{}: {:.6f}, expected {} +/- {}", field, *observed,
                                           e->value, e->tolerance));
    }
  };
  expect("qber", expected.qber, report.qber);
  expect("loss_rate", expected.loss_rate, report.loss_rate);
  expect("eve_info", expected.eve_info, report.eve_info);
  if (expected.aborted && *expected.aborted != report.aborted) {
    check.failures.push_back(
        fmt::format("aborted: {}, expected {}", report.aborted, *expected.aborted));
  }
  check.passed = check.failures.empty();
  return check;
}

}  // namespace qkdsim
