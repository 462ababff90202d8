#include "qkdsim/attacks.hpp"

#include <algorithm>
#include <numbers>
#include <set>

#include <fmt/format.h>

#include "qkdsim/errors.hpp"
#include "qkdsim/protocol.hpp"

namespace qkdsim {
namespace {

Basis random_basis(Rng& rng) { return rng.bit() == 0 ? Basis::computational : Basis::hadamard; }

/// Light with nothing in it except, possibly, a blinding background.
Incident dark(double background) {
  if (background <= 0.0) return Incident::nothing();
  return Incident(MacroPulse({}, background));
}

class NoAttack final : public AttackStrategy {
 public:
  std::string_view name() const override { return "none"; }
  Delivery intercept(const PureState& in_flight, const RoundContext&, Rng& rng) override {
    // With no access to the channel Eve can only guess.
    return {Incident(in_flight), Bit{rng.bit()}, std::nullopt, std::nullopt};
  }
};

/// Plain measure-resend with single photons through an ideal detector pair.
class InterceptResend final : public AttackStrategy {
 public:
  std::string_view name() const override { return "intercept_resend"; }
  Delivery intercept(const PureState& in_flight, const RoundContext&, Rng& rng) override {
    const Basis basis = random_basis(rng);
    const auto bit = measure_ideal(in_flight, basis, rng);
    if (!bit) return {Incident::nothing(), Bit{rng.bit()}, std::nullopt, std::nullopt};
    return {Incident(encode_qubit(basis, *bit, kAlicePulse.time, kAlicePulse.path)), *bit,
            std::nullopt, EveRecord{basis, *bit}};
  }
};

class TrojanPony final : public AttackStrategy {
 public:
  explicit TrojanPony(attack::TrojanPony params) : params_(params) {}
  std::string_view name() const override { return "trojan_pony"; }

  void bind(const AttackSetup& setup) override {
    if (setup.receiver.style != ReceiverStyle::active) {
      throw AttackRefused("trojan_pony targets an active basis-choice receiver");
    }
    if (params_.photons < 2) throw AttackRefused("trojan_pony needs photons >= 2");
    max_photons_ = setup.max_photons;
  }

  Delivery intercept(const PureState& in_flight, const RoundContext&, Rng& rng) override {
    const Basis basis = random_basis(rng);
    const auto bit = measure_ideal(in_flight, basis, rng);
    if (!bit) return {Incident::nothing(), Bit{rng.bit()}, std::nullopt, std::nullopt};
    if (params_.photons <= max_photons_) {
      return {Incident(encode_pulse(basis, *bit, params_.photons, kAlicePulse.time,
                                    kAlicePulse.path, max_photons_)),
              *bit, std::nullopt, EveRecord{basis, *bit}};
    }
    return {Incident(MacroPulse::polarized(basis, *bit, params_.photons, kAlicePulse)), *bit,
            std::nullopt, EveRecord{basis, *bit}};
  }

 private:
  attack::TrojanPony params_;
  unsigned max_photons_ = kDefaultMaxPhotons;
};

/// Resends computational results early (t0) and Hadamard results late (t1),
/// where only the matching arm's detectors are gated on.
class FakedStatesTiming final : public AttackStrategy {
 public:
  std::string_view name() const override { return "faked_states"; }

  void bind(const AttackSetup& setup) override {
    const ReceiverConfig& r = setup.receiver;
    if (r.style != ReceiverStyle::passive) {
      throw AttackRefused("faked_states targets a passive receiver with shifted detector gates");
    }
    for (Bit b : {Bit{0}, Bit{1}}) {
      const DetectorModel& c = r.detector(Basis::computational, b);
      const DetectorModel& h = r.detector(Basis::hadamard, b);
      if (!c.in_gate(TimeBin::t0) || h.in_gate(TimeBin::t0) || !h.in_gate(TimeBin::t1) ||
          c.in_gate(TimeBin::t1)) {
        throw AttackRefused(
            "faked_states needs computational detectors gated [t0, t_half] and hadamard "
            "detectors gated [t_half, t1]");
      }
    }
  }

  Delivery intercept(const PureState& in_flight, const RoundContext&, Rng& rng) override {
    const Basis basis = random_basis(rng);
    const auto bit = measure_ideal(in_flight, basis, rng);
    if (!bit) return {Incident::nothing(), Bit{rng.bit()}, std::nullopt, std::nullopt};
    const TimeBin when = basis == Basis::computational ? TimeBin::t0 : TimeBin::t1;
    return {Incident(encode_qubit(basis, *bit, when, Path::regular)), *bit, std::nullopt,
            EveRecord{basis, *bit}};
  }
};

class FixedApparatus final : public AttackStrategy {
 public:
  std::string_view name() const override { return "fixed_apparatus"; }

  void bind(const AttackSetup& setup) override {
    if (setup.receiver.style != ReceiverStyle::passive) {
      throw AttackRefused("fixed_apparatus targets a passive basis-choice receiver");
    }
    if (!setup.receiver.compromised) {
      throw AttackRefused(
          "fixed_apparatus requires a compromised receiver (blocked port opened beforehand)");
    }
  }

  Delivery intercept(const PureState& in_flight, const RoundContext&, Rng& rng) override {
    const Basis basis = random_basis(rng);
    const auto bit = measure_ideal(in_flight, basis, rng);
    if (!bit) return {Incident::nothing(), Bit{rng.bit()}, std::nullopt, std::nullopt};
    return {Incident(encode_qubit(basis, *bit, kAlicePulse.time, kAlicePulse.path)), *bit, basis,
            EveRecord{basis, *bit}};
  }
};

class BrightIllumination final : public AttackStrategy {
 public:
  explicit BrightIllumination(attack::BrightIllumination params) : params_(params) {}
  std::string_view name() const override { return "bright_illumination"; }
  bool intercepts_at_source() const override { return params_.match_channel_loss; }

  void bind(const AttackSetup& setup) override {
    if (setup.receiver.style != ReceiverStyle::active) {
      throw AttackRefused("bright_illumination is configured for an active receiver");
    }
    const double k = params_.pulse_photons;
    const double bg = params_.background;
    for (const DetectorModel& d : setup.receiver.detectors) {
      const auto n1 = static_cast<double>(d.n1);
      const auto l = static_cast<double>(d.linear_threshold);
      const auto n2 = static_cast<double>(d.n2);
      if (!(bg >= n1)) {
        throw AttackRefused(fmt::format("violated background >= N1 ({} < {})", bg, n1));
      }
      if (!(n1 < k)) throw AttackRefused(fmt::format("violated N1 < pulse ({} >= {})", n1, k));
      if (!(k >= l)) throw AttackRefused(fmt::format("violated pulse >= L ({} < {})", k, l));
      if (!(k / 2 < l)) {
        throw AttackRefused(fmt::format("violated pulse/2 < L ({} >= {})", k / 2, l));
      }
      if (!(k + bg < n2)) {
        throw AttackRefused(fmt::format("violated pulse + background < N2 ({} >= {})", k + bg, n2));
      }
    }
    suppress_prob_ = 0.0;
    if (params_.match_channel_loss) {
      // Half of all rounds are already lost to basis mismatch.
      if (setup.channel_loss < 0.5) {
        throw AttackRefused(fmt::format(
            "bright_illumination cannot emulate a channel loss below 0.5 (got {})",
            setup.channel_loss));
      }
      suppress_prob_ = 1.0 - 2.0 * (1.0 - setup.channel_loss);
    }
  }

  Delivery intercept(const PureState& in_flight, const RoundContext&, Rng& rng) override {
    if (suppress_prob_ > 0.0 && rng.bernoulli(suppress_prob_)) {
      return {dark(params_.background), Bit{rng.bit()}, std::nullopt, std::nullopt};
    }
    const Basis basis = random_basis(rng);
    const auto bit = measure_ideal(in_flight, basis, rng);
    if (!bit) return {dark(params_.background), Bit{rng.bit()}, std::nullopt, std::nullopt};
    return {Incident(MacroPulse::polarized(basis, *bit, params_.pulse_photons, kAlicePulse,
                                           params_.background)),
            *bit, std::nullopt, EveRecord{basis, *bit}};
  }

 private:
  attack::BrightIllumination params_;
  double suppress_prob_ = 0.0;
};

/// Photon-number splitting: keep one photon of every multi-photon pulse in a
/// perfect memory and measure it after the bases are announced.
class PhotonNumberSplitting final : public AttackStrategy {
 public:
  std::string_view name() const override { return "pns"; }

  void bind(const AttackSetup& setup) override {
    if (!(setup.multi_photon_prob > 0.0)) {
      throw AttackRefused("pns needs a source that emits multi-photon pulses (p2 > 0)");
    }
  }

  Delivery intercept(const PureState& in_flight, const RoundContext&, Rng& rng) override {
    // Quantum non-demolition count: Alice's pulses have a definite photon number.
    unsigned lo = ~0U;
    unsigned hi = 0;
    for (const auto& [occ, amp] : in_flight.terms()) {
      lo = std::min(lo, occ.total());
      hi = std::max(hi, occ.total());
    }
    if (lo != hi) throw UsageError("pns expects a pulse with definite photon number");
    if (hi < 2) return {Incident(in_flight), Bit{rng.bit()}, std::nullopt, std::nullopt};

    const PulseId memory{kAlicePulse.time, Path::memory};
    const PureState split = split_one_photon(in_flight, kAlicePulse, memory);
    auto [stored, forwarded] = factor_product(split, modes_of({memory}));
    return {Incident(std::move(forwarded)), DeferredMeasurement{std::move(stored)}, std::nullopt,
            std::nullopt};
  }
};

/// Reads Bob's basis off the already-configured PBS, then measures and
/// resends in that basis.
class BasisProbe final : public AttackStrategy {
 public:
  std::string_view name() const override { return "basis_probe"; }
  bool uses_basis_oracle() const override { return true; }

  void bind(const AttackSetup& setup) override {
    if (setup.receiver.style != ReceiverStyle::active || !setup.receiver.basis_leak) {
      throw AttackRefused(
          "basis_probe needs an active receiver whose basis is set before its detectors open "
          "(basis_leak = true)");
    }
  }

  Delivery intercept(const PureState& in_flight, const RoundContext& ctx, Rng& rng) override {
    if (!ctx.leaked_bob_basis) throw UsageError("basis_probe ran without a basis oracle");
    const Basis basis = *ctx.leaked_bob_basis;
    const auto bit = measure_ideal(in_flight, basis, rng);
    if (!bit) return {Incident::nothing(), Bit{rng.bit()}, std::nullopt, std::nullopt};
    return {Incident(encode_qubit(basis, *bit, kAlicePulse.time, kAlicePulse.path)), *bit,
            std::nullopt, EveRecord{basis, *bit}};
  }
};

class TableAttack final : public AttackStrategy {
 public:
  TableAttack(std::string name, ResendTable table)
      : name_(std::move(name)), table_(std::move(table)) {}
  std::string_view name() const override { return name_; }

  Delivery intercept(const PureState& in_flight, const RoundContext&, Rng& rng) override {
    const Basis basis = random_basis(rng);
    const auto bit = measure_ideal(in_flight, basis, rng);
    if (!bit) {
      return {table_.on_vacuum ? *table_.on_vacuum : Incident::nothing(), Bit{rng.bit()},
              std::nullopt, std::nullopt};
    }
    return {table_.at(basis, *bit), *bit, std::nullopt, EveRecord{basis, *bit}};
  }

 private:
  std::string name_;
  ResendTable table_;
};

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

std::string_view attack_name(const AttackSpec& spec) {
  return std::visit(Overloaded{
                        [](const attack::None&) { return std::string_view{"none"}; },
                        [](const attack::InterceptResend&) {
                          return std::string_view{"intercept_resend"};
                        },
                        [](const attack::TrojanPony&) { return std::string_view{"trojan_pony"}; },
                        [](const attack::FakedStatesTiming&) {
                          return std::string_view{"faked_states"};
                        },
                        [](const attack::FixedApparatus&) {
                          return std::string_view{"fixed_apparatus"};
                        },
                        [](const attack::BrightIllumination&) {
                          return std::string_view{"bright_illumination"};
                        },
                        [](const attack::PhotonNumberSplitting&) { return std::string_view{"pns"}; },
                        [](const attack::BasisProbe&) { return std::string_view{"basis_probe"}; },
                    },
                    spec);
}

std::vector<std::string_view> attack_names() {
  return {"none",         "intercept_resend",    "trojan_pony", "faked_states",
          "fixed_apparatus", "bright_illumination", "pns",         "basis_probe"};
}

std::optional<AttackSpec> attack_from_name(std::string_view name) {
  if (name == "none") return attack::None{};
  if (name == "intercept_resend") return attack::InterceptResend{};
  if (name == "trojan_pony") return attack::TrojanPony{};
  if (name == "faked_states") return attack::FakedStatesTiming{};
  if (name == "fixed_apparatus") return attack::FixedApparatus{};
  if (name == "bright_illumination") return attack::BrightIllumination{};
  if (name == "pns") return attack::PhotonNumberSplitting{};
  if (name == "basis_probe") return attack::BasisProbe{};
  return std::nullopt;
}

std::unique_ptr<AttackStrategy> make_attack(const AttackSpec& spec) {
  return std::visit(
      Overloaded{
          [](const attack::None&) -> std::unique_ptr<AttackStrategy> {
            return std::make_unique<NoAttack>();
          },
          [](const attack::InterceptResend&) -> std::unique_ptr<AttackStrategy> {
            return std::make_unique<InterceptResend>();
          },
          [](const attack::TrojanPony& p) -> std::unique_ptr<AttackStrategy> {
            return std::make_unique<TrojanPony>(p);
          },
          [](const attack::FakedStatesTiming&) -> std::unique_ptr<AttackStrategy> {
            return std::make_unique<FakedStatesTiming>();
          },
          [](const attack::FixedApparatus&) -> std::unique_ptr<AttackStrategy> {
            return std::make_unique<FixedApparatus>();
          },
          [](const attack::BrightIllumination& p) -> std::unique_ptr<AttackStrategy> {
            return std::make_unique<BrightIllumination>(p);
          },
          [](const attack::PhotonNumberSplitting&) -> std::unique_ptr<AttackStrategy> {
            return std::make_unique<PhotonNumberSplitting>();
          },
          [](const attack::BasisProbe&) -> std::unique_ptr<AttackStrategy> {
            return std::make_unique<BasisProbe>();
          },
      },
      spec);
}

std::optional<Bit> measure_ideal(const PureState& state, Basis basis, Rng& rng) {
  PureState s = state;
  if (basis == Basis::hadamard) {
    std::set<PulseId> pulses;
    for (ModeId m : state.modes()) pulses.insert({m.time, m.path});
    for (const PulseId& p : pulses) {
      s = apply_polarization_rotation(s, p, std::numbers::pi / 4,
                                      std::max(s.max_photons(), kDefaultMaxPhotons));
    }
  }
  const Measurement m = measure_occupation(s, s.modes(), rng);
  unsigned h = 0;
  unsigned v = 0;
  for (const auto& [mode, count] : m.outcome.entries()) {
    (mode.pol == Polarization::H ? h : v) += count;
  }
  if (h == 0 && v == 0) return std::nullopt;
  if (h != v) return h > v ? Bit{0} : Bit{1};
  return Bit{rng.bit()};
}

const Incident& ResendTable::at(Basis b, Bit bit) const {
  const auto& entry = entries[static_cast<std::size_t>(b)][bit];
  if (!entry) throw UsageError("resend table has no entry for this measurement result");
  return *entry;
}

std::unique_ptr<AttackStrategy> make_table_attack(std::string name, ResendTable table) {
  return std::make_unique<TableAttack>(std::move(name), std::move(table));
}

}  // namespace qkdsim
