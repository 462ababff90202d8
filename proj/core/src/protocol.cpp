#include "qkdsim/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "qkdsim/errors.hpp"

namespace qkdsim {
namespace {

// Stream labels for Rng::derive. Each party owns its randomness so that, for
// example, re-seeding Bob leaves Eve's choices untouched.
enum Stream : std::uint64_t { kAlice = 1, kChannel = 2, kEve = 3, kBob = 4, kPublic = 5 };

double rate(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

void check_unit(const char* field, double value, bool closed_top) {
  const bool ok = closed_top ? (value >= 0.0 && value <= 1.0) : (value >= 0.0 && value < 1.0);
  if (!ok) {
    throw ConfigError(
        fmt::format("{} must lie in [0,1{} (got {})", field, closed_top ? "]" : ")", value));
  }
}

Bit resolve_claim(const EveClaim& claim, Basis alice_basis, Rng& eve_rng) {
  if (const Bit* b = std::get_if<Bit>(&claim)) return *b;
  const auto& deferred = std::get<DeferredMeasurement>(claim);
  const auto bit = measure_ideal(deferred.stored, alice_basis, eve_rng);
  return bit ? *bit : eve_rng.bit();
}

}  // namespace

std::string_view to_string(InvalidPolicy p) {
  return p == InvalidPolicy::as_error ? "as_error" : "as_loss";
}

std::optional<InvalidPolicy> parse_invalid_policy(std::string_view s) {
  if (s == "as_error") return InvalidPolicy::as_error;
  if (s == "as_loss") return InvalidPolicy::as_loss;
  return std::nullopt;
}

void RunConfig::validate() const {
  if (rounds == 0) throw ConfigError("rounds must be positive");
  check_unit("multi_photon_prob", source.multi_photon_prob, false);
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ConfigError(fmt::format("test_fraction must lie in (0,1) (got {})", test_fraction));
  }
  check_unit("abort_qber", abort_qber, true);
  check_unit("channel_loss", channel_loss, false);
  if (max_photons < 2) throw ConfigError("max_photons must be at least 2");
  try {
    receiver.validate();
  } catch (const UsageError& e) {
    throw ConfigError(fmt::format("receiver: {}", e.what()));
  }
}

PureState alice_state(Basis basis, Bit bit, unsigned photons) {
  if (photons == 0) return vacuum(modes_of({kAlicePulse}));
  return encode_pulse(basis, bit, photons, kAlicePulse.time, kAlicePulse.path, photons);
}

Emission alice_prepare(const SourceConfig& source, Rng& rng) {
  const Bit bit = rng.bit();
  const Basis basis = rng.bit() == 0 ? Basis::computational : Basis::hadamard;
  const unsigned photons = rng.bernoulli(source.multi_photon_prob) ? 2U : 1U;
  return {bit, basis, photons, alice_state(basis, bit, photons)};
}

std::string to_string(const OutcomeClass& c) {
  switch (c.kind) {
    case OutcomeClass::Kind::valid:
      return fmt::format("valid({})", c.bit);
    case OutcomeClass::Kind::loss:
      return "loss";
    case OutcomeClass::Kind::invalid:
      return "invalid";
  }
  return "?";
}

OutcomeClass classify_outcome(const ClickPattern& clicks, InvalidPolicy policy) {
  if (clicks.double_click()) {
    return policy == InvalidPolicy::as_error ? OutcomeClass::invalid() : OutcomeClass::loss();
  }
  if (clicks.bit0 == DetectorOutcome::click) return OutcomeClass::valid(0);
  if (clicks.bit1 == DetectorOutcome::click) return OutcomeClass::valid(1);
  return OutcomeClass::loss();
}

std::vector<SiftedPair> sift(std::span<const RoundRecord> records) {
  std::vector<SiftedPair> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const RoundRecord& r = records[i];
    if (r.alice_basis != r.bob_basis) continue;
    switch (r.outcome.kind) {
      case OutcomeClass::Kind::valid:
        out.push_back({r.alice_bit, r.outcome.bit, false, i});
        break;
      case OutcomeClass::Kind::invalid:
        out.push_back({r.alice_bit, r.bob_bit, true, i});
        break;
      case OutcomeClass::Kind::loss:
        break;
    }
  }
  return out;
}

QberEstimate estimate_qber(std::vector<SiftedPair> sifted, double test_fraction, Rng& rng) {
  QberEstimate est;
  const std::size_t n = sifted.size();
  if (n == 0) return est;
  const auto k = std::min<std::size_t>(
      n, static_cast<std::size_t>(std::ceil(test_fraction * static_cast<double>(n))));

  // Partial Fisher-Yates over indices picks k distinct positions.
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = 0; i < k; ++i) std::swap(idx[i], idx[i + rng.below(n - i)]);

  std::vector<bool> tested(n, false);
  std::size_t errors = 0;
  for (std::size_t i = 0; i < k; ++i) {
    tested[idx[i]] = true;
    if (sifted[idx[i]].mismatched()) ++errors;
  }
  est.sample_size = k;
  est.qber = k == 0 ? std::nullopt : std::optional<double>(rate(errors, k));
  for (std::size_t i = 0; i < n; ++i) {
    if (!tested[i]) est.remaining.push_back(sifted[i]);
  }
  return est;
}

RunReport run(const RunConfig& config) { return run_detailed(config).report; }

RunResult run_detailed(const RunConfig& config, const RunOptions& options) {
  config.validate();
  auto strategy = make_attack(config.attack);
  return run_with(config, *strategy, options);
}

RunResult run_with(const RunConfig& config, AttackStrategy& strategy, const RunOptions& options) {
  config.validate();
  strategy.bind(AttackSetup{config.receiver, config.source.multi_photon_prob, config.channel_loss,
                            config.max_photons});
  if (strategy.uses_basis_oracle() &&
      !(config.receiver.style == ReceiverStyle::active && config.receiver.basis_leak)) {
    throw AttackRefused(fmt::format("{} needs a receiver that leaks its basis", strategy.name()));
  }

  Rng alice_rng = Rng::derive(config.seed, kAlice);
  Rng channel_rng = Rng::derive(config.seed, kChannel);
  Rng eve_rng = Rng::derive(config.seed, kEve);
  Rng bob_rng = options.bob_seed ? Rng::derive(*options.bob_seed, kBob)
                                 : Rng::derive(config.seed, kBob);
  Rng public_rng = Rng::derive(config.seed, kPublic);

  Receiver receiver(config.receiver, config.max_photons);
  const bool lossy_line = config.channel_loss > 0.0 && !strategy.intercepts_at_source();

  std::vector<RoundRecord> records;
  records.reserve(config.rounds);
  std::size_t double_clicks = 0;
  bool burned = false;

  for (std::uint64_t round = 0; round < config.rounds; ++round) {
    RoundRecord rec;
    Emission emission = alice_prepare(config.source, alice_rng);
    rec.alice_bit = emission.bit;
    rec.alice_basis = emission.basis;
    rec.photons_emitted = emission.photons;

    PureState in_flight = std::move(emission.state);
    if (lossy_line) {
      const unsigned survivors = channel_rng.binomial(emission.photons, 1.0 - config.channel_loss);
      if (survivors != emission.photons) {
        in_flight = alice_state(emission.basis, emission.bit, survivors);
      }
    }

    // An active receiver fixes its basis before anything arrives.
    const Basis active_basis = bob_rng.bit() == 0 ? Basis::computational : Basis::hadamard;
    RoundContext ctx;
    if (strategy.uses_basis_oracle()) ctx.leaked_bob_basis = active_basis;

    Delivery delivery = strategy.intercept(in_flight, ctx, eve_rng);
    rec.eve = delivery.record;
    if (options.keep_records) rec.delivered = delivery.incident.describe();

    const ClickPattern clicks =
        receiver.receive(active_basis, delivery.incident, delivery.forced_arm, bob_rng);
    rec.claim = std::move(delivery.claim);
    rec.bob_basis = clicks.basis;
    rec.raw_clicks = clicks;
    rec.outcome = classify_outcome(clicks, config.invalid_policy);
    if (rec.outcome.kind == OutcomeClass::Kind::valid) {
      rec.bob_bit = rec.outcome.bit;
    } else if (rec.outcome.kind == OutcomeClass::Kind::invalid) {
      rec.bob_bit = bob_rng.bit();
    }
    if (clicks.double_click()) ++double_clicks;
    if (clicks.any_burned) burned = true;
    records.push_back(std::move(rec));
  }

  RunReport rep;
  rep.scenario = config.scenario;
  rep.attack = std::string(strategy.name());
  rep.rounds = config.rounds;
  rep.seed = config.seed;
  rep.burned = burned;

  for (const RoundRecord& r : records) {
    if (r.alice_basis != r.bob_basis) continue;
    ++rep.matched_rounds;
    switch (r.outcome.kind) {
      case OutcomeClass::Kind::valid:
        ++rep.valid_rounds;
        break;
      case OutcomeClass::Kind::loss:
        ++rep.loss_rounds;
        break;
      case OutcomeClass::Kind::invalid:
        ++rep.invalid_rounds;
        break;
    }
  }
  rep.loss_rate = rate(rep.loss_rounds, rep.matched_rounds);
  rep.invalid_rate = rate(rep.invalid_rounds, rep.matched_rounds);
  rep.double_click_rate = rate(double_clicks, records.size());

  std::vector<SiftedPair> sifted = sift(records);
  rep.sifted_key_length = sifted.size();
  QberEstimate est = estimate_qber(std::move(sifted), config.test_fraction, public_rng);
  rep.qber = est.qber;
  rep.test_sample_size = est.sample_size;
  rep.final_key_length = est.remaining.size();
  rep.aborted = !est.qber || *est.qber > config.abort_qber || burned;

  // Bases are public now; Eve settles any deferred measurements.
  std::size_t agree = 0;
  std::size_t multi = 0;
  std::size_t multi_agree = 0;
  for (const SiftedPair& p : est.remaining) {
    const RoundRecord& r = records[p.round];
    const bool correct = resolve_claim(r.claim, r.alice_basis, eve_rng) == p.bob_bit;
    agree += correct ? 1 : 0;
    if (r.photons_emitted >= 2) {
      ++multi;
      multi_agree += correct ? 1 : 0;
    }
  }
  rep.eve_info = rate(agree, est.remaining.size());
  if (multi > 0) rep.multi_photon_eve_info = rate(multi_agree, multi);

  RunResult result;
  result.report = std::move(rep);
  if (options.keep_records) result.records = std::move(records);
  return result;
}

}  // namespace qkdsim
