#include "qkdsim/analyzer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "qkdsim/errors.hpp"

namespace qkdsim {
namespace {

constexpr double kZero = 1e-12;

class ModelDetector final : public BlackBoxDetector {
 public:
  explicit ModelDetector(DetectorModel model) : detector_(model) {}

  DetectorOutcome probe(double background, double pulse) override {
    Arrivals arrivals = kNoArrivals;
    arrivals[static_cast<std::size_t>(detector_.model().gate_open)] = pulse;
    return detector_.respond(arrivals, background);
  }

 private:
  Detector detector_;
};

std::size_t binomial_coefficient(std::size_t n, std::size_t k) {
  // Saturates instead of overflowing; only compared against a cap.
  constexpr std::size_t kSaturated = std::size_t{1} << 62;
  std::size_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;
    if (r > kSaturated) return kSaturated;
  }
  return r;
}

std::vector<PulseId> pulses_of(const std::vector<ModeId>& modes) {
  std::vector<PulseId> out;
  for (const ModeId& m : modes) {
    const PulseId p{m.time, m.path};
    if (std::find(out.begin(), out.end(), p) != out.end()) continue;
    const bool has_both =
        std::find(modes.begin(), modes.end(), p.mode(Polarization::H)) != modes.end() &&
        std::find(modes.begin(), modes.end(), p.mode(Polarization::V)) != modes.end();
    if (has_both) out.push_back(p);
  }
  return out;
}

// Compositions of `total` photons over `width` modes, first mode's count
// descending (so |n,0,...> precedes |0,...,n>).
void compositions(std::size_t width, unsigned total, std::vector<unsigned>& prefix,
                  std::vector<std::vector<unsigned>>& out) {
  if (prefix.size() + 1 == width) {
    prefix.push_back(total);
    out.push_back(prefix);
    prefix.pop_back();
    return;
  }
  for (unsigned k = total + 1; k-- > 0;) {
    prefix.push_back(k);
    compositions(width, total - k, prefix, out);
    prefix.pop_back();
  }
}

std::string ket_label(const OccupationVector& occ) {
  if (occ.empty()) return "|vac>";
  std::string s;
  for (const auto& [mode, count] : occ.entries()) {
    if (!s.empty()) s += ",";
    s += fmt::format("{}:{}", to_string(mode), count);
  }
  return "|" + s + ">";
}

struct MacroPolarization {
  const char* label;
  Basis basis;
  Bit bit;
};
constexpr std::array<MacroPolarization, 4> kMacroPolarizations{{
    {"H", Basis::computational, 0},
    {"V", Basis::computational, 1},
    {"+45", Basis::hadamard, 0},
    {"-45", Basis::hadamard, 1},
}};

ResponseClass class_of(const ClickPattern& p) {
  if (p.any_burned) return ResponseClass::burned;
  const OutcomeClass c = classify_outcome(p, InvalidPolicy::as_error);
  switch (c.kind) {
    case OutcomeClass::Kind::valid:
      return c.bit == 0 ? ResponseClass::valid0 : ResponseClass::valid1;
    case OutcomeClass::Kind::invalid:
      return ResponseClass::invalid;
    case OutcomeClass::Kind::loss:
      break;
  }
  return ResponseClass::loss;
}

// Turns accumulated weights into a distribution. An arm that is never used
// is reported as certain loss.
ResponseDistribution finish(const std::array<double, kResponseClassCount>& weight,
                            std::optional<std::size_t> trials) {
  ResponseDistribution d;
  double total = 0.0;
  for (double w : weight) total += w;
  if (total <= kZero) {
    d.probability[static_cast<std::size_t>(ResponseClass::loss)] = 1.0;
    return d;
  }
  for (std::size_t i = 0; i < kResponseClassCount; ++i) {
    d.probability[i] = weight[i] / total;
    if (trials) {
      d.std_error[i] = std::sqrt(d.probability[i] * (1.0 - d.probability[i]) / total);
    }
  }
  return d;
}

double lost_fraction(const ResponseDistribution& d, InvalidPolicy policy) {
  double lost = d[ResponseClass::loss];
  if (policy == InvalidPolicy::as_loss) lost += d[ResponseClass::invalid];
  return lost;
}

}  // namespace

DetectorFactory model_detector_factory(DetectorModel model) {
  model.validate();
  return [model] { return std::make_unique<ModelDetector>(model); };
}

ThresholdEstimate probe_thresholds(const DetectorFactory& make_detector, std::int64_t k_max) {
  if (k_max < 2) throw UsageError("k_max must be at least 2");
  ThresholdEstimate est;
  // Largest total in-gate load a detector is known to survive.
  std::int64_t safe_load = 0;

  // A one-photon probe under background b is silent exactly when b >= N1
  // (burning needs b + 1 >= N2 > N1, so it implies the same).
  auto blinded = [&](std::int64_t b) {
    ++est.probe_count;
    const DetectorOutcome o = make_detector()->probe(static_cast<double>(b), 1.0);
    if (o != DetectorOutcome::burned) safe_load = std::max(safe_load, b + 1);
    return o != DetectorOutcome::click;
  };

  if (blinded(0)) throw ThresholdNotFound("detector does not click on a single photon");
  std::int64_t lo = 0;
  std::int64_t hi = -1;
  for (std::int64_t b = 1;; b = std::min(2 * b, k_max)) {
    if (blinded(b)) {
      hi = b;
      break;
    }
    lo = b;
    if (b == k_max) break;
  }
  if (hi < 0) {
    throw ThresholdNotFound(fmt::format("no blinding transition found below k_max = {}", k_max));
  }
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    (blinded(mid) ? hi : lo) = mid;
  }
  const std::int64_t onset = hi;

  // Escalate pulse energy on fresh detectors until one is destroyed.
  std::int64_t last_safe = safe_load;
  std::int64_t first_burned = -1;
  for (std::int64_t p = std::min(2 * safe_load, k_max);; p = std::min(2 * p, k_max)) {
    ++est.probe_count;
    ++est.sacrificial_probes;
    if (make_detector()->probe(0.0, static_cast<double>(p)) == DetectorOutcome::burned) {
      first_burned = p;
      break;
    }
    last_safe = p;
    if (p == k_max) break;
  }
  if (first_burned < 0) {
    throw ThresholdNotFound(fmt::format("no damage threshold found below k_max = {}", k_max));
  }
  est.n2 = {last_safe, first_burned};
  est.n1 = {onset - 1, std::min(onset + 1, est.n2.low)};
  return est;
}

EnumerationBounds bounds_for(const ReceiverConfig& receiver, unsigned max_photons,
                             std::vector<double> intensities, std::vector<double> backgrounds) {
  EnumerationBounds b;
  b.modes = modes_of(receiver.input_pulses());
  b.max_photons = max_photons;
  b.intensities = std::move(intensities);
  b.backgrounds = std::move(backgrounds);
  return b;
}

EnumerationBounds bounds_for(const ReceiverConfig& receiver, unsigned max_photons,
                             const ThresholdEstimate& thresholds) {
  std::vector<double> intensities;
  const std::int64_t blind = thresholds.n1.high;
  // Few-photon light belongs to the exact regime: a semiclassical pulse of a
  // couple of photons would split into fractional, shot-noise-free
  // intensities that no real detector produces.
  std::int64_t first = 2;
  while (first <= static_cast<std::int64_t>(max_photons)) first *= 2;
  for (std::int64_t i = first; i + 2 * blind < thresholds.n2.low; i *= 2) {
    intensities.push_back(static_cast<double>(i));
  }
  std::vector<double> backgrounds{0.0, static_cast<double>(blind), 2.0 * static_cast<double>(blind)};
  return bounds_for(receiver, max_photons, std::move(intensities), std::move(backgrounds));
}

std::size_t count_candidates(const EnumerationBounds& bounds) {
  const std::size_t m = bounds.modes.size();
  const std::size_t pulses = pulses_of(bounds.modes).size();
  const std::size_t exact = binomial_coefficient(m + bounds.max_photons, bounds.max_photons) +
                            (bounds.max_photons >= 1 ? 2 * pulses : 0);
  const std::size_t backgrounds = std::max<std::size_t>(bounds.backgrounds.size(), 1);
  return exact + bounds.intensities.size() * kMacroPolarizations.size() * pulses * backgrounds;
}

std::vector<CandidateIncident> enumerate_protocol_space(const EnumerationBounds& bounds) {
  if (bounds.modes.empty()) throw UsageError("enumeration needs at least one mode");
  const std::size_t expected = count_candidates(bounds);
  if (expected > bounds.candidate_cap) {
    throw UsageError(fmt::format("protocol space has {} candidates, above the cap of {}",
                                 expected, bounds.candidate_cap));
  }

  std::vector<ModeId> modes = bounds.modes;
  std::sort(modes.begin(), modes.end());
  std::vector<CandidateIncident> out;
  out.reserve(expected);
  auto push = [&](Incident incident, std::string label) {
    out.push_back({std::move(incident), std::move(label), out.size()});
  };

  for (unsigned n = 0; n <= bounds.max_photons; ++n) {
    std::vector<std::vector<unsigned>> counts;
    std::vector<unsigned> prefix;
    compositions(modes.size(), n, prefix, counts);
    for (const auto& c : counts) {
      OccupationVector occ;
      for (std::size_t i = 0; i < modes.size(); ++i) {
        if (c[i] > 0) occ.set(modes[i], c[i]);
      }
      std::string label = ket_label(occ);
      push(PureState(modes, {{occ, 1.0}}), std::move(label));
    }
  }

  const std::vector<PulseId> pulses = pulses_of(modes);
  if (bounds.max_photons >= 1) {
    for (const PulseId& p : pulses) {
      for (Bit bit : {Bit{0}, Bit{1}}) {
        PureState s = encode_qubit(Basis::hadamard, bit, p.time, p.path);
        std::vector<ModeId> extra;
        for (const ModeId& m : modes) {
          if (!s.has_mode(m)) extra.push_back(m);
        }
        push(s.with_modes(extra), fmt::format("|{}> @ {}", bit == 0 ? "+" : "-", to_string(p)));
      }
    }
  }

  const std::vector<double> backgrounds =
      bounds.backgrounds.empty() ? std::vector<double>{0.0} : bounds.backgrounds;
  for (double intensity : bounds.intensities) {
    for (const MacroPolarization& pol : kMacroPolarizations) {
      for (const PulseId& p : pulses) {
        for (double bg : backgrounds) {
          push(MacroPulse::polarized(pol.basis, pol.bit, intensity, p, bg),
               fmt::format("macro {:g} photons {} @ {}, background {:g}", intensity, pol.label,
                           to_string(p), bg));
        }
      }
    }
  }
  return out;
}

std::string_view to_string(ResponseClass c) {
  switch (c) {
    case ResponseClass::valid0:
      return "valid0";
    case ResponseClass::valid1:
      return "valid1";
    case ResponseClass::loss:
      return "loss";
    case ResponseClass::invalid:
      return "invalid";
    case ResponseClass::burned:
      return "burned";
  }
  return "?";
}

ResponseProfile classify_response(const ReceiverConfig& receiver,
                                  const CandidateIncident& candidate,
                                  const ClassifyOptions& options) {
  receiver.validate();
  using Tally = std::array<double, kResponseClassCount>;
  std::array<Tally, 2> tally{};
  auto add = [&](Basis b, const ClickPattern& p, double w) {
    tally[static_cast<std::size_t>(b)][static_cast<std::size_t>(class_of(p))] += w;
  };

  ResponseProfile profile;
  const bool passive = receiver.style == ReceiverStyle::passive;
  std::optional<std::size_t> trials;
  if (!options.exact) trials = options.trials;

  if (options.exact) {
    if (passive) {
      for (const auto& br : response_branches(receiver, Basis::computational, candidate.incident,
                                              std::nullopt, options.max_photons)) {
        add(br.value.basis, br.value, br.probability);
      }
    } else {
      for (Basis b : kBases) {
        for (const auto& br : response_branches(receiver, b, candidate.incident, std::nullopt,
                                                options.max_photons)) {
          add(b, br.value, br.probability);
        }
      }
    }
  } else {
    if (options.trials == 0) throw UsageError("Monte Carlo classification needs trials > 0");
    Rng rng = Rng::derive(options.seed, candidate.index);
    for (std::size_t i = 0; i < options.trials; ++i) {
      if (passive) {
        Receiver fresh(receiver, options.max_photons);
        const ClickPattern p = fresh.receive(Basis::computational, candidate.incident,
                                             std::nullopt, rng);
        add(p.basis, p, 1.0);
      } else {
        for (Basis b : kBases) {
          Receiver fresh(receiver, options.max_photons);
          add(b, fresh.receive(b, candidate.incident, std::nullopt, rng), 1.0);
        }
      }
    }
  }

  for (Basis b : kBases) {
    const auto i = static_cast<std::size_t>(b);
    profile.per_basis[i] = finish(tally[i], trials);
  }
  if (passive) {
    double weights[2] = {0.0, 0.0};
    for (std::size_t i = 0; i < 2; ++i) {
      for (double w : tally[i]) weights[i] += w;
    }
    const double total = weights[0] + weights[1];
    if (total > 0.0) profile.basis_weight = {weights[0] / total, weights[1] / total};
  }
  return profile;
}

bool accepts(const ResponseProfile& profile, Basis eve_basis, Bit eve_bit, double epsilon,
             InvalidPolicy policy) {
  const ResponseDistribution& match = profile.in(eve_basis);
  const ResponseDistribution& miss = profile.in(other(eve_basis));
  const ResponseClass wanted = eve_bit == 0 ? ResponseClass::valid0 : ResponseClass::valid1;
  const ResponseClass wrong = eve_bit == 0 ? ResponseClass::valid1 : ResponseClass::valid0;
  const bool invalid_hurts = policy == InvalidPolicy::as_error;
  auto clean = [&](const ResponseDistribution& d) {
    return d[ResponseClass::burned] <= kZero &&
           (!invalid_hurts || d[ResponseClass::invalid] <= kZero);
  };
  // A basis Bob never lands in cannot leak errors.
  const double match_weight = profile.basis_weight[static_cast<std::size_t>(eve_basis)];
  if (match_weight <= kZero) return false;
  return match[wanted] >= 1.0 - epsilon && match[wrong] <= epsilon && clean(match) &&
         miss.valid() <= epsilon && clean(miss);
}

const RecipeEntry& AttackRecipe::at(Basis b, Bit bit) const {
  for (const RecipeEntry& e : entries) {
    if (e.eve_basis == b && e.eve_bit == bit) return e;
  }
  throw UsageError("recipe has no entry for this measurement result");
}

ResendTable AttackRecipe::resend_table() const {
  ResendTable table;
  for (const RecipeEntry& e : entries) {
    table.entries[static_cast<std::size_t>(e.eve_basis)][e.eve_bit] = e.candidate.incident;
  }
  if (background > 0.0) {
    table.on_vacuum = Incident(MacroPulse({}, background));
  }
  return table;
}

std::optional<AttackRecipe> synthesize_faked_states(const ReceiverConfig& receiver,
                                                    std::span<const CandidateIncident> candidates,
                                                    const SynthesisOptions& options) {
  const double epsilon = options.epsilon.value_or(options.classify.exact ? 0.0 : 1e-3);
  if (epsilon < 0.0 || epsilon >= 0.5) throw UsageError("epsilon must lie in [0, 0.5)");

  std::vector<double> backgrounds;
  for (const CandidateIncident& c : candidates) {
    if (std::find(backgrounds.begin(), backgrounds.end(), c.background()) == backgrounds.end()) {
      backgrounds.push_back(c.background());
    }
  }
  // Classify lazily: most candidates are never looked at.
  std::vector<std::optional<ResponseProfile>> profiles(candidates.size());
  auto profile_of = [&](std::size_t i) -> const ResponseProfile& {
    if (!profiles[i]) profiles[i] = classify_response(receiver, candidates[i], options.classify);
    return *profiles[i];
  };

  for (double bg : backgrounds) {
    AttackRecipe recipe;
    recipe.background = bg;
    for (Basis b : kBases) {
      for (Bit bit : {Bit{0}, Bit{1}}) {
        for (std::size_t i = 0; i < candidates.size(); ++i) {
          if (candidates[i].background() != bg) continue;
          if (!accepts(profile_of(i), b, bit, epsilon, options.policy)) continue;
          recipe.entries.push_back({b, bit, candidates[i], profile_of(i)});
          break;
        }
      }
    }
    if (recipe.entries.size() != 4) continue;

    double lost = 0.0;
    for (const RecipeEntry& e : recipe.entries) {
      for (Basis b : kBases) {
        lost += e.profile.basis_weight[static_cast<std::size_t>(b)] *
                lost_fraction(e.profile.in(b), options.policy);
      }
    }
    recipe.loss_rate = lost / 4.0;
    return recipe;
  }
  return std::nullopt;
}

std::optional<PureState> reverse_bob_unitary(const ReceiverConfig& receiver,
                                             const DesiredClick& desired, unsigned max_photons) {
  receiver.validate();
  if (!receiver.detector(desired.basis, desired.bit).in_gate(desired.time)) return std::nullopt;

  const ModeId target = detector_mode(receiver, desired.basis, desired.bit, desired.time);
  const PureState click({target}, {{OccupationVector{{target, 1}}, 1.0}});

  const std::vector<ModeTransform> forward = receiver_optics(receiver, desired.basis);
  std::vector<ModeTransform> backward;
  for (auto it = forward.rbegin(); it != forward.rend(); ++it) backward.push_back(it->inverse());
  const PureState pre = apply(click, backward, max_photons);

  std::vector<ModeId> inputs = modes_of(receiver.input_pulses());
  for (const auto& [occ, amp] : pre.terms()) {
    for (const auto& [mode, count] : occ.entries()) {
      if (std::find(inputs.begin(), inputs.end(), mode) == inputs.end()) return std::nullopt;
    }
  }
  // Keep only the ports Eve can feed, plus any of them the preimage skipped.
  PureState::Terms terms(pre.terms().begin(), pre.terms().end());
  return PureState(std::move(inputs), std::move(terms));
}

RunReport verify_recipe(const ReceiverConfig& receiver, const AttackRecipe& recipe,
                        std::uint64_t rounds, std::uint64_t seed, InvalidPolicy policy) {
  RunConfig config;
  config.scenario = "synthesized";
  config.rounds = rounds;
  config.seed = seed;
  config.receiver = receiver;
  config.invalid_policy = policy;
  auto strategy = make_table_attack("synthesized_faked_states", recipe.resend_table());
  return run_with(config, *strategy).report;
}

AnalysisReport analyze_receiver(const std::string& name, const ReceiverConfig& receiver,
                                const AnalysisOptions& options) {
  receiver.validate();
  AnalysisReport report;
  report.receiver_name = name;

  EnumerationBounds bounds = bounds_for(receiver, options.max_photons);
  if (options.probe) {
    // All detectors share one model in the presets; probe the first.
    report.thresholds =
        probe_thresholds(model_detector_factory(receiver.detectors.front()), options.k_max);
    bounds = bounds_for(receiver, options.max_photons, *report.thresholds);
  }
  const auto candidates = enumerate_protocol_space(bounds);
  report.candidate_count = candidates.size();

  SynthesisOptions synth;
  synth.policy = options.policy;
  synth.classify.max_photons = options.max_photons;
  report.recipe = synthesize_faked_states(receiver, candidates, synth);

  for (Basis b : kBases) {
    for (Bit bit : {Bit{0}, Bit{1}}) {
      for (TimeBin t : kAllTimeBins) {
        const DesiredClick d{b, bit, t};
        report.preimages.push_back({d, reverse_bob_unitary(receiver, d, options.max_photons)});
      }
    }
  }

  if (report.recipe && options.verify_rounds > 0) {
    report.verification =
        verify_recipe(receiver, *report.recipe, options.verify_rounds, options.seed, options.policy);
  }
  return report;
}

}  // namespace qkdsim
