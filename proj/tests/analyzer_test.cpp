#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "qkdsim/analyzer.hpp"
#include "qkdsim/errors.hpp"
#include "qkdsim/scenarios.hpp"

namespace qkdsim {
namespace {

constexpr double kTol = 1e-9;

ReceiverConfig receiver(std::string_view name) { return find_receiver_preset(name)->config; }

DetectorModel model(std::int64_t n1, std::int64_t l, std::int64_t n2) {
  DetectorModel m;
  m.n1 = n1;
  m.linear_threshold = l;
  m.n2 = n2;
  return m;
}

TEST(ProbeThresholdsTest, DefaultDetector) {
  const ThresholdEstimate e = probe_thresholds(model_detector_factory({}), 2'000'000);
  EXPECT_TRUE(e.n1.contains(50));
  EXPECT_LE(e.n1.high - e.n1.low, 2);
  EXPECT_TRUE(e.n2.contains(1'000'000));
  EXPECT_LE(e.n2.high, 2 * e.n2.low);
  EXPECT_GT(e.sacrificial_probes, 0u);
}

TEST(ProbeThresholdsTest, RandomDetectors) {
  std::mt19937_64 gen(8);
  for (int i = 0; i < 200; ++i) {
    const std::int64_t n2 = std::uniform_int_distribution<std::int64_t>(10, 1'000'000)(gen);
    const std::int64_t n1 = std::uniform_int_distribution<std::int64_t>(1, n2 - 2)(gen);
    const std::int64_t l = std::uniform_int_distribution<std::int64_t>(n1 + 1, n2)(gen);
    const ThresholdEstimate e = probe_thresholds(model_detector_factory(model(n1, l, n2)), 2 * n2);
    EXPECT_TRUE(e.n1.contains(n1)) << n1 << " in (" << e.n1.low << ", " << e.n1.high << "]";
    EXPECT_GE(e.n1.low, n1 - 1);
    EXPECT_LE(e.n1.high, n1 + 1);
    EXPECT_TRUE(e.n2.contains(n2)) << n2 << " in (" << e.n2.low << ", " << e.n2.high << "]";
    EXPECT_LE(e.n2.high, 2 * e.n2.low);
  }
}

TEST(ProbeThresholdsTest, BlindingJustBelowDamage) {
  const ThresholdEstimate e =
      probe_thresholds(model_detector_factory(model(999'999, 1'000'000, 1'000'000)), 4'000'000);
  EXPECT_TRUE(e.n1.contains(999'999));
  EXPECT_TRUE(e.n2.contains(1'000'000));
}

TEST(ProbeThresholdsTest, NoTransitionBelowLimit) {
  EXPECT_THROW(probe_thresholds(model_detector_factory({}), 40), ThresholdNotFound);
  EXPECT_THROW(probe_thresholds(model_detector_factory({}), 100'000), ThresholdNotFound);
  EXPECT_THROW(probe_thresholds(model_detector_factory({}), 1), UsageError);
}

TEST(EnumerateTest, TwoModesUpToTwoPhotons) {
  EnumerationBounds b;
  b.modes = modes_of({{TimeBin::t_half, Path::regular}});
  b.max_photons = 2;
  const auto c = enumerate_protocol_space(b);
  // |0,0>, |0,1>, |1,0>, |0,2>, |1,1>, |2,0>, then |+>, |->.
  ASSERT_EQ(c.size(), 8u);
  EXPECT_EQ(count_candidates(b), 8u);
  for (std::size_t i = 0; i < c.size(); ++i) EXPECT_EQ(c[i].index, i);
  EXPECT_TRUE(c[0].incident.state().is_vacuum());
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(c[i].incident.state().terms().size(), 1u);
  EXPECT_EQ(c[6].incident.state().terms().size(), 2u);
}

TEST(EnumerateTest, SixModesOnePhoton) {
  EnumerationBounds b = bounds_for(receiver("blindable"), 1);
  EXPECT_EQ(b.modes.size(), 6u);
  EXPECT_EQ(enumerate_protocol_space(b).size(), 7u + 6u);
}

TEST(EnumerateTest, MacroGridMultiplies) {
  EnumerationBounds b = bounds_for(receiver("blindable"), 1, {1000, 2000}, {0, 60});
  EXPECT_EQ(count_candidates(b), 13u + 2 * 4 * 3 * 2);
  const auto c = enumerate_protocol_space(b);
  EXPECT_EQ(c.size(), count_candidates(b));
  EXPECT_FALSE(c.back().incident.exact());
  EXPECT_EQ(c.back().background(), 60.0);
}

TEST(EnumerateTest, CapIsEnforcedBeforeBuilding) {
  EnumerationBounds b = bounds_for(receiver("compromised"), 4);
  b.candidate_cap = 100;
  EXPECT_THROW(enumerate_protocol_space(b), UsageError);
}

TEST(EnumerateTest, ThresholdGridStaysBelowDamage) {
  const ThresholdEstimate e = probe_thresholds(model_detector_factory({}), 2'000'000);
  const EnumerationBounds b = bounds_for(receiver("blindable"), 4, e);
  ASSERT_FALSE(b.intensities.empty());
  EXPECT_GT(b.intensities.front(), 4.0);
  for (double i : b.intensities) EXPECT_LT(i + 2 * e.n1.high, e.n2.low);
  EXPECT_EQ(b.backgrounds, (std::vector<double>{0.0, 51.0, 102.0}));
}

CandidateIncident exact(PureState s) { return {Incident(std::move(s)), "", 0}; }

TEST(ClassifyTest, SinglePhotonOnActiveReceiver) {
  const auto p = classify_response(receiver("blindable"),
                                   exact(encode_qubit(Basis::computational, 1, TimeBin::t_half,
                                                      Path::regular)));
  EXPECT_NEAR(p.in(Basis::computational)[ResponseClass::valid1], 1.0, kTol);
  EXPECT_NEAR(p.in(Basis::hadamard)[ResponseClass::valid0], 0.5, kTol);
  EXPECT_NEAR(p.in(Basis::hadamard)[ResponseClass::valid1], 0.5, kTol);
}

TEST(ClassifyTest, PhotonOutsideTheGateIsLost) {
  const auto p = classify_response(receiver("blindable"),
                                   exact(encode_qubit(Basis::computational, 0, TimeBin::t0,
                                                      Path::regular)));
  for (Basis b : kBases) EXPECT_NEAR(p.in(b)[ResponseClass::loss], 1.0, kTol);
}

TEST(ClassifyTest, BlindingPulseOnActiveReceiver) {
  const CandidateIncident c{
      Incident(MacroPulse::polarized(Basis::hadamard, 0, 1024, {TimeBin::t_half, Path::regular}, 51)),
      "", 0};
  const auto p = classify_response(receiver("blindable"), c);
  EXPECT_NEAR(p.in(Basis::hadamard)[ResponseClass::valid0], 1.0, kTol);
  EXPECT_NEAR(p.in(Basis::computational)[ResponseClass::loss], 1.0, kTol);
  EXPECT_TRUE(accepts(p, Basis::hadamard, 0, 0.0, InvalidPolicy::as_error));
  EXPECT_FALSE(accepts(p, Basis::hadamard, 1, 0.0, InvalidPolicy::as_error));
}

TEST(ClassifyTest, PassiveReceiverReportsArmWeights) {
  const auto p = classify_response(receiver("gated"),
                                   exact(encode_qubit(Basis::computational, 0, TimeBin::t0,
                                                      Path::regular)));
  // At t0 only the computational detectors are open.
  EXPECT_NEAR(p.basis_weight[0] + p.basis_weight[1], 1.0, kTol);
  EXPECT_NEAR(p.in(Basis::computational)[ResponseClass::valid0], 1.0, kTol);
  EXPECT_NEAR(p.in(Basis::hadamard).valid(), 0.0, kTol);
}

TEST(ClassifyTest, MonteCarloAgreesWithExact) {
  const std::vector<CandidateIncident> cases{
      exact(encode_qubit(Basis::hadamard, 1, TimeBin::t_half, Path::regular)),
      exact(encode_pulse(Basis::computational, 0, 3, TimeBin::t_half, Path::regular)),
      {Incident(MacroPulse::polarized(Basis::computational, 1, 1500,
                                      {TimeBin::t_half, Path::regular}, 60)),
       "", 0},
  };
  for (std::string_view name : {"blindable", "passive"}) {
    for (const auto& c : cases) {
      const auto e = classify_response(receiver(name), c);
      const auto m = classify_response(receiver(name), c, {.exact = false, .trials = 20'000});
      for (Basis b : kBases) {
        for (std::size_t k = 0; k < kResponseClassCount; ++k) {
          const double se = m.in(b).std_error[k];
          EXPECT_NEAR(m.in(b).probability[k], e.in(b).probability[k], std::max(4 * se, 0.02))
              << name << " " << c.incident.describe();
        }
      }
    }
  }
}

TEST(ReverseTest, ComputationalZeroOnActiveReceiver) {
  const auto s = reverse_bob_unitary(receiver("blindable"), {Basis::computational, 0});
  ASSERT_TRUE(s);
  const ModeId h{TimeBin::t_half, Path::regular, Polarization::H};
  EXPECT_NEAR(std::abs(s->amplitude({{h, 1}})), 1.0, kTol);
}

TEST(ReverseTest, HadamardOneGivesMinus) {
  const auto s = reverse_bob_unitary(receiver("blindable"), {Basis::hadamard, 1});
  ASSERT_TRUE(s);
  const PureState minus = encode_qubit(Basis::hadamard, 1, TimeBin::t_half, Path::regular);
  EXPECT_NEAR(std::abs(inner_product(minus, *s)), 1.0, kTol);
}

TEST(ReverseTest, RoundTripThroughTheOptics) {
  for (std::string_view name : {"blindable", "compromised"}) {
    const ReceiverConfig r = receiver(name);
    for (Basis b : kBases) {
      for (Bit bit : {Bit{0}, Bit{1}}) {
        const auto s = reverse_bob_unitary(r, {b, bit});
        ASSERT_TRUE(s) << name;
        const PureState out = qkdsim::apply(*s, receiver_optics(r, b));
        const ModeId target = detector_mode(r, b, bit, TimeBin::t_half);
        EXPECT_NEAR(std::abs(out.amplitude({{target, 1}})), 1.0, kTol) << name;
      }
    }
  }
}

TEST(ReverseTest, GatedOffDetectorHasNoPreimage) {
  EXPECT_FALSE(reverse_bob_unitary(receiver("blindable"), {Basis::computational, 0, TimeBin::t0}));
  EXPECT_FALSE(reverse_bob_unitary(receiver("gated"), {Basis::hadamard, 0, TimeBin::t0}));
  // Open at t0, but the intact receiver still hides the blocked port.
  EXPECT_FALSE(reverse_bob_unitary(receiver("gated"), {Basis::computational, 0, TimeBin::t0}));
  ReceiverConfig opened = receiver("gated");
  opened.compromised = true;
  EXPECT_TRUE(reverse_bob_unitary(opened, {Basis::computational, 0, TimeBin::t0}));
  EXPECT_FALSE(reverse_bob_unitary(opened, {Basis::hadamard, 0, TimeBin::t0}));
}

TEST(ReverseTest, IntactPassiveReceiverNeedsTheBlockedPort) {
  EXPECT_FALSE(reverse_bob_unitary(receiver("passive"), {Basis::computational, 0}));
  EXPECT_TRUE(reverse_bob_unitary(receiver("compromised"), {Basis::computational, 0}));
}

std::vector<CandidateIncident> space(const ReceiverConfig& r) {
  const ThresholdEstimate e = probe_thresholds(model_detector_factory(r.detectors.front()),
                                               2'000'000);
  return enumerate_protocol_space(bounds_for(r, kDefaultMaxPhotons, e));
}

TEST(SynthesisTest, IdealReceiverHasNoFakedStates) {
  const ReceiverConfig r = receiver("ideal");
  const auto exact_only = enumerate_protocol_space(bounds_for(r, kDefaultMaxPhotons));
  EXPECT_EQ(exact_only.size(), 216u);
  EXPECT_FALSE(synthesize_faked_states(r, exact_only));
  EXPECT_FALSE(synthesize_faked_states(r, space(r)));
}

TEST(SynthesisTest, GatedReceiverRecipeIsExact) {
  const ReceiverConfig r = receiver("gated");
  const auto recipe = synthesize_faked_states(r, space(r));
  ASSERT_TRUE(recipe);
  for (const RecipeEntry& e : recipe->entries) {
    EXPECT_TRUE(e.candidate.incident.exact()) << e.candidate.label;
    EXPECT_TRUE(accepts(e.profile, e.eve_basis, e.eve_bit, 0.0, InvalidPolicy::as_error));
  }
  EXPECT_EQ(recipe->background, 0.0);
  EXPECT_NEAR(recipe->loss_rate, 0.5, kTol);

  const RunReport v = verify_recipe(r, *recipe, 20'000, 3);
  EXPECT_EQ(*v.qber, 0.0);
  EXPECT_EQ(v.eve_info, 1.0);
  EXPECT_NEAR(v.loss_rate, 0.5, 0.015);
}

TEST(SynthesisTest, BlindableReceiverRediscoversBrightIllumination) {
  const ReceiverConfig r = receiver("blindable");
  const auto recipe = synthesize_faked_states(r, space(r));
  ASSERT_TRUE(recipe);
  EXPECT_GE(recipe->background, 50.0);
  for (const RecipeEntry& e : recipe->entries) {
    ASSERT_FALSE(e.candidate.incident.exact());
    const double k = e.candidate.incident.macro().total_intensity();
    EXPECT_GE(k, 1000.0);
    EXPECT_LT(k / 2, 1000.0);
  }
  const RunReport v = verify_recipe(r, *recipe, 20'000, 4);
  EXPECT_EQ(*v.qber, 0.0);
  EXPECT_EQ(v.eve_info, 1.0);
  EXPECT_FALSE(v.burned);
}

TEST(SynthesisTest, EpsilonMustBeBelowHalf) {
  const ReceiverConfig r = receiver("gated");
  const auto c = enumerate_protocol_space(bounds_for(r, 1));
  EXPECT_THROW(synthesize_faked_states(r, c, {.epsilon = 0.5, .policy = InvalidPolicy::as_error, .classify = {}}), UsageError);
}

TEST(AnalyzeReceiverTest, ReportsEveryPreimage) {
  AnalysisOptions o;
  o.verify_rounds = 2'000;
  const AnalysisReport rep = analyze_receiver("gated", receiver("gated"), o);
  EXPECT_EQ(rep.preimages.size(), 12u);
  ASSERT_TRUE(rep.thresholds);
  ASSERT_TRUE(rep.recipe);
  ASSERT_TRUE(rep.verification);
  EXPECT_EQ(*rep.verification->qber, 0.0);
}

}  // namespace
}  // namespace qkdsim
