#include <cmath>

#include <gtest/gtest.h>

#include "qkdsim/errors.hpp"
#include "qkdsim/protocol.hpp"

namespace qkdsim {
namespace {

constexpr auto kClick = DetectorOutcome::click;
constexpr auto kNone = DetectorOutcome::no_click;
constexpr auto kBurned = DetectorOutcome::burned;

ClickPattern clicks(DetectorOutcome b0, DetectorOutcome b1, bool other_arm = false) {
  ClickPattern p;
  p.bit0 = b0;
  p.bit1 = b1;
  p.other_arm_click = other_arm;
  return p;
}

TEST(ClassifyOutcomeTest, Table) {
  for (InvalidPolicy policy : {InvalidPolicy::as_error, InvalidPolicy::as_loss}) {
    const OutcomeClass invalid =
        policy == InvalidPolicy::as_error ? OutcomeClass::invalid() : OutcomeClass::loss();
    EXPECT_EQ(classify_outcome(clicks(kNone, kNone), policy), OutcomeClass::loss());
    EXPECT_EQ(classify_outcome(clicks(kClick, kNone), policy), OutcomeClass::valid(0));
    EXPECT_EQ(classify_outcome(clicks(kNone, kClick), policy), OutcomeClass::valid(1));
    EXPECT_EQ(classify_outcome(clicks(kClick, kClick), policy), invalid);
    EXPECT_EQ(classify_outcome(clicks(kClick, kNone, true), policy), invalid);
    EXPECT_EQ(classify_outcome(clicks(kBurned, kBurned), policy), OutcomeClass::loss());
    EXPECT_EQ(classify_outcome(clicks(kBurned, kClick), policy), OutcomeClass::valid(1));
  }
}

RoundRecord record(Basis alice, Basis bob, Bit alice_bit, OutcomeClass outcome, Bit bob_bit = 0) {
  RoundRecord r;
  r.alice_basis = alice;
  r.bob_basis = bob;
  r.alice_bit = alice_bit;
  r.outcome = outcome;
  r.bob_bit = bob_bit;
  return r;
}

TEST(SiftTest, KeepsMatchedValidAndFlaggedInvalid) {
  constexpr auto kZ = Basis::computational;
  constexpr auto kX = Basis::hadamard;
  const std::vector<RoundRecord> records{
      record(kZ, kZ, 0, OutcomeClass::valid(0)),
      record(kZ, kX, 1, OutcomeClass::valid(1)),
      record(kX, kX, 1, OutcomeClass::loss()),
      record(kX, kX, 1, OutcomeClass::invalid(), 1),
      record(kX, kX, 0, OutcomeClass::valid(1)),
  };
  const auto sifted = sift(records);
  ASSERT_EQ(sifted.size(), 3u);
  EXPECT_EQ(sifted[0].round, 0u);
  EXPECT_FALSE(sifted[0].mismatched());
  EXPECT_EQ(sifted[1].round, 3u);
  EXPECT_TRUE(sifted[1].flagged_error);
  EXPECT_TRUE(sifted[1].mismatched()) << "an invalid round is an error even if the coin agrees";
  EXPECT_TRUE(sifted[2].mismatched());
}

std::vector<SiftedPair> pairs(std::size_t n, std::size_t errors) {
  std::vector<SiftedPair> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({0, static_cast<Bit>(i < errors), false, i});
  return out;
}

TEST(EstimateQberTest, SampleSizeRoundsUp) {
  Rng rng(1);
  const QberEstimate e = estimate_qber(pairs(7, 0), 0.5, rng);
  EXPECT_EQ(e.sample_size, 4u);
  EXPECT_EQ(e.remaining.size(), 3u);
  ASSERT_TRUE(e.qber);
  EXPECT_EQ(*e.qber, 0.0);
}

TEST(EstimateQberTest, AllErrorsGivesOne) {
  Rng rng(2);
  const QberEstimate e = estimate_qber(pairs(10, 10), 0.3, rng);
  EXPECT_EQ(e.sample_size, 3u);
  EXPECT_EQ(*e.qber, 1.0);
}

TEST(EstimateQberTest, EmptyKeyHasNoQber) {
  Rng rng(3);
  const QberEstimate e = estimate_qber({}, 0.5, rng);
  EXPECT_FALSE(e.qber);
  EXPECT_EQ(e.sample_size, 0u);
}

TEST(EstimateQberTest, RemainingKeepsRoundOrder) {
  Rng rng(4);
  const QberEstimate e = estimate_qber(pairs(100, 0), 0.5, rng);
  for (std::size_t i = 1; i < e.remaining.size(); ++i) {
    EXPECT_LT(e.remaining[i - 1].round, e.remaining[i].round);
  }
}

void expect_config_error(const RunConfig& c, const std::string& fragment) {
  try {
    c.validate();
    FAIL() << "expected ConfigError mentioning " << fragment;
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
  }
}

TEST(RunConfigTest, ValidateNamesTheField) {
  RunConfig c;
  c.abort_qber = 1.5;
  expect_config_error(c, "abort_qber must lie in [0,1]");
  c = {};
  c.rounds = 0;
  expect_config_error(c, "rounds");
  c = {};
  c.test_fraction = 1.0;
  expect_config_error(c, "test_fraction");
  c = {};
  c.source.multi_photon_prob = -0.1;
  expect_config_error(c, "multi_photon_prob");
  c = {};
  c.channel_loss = 1.0;
  expect_config_error(c, "channel_loss");
  c = {};
  c.receiver.detectors[0].n1 = 5000;
  expect_config_error(c, "receiver:");
}

TEST(AlicePrepareTest, StatesMatchTheirLabels) {
  Rng rng(5);
  for (int i = 0; i < 50; ++i) {
    const Emission e = alice_prepare({}, rng);
    EXPECT_EQ(e.photons, 1u);
    EXPECT_LT(distance_up_to_phase(e.state, encode_qubit(e.basis, e.bit, kAlicePulse.time,
                                                         kAlicePulse.path)),
              1e-12);
  }
}

TEST(AlicePrepareTest, MultiPhotonFraction) {
  Rng rng(6);
  constexpr int kTrials = 20'000;
  int two = 0;
  for (int i = 0; i < kTrials; ++i) {
    const Emission e = alice_prepare({0.1}, rng);
    if (e.photons == 2) {
      ++two;
      EXPECT_EQ(e.state.max_photons(), 2u);
    }
  }
  EXPECT_NEAR(two / static_cast<double>(kTrials), 0.1, 0.01);
}

RunConfig small(AttackSpec attack = attack::None{}) {
  RunConfig c;
  c.rounds = 20'000;
  c.seed = 11;
  c.attack = attack;
  return c;
}

TEST(RunTest, DeterministicForFixedSeed) {
  for (const AttackSpec& a : {AttackSpec{attack::None{}}, AttackSpec{attack::InterceptResend{}}}) {
    EXPECT_EQ(run(small(a)), run(small(a)));
  }
  RunConfig other = small();
  other.seed = 12;
  EXPECT_NE(run(small()).sifted_key_length, run(other).sifted_key_length);
}

TEST(RunTest, NoAttackIsSound) {
  const RunReport r = run(small());
  ASSERT_TRUE(r.qber);
  EXPECT_EQ(*r.qber, 0.0);
  EXPECT_EQ(r.loss_rate, 0.0);
  EXPECT_FALSE(r.aborted);
  EXPECT_NEAR(r.sifted_key_length / 20'000.0, 0.5, 0.02);
}

TEST(RunTest, AccountingAddsUp) {
  RunConfig c = small(attack::TrojanPony{2});
  c.invalid_policy = InvalidPolicy::as_error;
  const RunResult res = run_detailed(c, {.keep_records = true, .bob_seed = std::nullopt});
  const RunReport& r = res.report;
  EXPECT_EQ(res.records.size(), c.rounds);
  EXPECT_EQ(r.valid_rounds + r.loss_rounds + r.invalid_rounds, r.matched_rounds);
  EXPECT_EQ(r.sifted_key_length, r.valid_rounds + r.invalid_rounds);
  EXPECT_EQ(r.test_sample_size + r.final_key_length, r.sifted_key_length);
  EXPECT_EQ(r.test_sample_size,
            static_cast<std::size_t>(std::ceil(c.test_fraction * r.sifted_key_length)));
  EXPECT_DOUBLE_EQ(r.loss_rate, r.loss_rounds / static_cast<double>(r.matched_rounds));
  EXPECT_DOUBLE_EQ(r.invalid_rate, r.invalid_rounds / static_cast<double>(r.matched_rounds));
}

TEST(RunTest, ChannelLossShowsUpAsLoss) {
  RunConfig c = small();
  c.channel_loss = 0.3;
  EXPECT_NEAR(run(c).loss_rate, 0.3, 0.015);
}

TEST(RunTest, AbortsOnHighQber) {
  const RunReport r = run(small(attack::InterceptResend{}));
  EXPECT_TRUE(r.aborted);
  EXPECT_EQ(r.final_key_length, r.sifted_key_length - r.test_sample_size);
}

// Eve must not be able to see Bob's private randomness: re-seeding Bob leaves
// every incident she delivers unchanged.
TEST(RunTest, EveIsIndependentOfBobsRandomness) {
  for (const AttackSpec& a :
       {AttackSpec{attack::InterceptResend{}}, AttackSpec{attack::TrojanPony{20}}}) {
    RunConfig c = small(a);
    c.rounds = 2'000;
    const RunResult first = run_detailed(c, {.keep_records = true, .bob_seed = std::nullopt});
    const RunResult second = run_detailed(c, {.keep_records = true, .bob_seed = 987654321});
    std::size_t bob_differs = 0;
    for (std::size_t i = 0; i < first.records.size(); ++i) {
      ASSERT_EQ(first.records[i].delivered, second.records[i].delivered) << "round " << i;
      bob_differs += first.records[i].bob_basis != second.records[i].bob_basis ? 1 : 0;
    }
    EXPECT_GT(bob_differs, 500u);
  }
}

TEST(RunTest, ConfigErrorsSurfaceBeforeRunning) {
  RunConfig c = small();
  c.test_fraction = 0.0;
  EXPECT_THROW(run(c), ConfigError);
}

}  // namespace
}  // namespace qkdsim
