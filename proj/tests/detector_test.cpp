#include <random>

#include <gtest/gtest.h>

#include "qkdsim/detector.hpp"
#include "qkdsim/errors.hpp"

namespace qkdsim {
namespace {

Arrivals at(TimeBin t, double n) {
  Arrivals a = kNoArrivals;
  a[static_cast<std::size_t>(t)] = n;
  return a;
}

const DetectorModel kDefault{};

TEST(DetectorRespondTest, OnePhotonInGateClicks) {
  EXPECT_EQ(detector_respond(kDefault, at(TimeBin::t_half, 1), 0), DetectorOutcome::click);
}

TEST(DetectorRespondTest, NothingInGateDoesNotClick) {
  EXPECT_EQ(detector_respond(kDefault, kNoArrivals, 0), DetectorOutcome::no_click);
}

TEST(DetectorRespondTest, BlindedDetectorNeedsLinearThreshold) {
  const double bg = static_cast<double>(kDefault.n1);
  const auto l = static_cast<double>(kDefault.linear_threshold);
  EXPECT_EQ(detector_respond(kDefault, at(TimeBin::t_half, l), bg), DetectorOutcome::click);
  EXPECT_EQ(detector_respond(kDefault, at(TimeBin::t_half, std::ceil(l / 2)), bg),
            DetectorOutcome::no_click);
  EXPECT_EQ(detector_respond(kDefault, at(TimeBin::t_half, 1), bg), DetectorOutcome::no_click);
}

TEST(DetectorRespondTest, PhotonOutsideGateIsIgnored) {
  EXPECT_EQ(detector_respond(kDefault, at(TimeBin::t0, 1), 0), DetectorOutcome::no_click);
  EXPECT_EQ(detector_respond(kDefault, at(TimeBin::t1, 1e9), 0), DetectorOutcome::no_click);
}

TEST(DetectorRespondTest, DamageThresholdBurns) {
  EXPECT_EQ(detector_respond(kDefault, at(TimeBin::t_half, static_cast<double>(kDefault.n2)), 0),
            DetectorOutcome::burned);
  EXPECT_EQ(detector_respond(kDefault, at(TimeBin::t_half, 1),
                             static_cast<double>(kDefault.n2) - 1),
            DetectorOutcome::burned);
}

TEST(DetectorModelTest, ValidateNamesTheBrokenInequality) {
  DetectorModel m;
  m.linear_threshold = m.n1;
  try {
    m.validate();
    FAIL() << "expected UsageError";
  } catch (const UsageError& e) {
    EXPECT_NE(std::string(e.what()).find("n1 < linear_threshold"), std::string::npos);
  }
  m = {};
  m.n2 = m.linear_threshold - 1;
  EXPECT_THROW(m.validate(), UsageError);
  m = {};
  m.gate_open = TimeBin::t1;
  m.gate_close = TimeBin::t0;
  EXPECT_THROW(m.validate(), UsageError);
}

TEST(DetectorTest, BurnedIsAbsorbing) {
  Detector d(kDefault);
  EXPECT_EQ(d.respond(at(TimeBin::t_half, 2e6), 0), DetectorOutcome::burned);
  EXPECT_TRUE(d.burned());
  EXPECT_EQ(d.respond(kNoArrivals, 0), DetectorOutcome::burned);
  EXPECT_EQ(d.respond(at(TimeBin::t_half, 1), 0), DetectorOutcome::burned);
}

class DetectorFuzz : public ::testing::Test {
 protected:
  std::mt19937_64 gen{99};
  std::uniform_int_distribution<int> bin{0, 2};
  std::uniform_real_distribution<double> unit{0.0, 1.0};

  DetectorModel random_model() {
    DetectorModel m;
    const auto a = static_cast<TimeBin>(bin(gen));
    const auto b = static_cast<TimeBin>(bin(gen));
    m.gate_open = std::min(a, b);
    m.gate_close = std::max(a, b);
    return m;
  }
  Arrivals random_arrivals(double scale) {
    return {std::floor(unit(gen) * scale), std::floor(unit(gen) * scale),
            std::floor(unit(gen) * scale)};
  }
};

TEST_F(DetectorFuzz, PhotonsOutsideTheGateNeverMatter) {
  for (int i = 0; i < 2000; ++i) {
    const DetectorModel m = random_model();
    const Arrivals a = random_arrivals(unit(gen) < 0.5 ? 3 : 5000);
    const double bg = unit(gen) < 0.5 ? 0.0 : 100.0;
    Arrivals more = a;
    for (TimeBin t : kAllTimeBins) {
      if (!m.in_gate(t)) more[static_cast<std::size_t>(t)] += std::floor(unit(gen) * 1e7);
    }
    EXPECT_EQ(detector_respond(m, a, bg), detector_respond(m, more, bg));
  }
}

TEST_F(DetectorFuzz, BelowBlindingItIsAnIdealThresholdDetector) {
  for (int i = 0; i < 2000; ++i) {
    const DetectorModel m = random_model();
    const Arrivals a = random_arrivals(3);
    const double bg = std::floor(unit(gen) * static_cast<double>(m.n1));
    double gated = bg;
    for (TimeBin t : kAllTimeBins) {
      if (m.in_gate(t)) gated += a[static_cast<std::size_t>(t)];
    }
    EXPECT_EQ(detector_respond(m, a, bg),
              gated >= 1 ? DetectorOutcome::click : DetectorOutcome::no_click);
  }
}

TEST_F(DetectorFuzz, BlindedResponseDependsOnlyOnLargestPulse) {
  for (int i = 0; i < 2000; ++i) {
    const DetectorModel m = random_model();
    const Arrivals a = random_arrivals(2000);
    const double bg = 50 + std::floor(unit(gen) * 1000);
    double largest = 0;
    for (TimeBin t : kAllTimeBins) {
      if (m.in_gate(t)) largest = std::max(largest, a[static_cast<std::size_t>(t)]);
    }
    const auto expected = largest >= static_cast<double>(m.linear_threshold)
                              ? DetectorOutcome::click
                              : DetectorOutcome::no_click;
    EXPECT_EQ(detector_respond(m, a, bg), expected);
  }
}

}  // namespace
}  // namespace qkdsim
