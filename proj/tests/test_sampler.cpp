#include <gtest/gtest.h>

#include <map>
#include <random>

#include "bevodom/io/synth.hpp"
#include "bevodom/sampler.hpp"

namespace bevodom {
namespace {

FrameIndex frame(std::int64_t id, double t, double yaw_deg, double x, double y) {
  return {id, t, pose2_to_pose3(Pose2(deg_to_rad(yaw_deg), x, y))};
}

std::vector<FrameIndex> frames_from(const Trajectory& traj) {
  std::vector<FrameIndex> out;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    out.push_back({std::int64_t(i), traj[i].timestamp, traj[i].pose});
  }
  return out;
}

Trajectory figure_eight() {
  io::SynthSpec spec;
  spec.rate_hz = 5.0;
  const double circle_s = 2.0 * kPi * 10.0 / 2.0;  // radius 10 m at 2 m/s
  for (int lap = 0; lap < 2; ++lap) {
    spec.primitives.push_back({io::MotionPrimitive::Kind::arc, circle_s, 2.0, 10.0});
    spec.primitives.push_back({io::MotionPrimitive::Kind::arc, circle_s, 2.0, -10.0});
  }
  return io::synth_trajectory(spec).first;
}

TEST(ClassifyPair, Examples) {
  EXPECT_EQ(classify_pair(30.0, 3.0), PairClass::high);
  EXPECT_EQ(classify_pair(10.0, 3.0), PairClass::standard);
  EXPECT_EQ(classify_pair(30.0, 5.0), PairClass::discarded);
  EXPECT_EQ(classify_pair(5.0, 5.0), PairClass::discarded);
  EXPECT_EQ(classify_pair(50.0, 1.0), PairClass::discarded);
}

TEST(ClassifyPair, InclusiveBoundaries) {
  EXPECT_EQ(classify_pair(15.0, 1.0), PairClass::high);
  EXPECT_EQ(classify_pair(45.0, 1.0), PairClass::high);
  EXPECT_EQ(classify_pair(14.999999, 1.0), PairClass::standard);
  EXPECT_EQ(classify_pair(45.000001, 1.0), PairClass::discarded);
  EXPECT_EQ(classify_pair(10.0, 4.0), PairClass::standard);
  EXPECT_EQ(classify_pair(10.0, 4.000001), PairClass::discarded);
}

TEST(BuildPairLists, ClassifiesHandBuiltPairs) {
  // Anchor 0 at the origin; partners placed so that relative yaw and planar
  // displacement are known.
  const std::vector<FrameIndex> seq = {
      frame(0, 0.0, 0.0, 0.0, 0.0),
      frame(1, 10.0, 30.0, 3.0, 0.0),   // high
      frame(2, 20.0, 10.0, 0.0, 3.0),   // standard
      frame(3, 30.0, 20.0, 5.0, 0.0),   // too far
      frame(4, 100.0, 0.0, 0.5, 0.0),   // outside the window of anchor 0
  };
  const auto lists = build_pair_lists(seq);
  ASSERT_EQ(lists.size(), 5u);
  const PairLists& a0 = lists[0].lists;
  ASSERT_EQ(a0.high.size(), 1u);
  EXPECT_EQ(a0.high[0].partner_id, 1);
  EXPECT_NEAR(a0.high[0].yaw_diff_deg, 30.0, 1e-9);
  EXPECT_NEAR(a0.high[0].displacement_m, 3.0, 1e-12);
  ASSERT_EQ(a0.standard.size(), 1u);
  EXPECT_EQ(a0.standard[0].partner_id, 2);

  // Reverse ordering is kept under the partner's anchor.
  const PairLists& a1 = lists[1].lists;
  bool has_reverse = false;
  for (const auto& r : a1.high) has_reverse = has_reverse || r.partner_id == 0;
  EXPECT_TRUE(has_reverse);
}

TEST(BuildPairLists, EmptySequence) {
  EXPECT_TRUE(build_pair_lists({}).empty());
}

TEST(BuildPairLists, FigureEightRespectsThresholdsAndPartition) {
  const auto anchors = build_pair_lists(frames_from(figure_eight()));
  std::size_t high = 0;
  for (const auto& a : anchors) {
    std::map<std::int64_t, int> seen;
    for (const auto& r : a.lists.high) {
      EXPECT_GE(r.yaw_diff_deg, 15.0);
      EXPECT_LE(r.yaw_diff_deg, 45.0);
      EXPECT_LE(r.displacement_m, 4.0);
      EXPECT_NE(r.anchor_id, r.partner_id);
      ++seen[r.partner_id];
    }
    for (const auto& r : a.lists.standard) {
      EXPECT_LT(r.yaw_diff_deg, 15.0);
      EXPECT_LE(r.displacement_m, 4.0);
      ++seen[r.partner_id];
    }
    for (const auto& [_, n] : seen) EXPECT_EQ(n, 1);
    high += a.lists.high.size();
  }
  EXPECT_GT(high, 0u);
}

TEST(SamplePair, HighFractionNearSeventyPercent) {
  const PairLists all = merge_pair_lists(build_pair_lists(frames_from(figure_eight())));
  ASSERT_FALSE(all.high.empty());
  ASSERT_FALSE(all.standard.empty());
  SamplerRng rng(2024);
  int high = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const PairRecord r = sample_pair(all, rng);
    high += r.yaw_diff_deg >= 15.0;
  }
  const double frac = double(high) / n;
  EXPECT_GE(frac, 0.69);
  EXPECT_LE(frac, 0.71);
}

TEST(SamplePair, FallbackAndErrors) {
  PairLists only_standard;
  only_standard.standard.push_back({1, 2, 5.0, 1.0});
  SamplerRng rng(1);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sample_pair(only_standard, rng).partner_id, 2);
  PairLists only_high;
  only_high.high.push_back({1, 3, 20.0, 1.0});
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sample_pair(only_high, rng).partner_id, 3);
  EXPECT_THROW(sample_pair(PairLists{}, rng), NoPairsError);
}

TEST(SamplePair, SingleElementListsNeverInvent) {
  PairLists l;
  l.high.push_back({1, 2, 20.0, 1.0});
  l.standard.push_back({1, 3, 5.0, 2.0});
  SamplerRng rng(9);
  for (int i = 0; i < 1000; ++i) {
    const PairRecord r = sample_pair(l, rng);
    EXPECT_TRUE(r == l.high[0] || r == l.standard[0]);
  }
}

TEST(SamplePair, DeterministicForSeed) {
  PairLists l;
  for (int i = 0; i < 50; ++i) {
    l.high.push_back({0, i, 20.0, 1.0});
    l.standard.push_back({0, 100 + i, 5.0, 1.0});
  }
  SamplerRng a(77), b(77);
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(sample_pair(l, a), sample_pair(l, b));
}

TEST(SamplingStats, IdenticalRecordsFillOneBin) {
  const std::vector<PairRecord> log(40, PairRecord{0, 1, 22.0, 1.5});
  const SamplingStats s = sampling_stats(log);
  int nonzero = 0;
  for (auto c : s.yaw_deg.counts) nonzero += c > 0;
  EXPECT_EQ(nonzero, 1);
  EXPECT_EQ(s.yaw_deg.total(), 40u);
  EXPECT_EQ(s.displacement_m.total(), 40u);
  EXPECT_THROW(sampling_stats({}), Error);
}

TEST(SamplingStats, UniformYawIsFlat) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 45.0);
  std::vector<PairRecord> log;
  const int n = 90000;
  for (int i = 0; i < n; ++i) log.push_back({0, 1, u(rng), 1.0});
  const SamplingStats s = sampling_stats(log, linear_edges(0, 45, 9));
  EXPECT_EQ(s.yaw_deg.total(), std::size_t(n));
  const double expected = n / 9.0;
  double chi2 = 0.0;
  for (auto c : s.yaw_deg.counts) chi2 += (c - expected) * (c - expected) / expected;
  // 8 degrees of freedom; the 99.9% quantile is 26.1.
  EXPECT_LT(chi2, 26.1);
}

TEST(Histogram, EdgesAndOverflow) {
  const Histogram h = make_histogram({-1, 0, 0.5, 1, 2, 3}, {0, 1, 2});
  EXPECT_EQ(h.underflow, 1u);
  EXPECT_EQ(h.overflow, 1u);
  EXPECT_EQ(h.counts, (std::vector<std::size_t>{2, 2}));
  EXPECT_THROW(make_histogram({1}, {0}), Error);
}

TEST(PairsCsv, Header) {
  const std::string csv = pairs_to_csv({{3, 4, 20.5, 1.25}});
  EXPECT_EQ(csv, "anchor_id,partner_id,yaw_diff_deg,displacement_m\n3,4,20.5,1.25\n");
}

}  // namespace
}  // namespace bevodom
