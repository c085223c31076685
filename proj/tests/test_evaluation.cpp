#include <gtest/gtest.h>

#include <random>

#include "bevodom/evaluation.hpp"
#include "bevodom/io/synth.hpp"
#include "oracles.hpp"

namespace bevodom {
namespace {

Trajectory random_walk(std::mt19937_64& rng, std::size_t n, double step = 1.0) {
  std::normal_distribution<double> g(0.0, 1.0);
  Trajectory t;
  Vector3d p = Vector3d::Zero();
  double yaw = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    t.push_back(double(i), Pose3::from_rt(rot_z(yaw) * Eigen::AngleAxisd(0.05 * g(rng), Vector3d::UnitX()).toRotationMatrix(), p));
    yaw += 0.1 * g(rng);
    p += step * Vector3d(std::cos(yaw), std::sin(yaw), 0.1 * g(rng));
  }
  return t;
}

Trajectory perturb(const Trajectory& t, std::mt19937_64& rng, double sigma) {
  std::normal_distribution<double> g(0.0, sigma);
  Trajectory out;
  for (const auto& e : t.entries) {
    const Matrix3d r = e.pose.rotation() * Eigen::AngleAxisd(g(rng), Vector3d::UnitZ()).toRotationMatrix();
    out.push_back(e.timestamp, Pose3::from_rt(r, e.pose.translation() + Vector3d(g(rng), g(rng), g(rng))));
  }
  return out;
}

Trajectory similarity_transform(const Trajectory& t, const Pose3& g, double s) {
  return transform_trajectory(scale_trajectory(t, s), g);
}

io::SynthSpec straight_line(double length_m, double drift) {
  io::SynthSpec spec;
  spec.rate_hz = 10.0;
  spec.primitives.push_back({io::MotionPrimitive::Kind::straight, length_m / 10.0, 10.0, 0.0});
  spec.scale_drift = drift;
  return spec;
}

TEST(Align, IdentityOnEqualTrajectories) {
  std::mt19937_64 rng(1);
  const Trajectory gt = random_walk(rng, 50);
  const AlignmentResult a = align(gt, gt, AlignMode::se3);
  EXPECT_LT((a.rotation - Matrix3d::Identity()).norm(), 1e-12);
  EXPECT_LT(a.translation.norm(), 1e-9);
  EXPECT_EQ(a.scale, 1.0);
  EXPECT_LT(ate(gt, gt, AlignMode::se3), 1e-9);
}

TEST(Align, HalfScaleRecoveredAsTwo) {
  std::mt19937_64 rng(2);
  const Trajectory gt = random_walk(rng, 60);
  const Trajectory est = scale_trajectory(gt, 0.5);
  const AlignmentResult a = align(est, gt, AlignMode::sim3);
  EXPECT_NEAR(a.scale, 2.0, 1e-12);
  EXPECT_LT(ate(est, gt, AlignMode::sim3), 1e-9);
}

TEST(Align, RecoversInverseRigidTransform) {
  std::mt19937_64 rng(3);
  const Trajectory gt = random_walk(rng, 80);
  const Pose3 g = Pose3::from_rt(rot_z(deg_to_rad(30.0)), Vector3d(1, 2, 0));
  const Trajectory est = transform_trajectory(gt, g);
  const AlignmentResult a = align(est, gt, AlignMode::se3);
  const Pose3 ginv = g.inverse();
  EXPECT_LT((a.rotation - ginv.rotation()).norm(), 1e-9);
  EXPECT_LT((a.translation - ginv.translation()).norm(), 1e-9);
  EXPECT_LT(ate(est, gt, AlignMode::se3), 1e-9);
}

TEST(Align, Errors) {
  std::mt19937_64 rng(4);
  const Trajectory gt = random_walk(rng, 10);
  Trajectory shorter = gt;
  shorter.entries.pop_back();
  EXPECT_THROW(align(shorter, gt, AlignMode::se3), Error);
  Trajectory line;
  for (int i = 0; i < 10; ++i) line.push_back(i, Pose3::from_translation(Vector3d(i, 0, 0)));
  EXPECT_THROW(align(line, line, AlignMode::se3), DegenerateGeometryError);
  Trajectory two;
  two.entries.assign(gt.entries.begin(), gt.entries.begin() + 2);
  EXPECT_THROW(align(two, two, AlignMode::sim3), DegenerateGeometryError);
}

TEST(Ate, ConstantOffsetAbsorbed) {
  std::mt19937_64 rng(5);
  const Trajectory gt = random_walk(rng, 40);
  const Trajectory est = transform_trajectory(gt, Pose3::from_translation(Vector3d(3, -4, 1)));
  EXPECT_LT(ate(est, gt, AlignMode::se3), 1e-9);
}

TEST(Ate, SinglePointPerturbationMatchesBruteForce) {
  std::mt19937_64 rng(6);
  const Trajectory gt = random_walk(rng, 30);
  Trajectory est = gt;
  est.entries[7].pose = Pose3::from_rt(gt[7].pose.rotation(), gt[7].pose.translation() + Vector3d(1, 0, 0));
  const AlignmentResult a = align(est, gt, AlignMode::se3);
  double sq = 0.0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    sq += (a.rotation * est.position(i) + a.translation - gt.position(i)).squaredNorm();
  }
  const double brute = std::sqrt(sq / gt.size());
  EXPECT_NEAR(ate(est, gt, AlignMode::se3), brute, 1e-12);
  // Re-alignment can only reduce the residual of the unaligned perturbation.
  EXPECT_LE(brute, std::sqrt(1.0 / gt.size()) + 1e-12);
  EXPECT_GT(brute, 0.0);
}

TEST(Ate, InvariantToRigidAndSimilarityTransforms) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Trajectory gt = random_walk(rng, 100);
    const Trajectory est = perturb(gt, rng, 0.3);
    const Pose3 g = testing::random_pose3(rng, 50.0);
    const double base_se3 = ate(est, gt, AlignMode::se3);
    const double base_sim3 = ate(est, gt, AlignMode::sim3);
    EXPECT_NEAR(ate(transform_trajectory(est, g), gt, AlignMode::se3), base_se3, 1e-9);
    EXPECT_NEAR(ate(similarity_transform(est, g, 3.7), gt, AlignMode::sim3), base_sim3, 1e-9);
    EXPECT_LE(base_sim3, base_se3 + 1e-9);
  }
}

TEST(RteRre, ZeroOnEqualTrajectories) {
  const Trajectory gt = io::synth_trajectory(straight_line(900.0, 1.0)).first;
  const RelativeErrorReport r = rte_rre(gt, gt, default_segment_lengths());
  EXPECT_EQ(r.per_length.size(), 8u);
  EXPECT_EQ(r.rte_percent, 0.0);
  EXPECT_EQ(r.rre_deg_per_100m, 0.0);
}

TEST(RteRre, UniformScaleGivesFivePercent) {
  const Trajectory gt = io::synth_trajectory(straight_line(1000.0, 1.0)).first;
  const Trajectory est = scale_trajectory(gt, 1.05);
  const RelativeErrorReport r = rte_rre(est, gt, default_segment_lengths());
  ASSERT_EQ(r.per_length.size(), 8u);
  for (const auto& l : r.per_length) EXPECT_NEAR(l.rte_percent, 5.0, 1e-9) << l.length_m;
  EXPECT_NEAR(r.rte_percent, 5.0, 1e-9);
}

TEST(RteRre, MatchesDoubleLoopOracleExactly) {
  std::mt19937_64 rng(8);
  const Trajectory gt = random_walk(rng, 1200);
  const Trajectory est = perturb(gt, rng, 0.05);
  const RelativeErrorReport r = rte_rre(est, gt, default_segment_lengths());
  const testing::OracleRelative o = testing::brute_rte_rre(est, gt, default_segment_lengths());
  ASSERT_EQ(r.per_length.size(), o.rte.size());
  for (std::size_t k = 0; k < o.rte.size(); ++k) {
    EXPECT_EQ(r.per_length[k].rte_percent, o.rte[k]);
    EXPECT_EQ(r.per_length[k].rre_deg_per_100m, o.rre[k]);
    EXPECT_EQ(r.per_length[k].segments, o.counts[k]);
  }
}

TEST(RteRre, InvariantToGlobalRigidTransformOfEstimate) {
  std::mt19937_64 rng(9);
  const Trajectory gt = random_walk(rng, 400);
  const Trajectory est = perturb(gt, rng, 0.05);
  const std::vector<double> lengths = {50, 100, 200};
  const RelativeErrorReport a = rte_rre(est, gt, lengths);
  const RelativeErrorReport b = rte_rre(transform_trajectory(est, testing::random_pose3(rng, 100.0)), gt, lengths);
  EXPECT_NEAR(a.rte_percent, b.rte_percent, 1e-9);
  EXPECT_NEAR(a.rre_deg_per_100m, b.rre_deg_per_100m, 1e-9);
}

TEST(RteRre, TooShortThrows) {
  const Trajectory gt = io::synth_trajectory(straight_line(50.0, 1.0)).first;
  EXPECT_THROW(rte_rre(gt, gt, default_segment_lengths()), InsufficientLengthError);
}

TEST(SegmentError, MatchesIndependentFormula) {
  std::mt19937_64 rng(10);
  for (int i = 0; i < 200; ++i) {
    Trajectory est, gt;
    for (int k = 0; k < 2; ++k) {
      est.push_back(k, testing::random_pose3(rng));
      gt.push_back(k, testing::random_pose3(rng));
    }
    // err = (gt0^-1 gt1)^-1 (est0^-1 est1), written with explicit R, t algebra.
    const Matrix3d rg = gt[0].pose.rotation().transpose() * gt[1].pose.rotation();
    const Vector3d tg = gt[0].pose.rotation().transpose() * (gt[1].pose.translation() - gt[0].pose.translation());
    const Matrix3d re = est[0].pose.rotation().transpose() * est[1].pose.rotation();
    const Vector3d te = est[0].pose.rotation().transpose() * (est[1].pose.translation() - est[0].pose.translation());
    const Matrix3d r_err = rg.transpose() * re;
    const Vector3d t_err = rg.transpose() * (te - tg);
    const double cos_a = std::clamp((r_err.trace() - 1.0) / 2.0, -1.0, 1.0);
    const SegmentError e = segment_error(est, gt, 0, 1);
    EXPECT_NEAR(e.translation_m, t_err.norm(), 1e-9);
    EXPECT_NEAR(e.rotation_rad, std::acos(cos_a), 1e-7);
  }
}

TEST(ScaleFromFirst10m, Examples) {
  const Trajectory gt = io::synth_trajectory(straight_line(30.0, 1.0)).first;
  EXPECT_EQ(scale_from_first_10m(gt, gt), 1.0);
  EXPECT_NEAR(scale_from_first_10m(scale_trajectory(gt, 0.5), gt), 2.0, 1e-15);

  Trajectory g2, e2;
  g2.push_back(0, Pose3());
  g2.push_back(1, Pose3::from_translation(Vector3d(10.3, 0, 0)));
  e2.push_back(0, Pose3());
  e2.push_back(1, Pose3::from_translation(Vector3d(0, 9.7, 0)));
  EXPECT_EQ(scale_from_first_10m(e2, g2), 10.3 / 9.7);
}

TEST(ScaleFromFirst10m, Errors) {
  const Trajectory gt = io::synth_trajectory(straight_line(8.0, 1.0)).first;
  EXPECT_THROW(scale_from_first_10m(gt, gt), InsufficientLengthError);
  const Trajectory long_gt = io::synth_trajectory(straight_line(20.0, 1.0)).first;
  Trajectory frozen;
  for (const auto& e : long_gt.entries) frozen.push_back(e.timestamp, Pose3());
  EXPECT_THROW(scale_from_first_10m(frozen, long_gt), DegenerateInputError);
}

TEST(LogScaleCurve, Examples) {
  const Trajectory gt = io::synth_trajectory(straight_line(100.0, 1.0)).first;
  for (const auto& s : log_scale_curve(gt, gt)) EXPECT_EQ(s.log2_scale, 0.0);

  const auto curve = log_scale_curve(scale_trajectory(gt, 1.5), gt);
  EXPECT_EQ(curve.size(), 10u);
  for (const auto& s : curve) EXPECT_NEAR(s.log2_scale, std::log2(1.5), 1e-12);

  // Doubling the est displacement on the third 10 m piece only.
  Trajectory est;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const double x = gt.position(i).x();
    const double warped = x <= 20.0 ? x : (x <= 30.0 ? 20.0 + 2.0 * (x - 20.0) : x + 10.0);
    est.push_back(gt[i].timestamp, Pose3::from_translation(Vector3d(warped, 0, 0)));
  }
  const auto bumped = log_scale_curve(est, gt);
  EXPECT_NEAR(bumped[1].log2_scale, 0.0, 1e-12);
  EXPECT_NEAR(bumped[2].log2_scale, 1.0, 1e-12);
  EXPECT_NEAR(bumped[3].log2_scale, 0.0, 1e-12);
}

TEST(LogScaleCurve, ClosedLoopSegmentFlaggedInvalid) {
  Trajectory gt;
  gt.push_back(0, Pose3());
  gt.push_back(1, Pose3::from_translation(Vector3d(5, 0, 0)));
  gt.push_back(2, Pose3());
  gt.push_back(3, Pose3::from_translation(Vector3d(10, 0, 0)));
  const auto curve = log_scale_curve(gt, gt);
  ASSERT_EQ(curve.size(), 2u);
  EXPECT_FALSE(curve[0].valid);
  EXPECT_TRUE(std::isnan(curve[0].log2_scale));
  EXPECT_TRUE(curve[1].valid);
}

TEST(Evaluate, ScaleDriftGentleArc) {
  io::SynthSpec spec = straight_line(1000.0, 1.05);
  spec.primitives[0] = {io::MotionPrimitive::Kind::arc, 100.0, 10.0, 5000.0};
  const auto [gt, est] = io::synth_trajectory(spec);
  EvaluationOptions opts;
  const MetricsReport r = evaluate(est, gt, opts);
  EXPECT_NEAR(r.rte_percent, 5.0, 0.1);
  for (const auto& l : r.per_length) EXPECT_NEAR(l.rte_percent, 5.0, 0.1);
  for (const auto& s : log_scale_curve(est, gt)) EXPECT_NEAR(s.log2_scale, std::log2(1.05), 1e-6);
  EXPECT_NEAR(scale_from_first_10m(est, gt), 1.0 / 1.05, 1e-6);

  opts.scale_init_10m = true;
  const MetricsReport rescaled = evaluate(est, gt, opts);
  EXPECT_NEAR(rescaled.scale_init, 1.0 / 1.05, 1e-6);
  EXPECT_NEAR(rescaled.rte_percent, 0.0, 1e-6);
}

}  // namespace
}  // namespace bevodom
