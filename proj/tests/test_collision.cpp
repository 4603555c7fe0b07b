#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace tetherplan;

TEST(SegmentDistance, Examples) {
  EXPECT_EQ(segment_segment_distance({0, 0, 0}, {2, 0, 0}, {1, 0, 0}, {3, 0, 0}), 0.0);
  EXPECT_NEAR(segment_segment_distance({0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}), 1.0, 1e-15);
  // Parallel, offset along the axis: endpoint to endpoint.
  EXPECT_NEAR(segment_segment_distance({0, 0, 0}, {1, 0, 0}, {2, 1, 0}, {3, 1, 0}), std::sqrt(2.0), 1e-15);
  // Degenerate segments are points.
  EXPECT_NEAR(segment_segment_distance({0, 0, 0}, {0, 0, 0}, {0, 0, 3}, {0, 0, 3}), 3.0, 1e-15);
  EXPECT_NEAR(segment_segment_distance({0, 0, 0}, {0, 0, 0}, {-1, 2, 0}, {1, 2, 0}), 2.0, 1e-15);
}

TEST(SegmentDistance, MatchesSamplingOracle) {
  Rng rng(31);
  for (int i = 0; i < 500; ++i) {
    const Vec3 p1 = oracle::random_vec(rng, -1, 1), p2 = oracle::random_vec(rng, -1, 1);
    const Vec3 q1 = oracle::random_vec(rng, -1, 1), q2 = oracle::random_vec(rng, -1, 1);
    EXPECT_NEAR(segment_segment_distance(p1, p2, q1, q2), oracle::segment_distance(p1, p2, q1, q2), 1e-6);
  }
}

TEST(SegmentDistance, NearParallelMatchesOracle) {
  Rng rng(32);
  for (int i = 0; i < 200; ++i) {
    const Vec3 p1 = oracle::random_vec(rng, -1, 1), d = oracle::random_vec(rng, -1, 1);
    const Vec3 q1 = oracle::random_vec(rng, -1, 1), eps = oracle::random_vec(rng, -1e-9, 1e-9);
    const Vec3 p2 = p1 + d, q2 = q1 + d + eps;
    EXPECT_NEAR(segment_segment_distance(p1, p2, q1, q2), oracle::segment_distance(p1, p2, q1, q2), 1e-6);
  }
}

TEST(SegmentDistance, SymmetricAndRigidInvariant) {
  Rng rng(33);
  for (int i = 0; i < 500; ++i) {
    const Vec3 p1 = oracle::random_vec(rng, -1, 1), p2 = oracle::random_vec(rng, -1, 1);
    const Vec3 q1 = oracle::random_vec(rng, -1, 1), q2 = oracle::random_vec(rng, -1, 1);
    const double d = segment_segment_distance(p1, p2, q1, q2);
    EXPECT_NEAR(d, segment_segment_distance(q1, q2, p1, p2), 1e-12);
    EXPECT_NEAR(d, segment_segment_distance(p2, p1, q2, q1), 1e-12);
    const Pose t = oracle::random_pose(rng);
    EXPECT_NEAR(d, segment_segment_distance(t.apply(p1), t.apply(p2), t.apply(q1), t.apply(q2)), 1e-9);
  }
}

TEST(CapsuleHit, Examples) {
  const Capsule a{{0, 0, 0}, {0, 0, 1}, 0.1};
  EXPECT_TRUE(capsule_capsule_hit(a, a));
  const Capsule far{{2.0, 0, 0}, {2.0, 0, 1}, 0.1};
  EXPECT_FALSE(capsule_capsule_hit(a, far));
  // Touching exactly: distance 0.25 = 0.125 + 0.125, all exactly representable.
  const Capsule b{{0, 0, 0}, {0, 0, 1}, 0.125};
  const Capsule c{{0.25, 0, 0}, {0.25, 0, 1}, 0.125};
  EXPECT_FALSE(capsule_capsule_hit(b, c));
}

TEST(CapsuleHit, AgreesWithOracleAndIsSymmetric) {
  Rng rng(34);
  int disagreements = 0;
  for (int i = 0; i < 500; ++i) {
    const Capsule a{oracle::random_vec(rng, -1, 1), oracle::random_vec(rng, -1, 1), rng.uniform(0.01, 0.4)};
    const Capsule b{oracle::random_vec(rng, -1, 1), oracle::random_vec(rng, -1, 1), rng.uniform(0.01, 0.4)};
    const double d = oracle::segment_distance(a.a, a.b, b.a, b.b);
    const bool want = d < a.radius + b.radius;
    const bool got = capsule_capsule_hit(a, b);
    EXPECT_EQ(got, capsule_capsule_hit(b, a));
    if (got != want && std::abs(d - (a.radius + b.radius)) >= 1e-6) ++disagreements;
    // Inflating a radius never turns a hit into a miss.
    Capsule fat = a;
    fat.radius *= 1.5;
    if (got) EXPECT_TRUE(capsule_capsule_hit(fat, b));
  }
  EXPECT_EQ(disagreements, 0);
}

TEST(BoxDistance, PointAndSegment) {
  const Box box{{rot_z(0.3), {1, 2, 3}}, {0.5, 0.25, 0.125}};
  EXPECT_NEAR(point_box_signed_distance({1, 2, 3}, box), -0.125, 1e-12);
  const Vec3 above = box.pose.apply({0, 0, 1.125});
  EXPECT_NEAR(point_box_signed_distance(above, box), 1.0, 1e-12);
  // Segment crossing the box.
  EXPECT_LE(segment_box_distance(box.pose.apply({-2, 0, 0}), box.pose.apply({2, 0, 0}), box), 0.0);
  // Segment passing over the top face.
  EXPECT_NEAR(segment_box_distance(box.pose.apply({-2, 0, 0.625}), box.pose.apply({2, 0, 0.625}), box), 0.5, 1e-9);
}

TEST(BoxDistance, SegmentMatchesSampling) {
  Rng rng(35);
  for (int i = 0; i < 200; ++i) {
    const Box box{oracle::random_pose(rng), oracle::random_vec(rng, 0.05, 0.5)};
    const Vec3 a = oracle::random_vec(rng, -2, 2), b = oracle::random_vec(rng, -2, 2);
    const double got = segment_box_distance(a, b, box);
    // Sampled upper bound, and the minimum over samples cannot undercut the exact value.
    double sampled = 1e9;
    for (int k = 0; k <= 2000; ++k) {
      const Vec3 p = a + (b - a) * (k / 2000.0);
      sampled = std::min(sampled, std::max(0.0, point_box_signed_distance(p, box)));
    }
    EXPECT_LE(std::max(got, 0.0), sampled + 1e-9);
    EXPECT_NEAR(std::max(got, 0.0), sampled, 2e-3);
  }
}

TEST(RobotCollision, HomeIsFree) {
  const Scene s = default_scene();
  CollisionQuery q;
  q.q_left = s.robot.home_left;
  q.q_right = s.robot.home_right;
  q.tool = ToolState{s.start_pose, &s.tool.shapes, {false, false}};
  q.cable = static_cable(s, s.start_pose);
  const CollisionReport r = robot_in_collision(s.world, s.robot, q);
  EXPECT_TRUE(r.empty());
  EXPECT_GT(r.min_clearance, 0.0);
}

TEST(RobotCollision, GrippingToolIsExcluded) {
  const Scene s = default_scene();
  const auto grasps = sample_grasps(s.tool, s.planner);
  std::optional<JointConfig> q;
  for (std::size_t i = 0; i < grasps.size() && !q; ++i)
    if (grasps[i].arm == ArmId::Left) q = ik(s.robot.left, compose(s.start_pose, grasps[i].grasp_pose_t), s.robot.home_left, IkOptions{});
  ASSERT_TRUE(q);
  CollisionQuery cq;
  cq.q_left = *q;
  cq.q_right = s.robot.home_right;
  cq.tool = ToolState{s.start_pose, &s.tool.shapes, {true, false}};
  const CollisionReport holding = robot_in_collision(s.world, s.robot, cq);
  EXPECT_FALSE(holding.involves("left_gripper"));
  // Without the attachment exclusion the fingers overlap the handle.
  cq.tool->gripper_contact = {false, false};
  EXPECT_TRUE(robot_in_collision(s.world, s.robot, cq).contains("left_gripper", "tool_body"));
}

TEST(RobotCollision, ArmThroughCableIsReported) {
  const Scene s = default_scene();
  const Capsule cable = static_cable(s, s.start_pose);
  const Vec3 on_axis = cable.a + 0.5 * (cable.b - cable.a);
  // Any orientation that IK reaches will do; put the TCP on the cable axis.
  std::optional<JointConfig> q;
  for (int k = 0; k < 12 && !q; ++k) {
    const Pose target{rpy_to_rot(0.0, kPi / 2, 2.0 * kPi * k / 12), on_axis};
    q = ik(s.robot.left, target, s.robot.home_left, IkOptions{});
  }
  ASSERT_TRUE(q);
  CollisionQuery cq;
  cq.q_left = *q;
  cq.q_right = s.robot.home_right;
  cq.cable = cable;
  const CollisionReport r = robot_in_collision(s.world, s.robot, cq);
  EXPECT_TRUE(r.contains("left_gripper", "cable"));
  cq.cable.reset();
  EXPECT_FALSE(robot_in_collision(s.world, s.robot, cq).involves("cable"));
}

TEST(RobotCollision, AllowedPairsAreSkipped) {
  const Scene s = default_scene();
  EXPECT_TRUE(s.world.allowed("table", "left_link0"));
  // Push the left arm's first link into the table: still not reported.
  DualArm robot = s.robot;
  robot.left.base_pose.translation.z() -= 0.03;
  CollisionQuery q;
  q.q_left = s.robot.home_left;
  q.q_right = s.robot.home_right;
  EXPECT_FALSE(s.world.check(robot, q).contains("left_link0", "table"));
  const CollisionWorld strict(s.world.obstacles(), ArmGeometry{}, ArmGeometry{});
  EXPECT_TRUE(strict.check(robot, q).contains("left_link0", "table"));
}

TEST(RobotCollision, DuplicateObstacleNames) {
  std::vector<NamedShape> obs{{"a", Sphere{{0, 0, 0}, 0.1}}, {"a", Sphere{{1, 0, 0}, 0.1}}};
  EXPECT_THROW(CollisionWorld(obs, ArmGeometry{}, ArmGeometry{}), ModelError);
}
