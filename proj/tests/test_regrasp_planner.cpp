#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace tetherplan;

namespace {

const Scene& scene() {
  static const Scene s = default_scene();
  return s;
}

PlannerOptions options(bool constrained, std::uint64_t seed = 3) {
  PlannerOptions o = scene().planner;
  o.constrained = constrained;
  o.seed = seed;
  return o;
}

PlanResult plan_cell(double pitch_deg, double roll_deg, bool constrained, std::uint64_t seed = 3) {
  return plan(scene(), start_with_roll(scene(), deg2rad(roll_deg)), goal_with_pitch(scene(), deg2rad(pitch_deg)),
              options(constrained, seed));
}

PlanVerification verify(const PlanResult& r, const PlannerOptions& o) {
  return verify_plan(r.plan, scene(), sample_grasps(scene().tool, o), o.bend, o.ik);
}

}  // namespace

TEST(SampleGrasps, CountsAndGeometry) {
  const auto g = sample_grasps(scene().tool, scene().planner);
  ASSERT_EQ(g.size(), 2u * 5 * 12);
  const Vec3 u = (scene().tool.handle.to - scene().tool.handle.from).normalized();
  int left = 0;
  for (const auto& c : g) {
    left += c.arm == ArmId::Left;
    EXPECT_TRUE(is_orthonormal(c.grasp_pose_t.rotation));
    EXPECT_NEAR(c.grasp_pose_t.rotation.col(2).dot(u), 0.0, 1e-9);
    EXPECT_NEAR(c.approach_dir_t.norm(), 1.0, 1e-12);
    // Centre on the handle axis.
    const Vec3 d = c.grasp_pose_t.translation - scene().tool.handle.from;
    EXPECT_NEAR((d - d.dot(u) * u).norm(), 0.0, 1e-12);
  }
  EXPECT_EQ(left, 60);
}

TEST(SampleGrasps, Deterministic) {
  const auto a = sample_grasps(scene().tool, scene().planner);
  const auto b = sample_grasps(scene().tool, scene().planner);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_TRUE(a[i].grasp_pose_t.rotation == b[i].grasp_pose_t.rotation);
    EXPECT_TRUE(a[i].grasp_pose_t.translation == b[i].grasp_pose_t.translation);
  }
}

TEST(SampleGrasps, ShortHandle) {
  ToolSpec t = scene().tool;
  t.handle.to = t.handle.from;
  EXPECT_THROW(sample_grasps(t, scene().planner), EmptyGraspSetError);
  t.handle.to = t.handle.from + Vec3(0, 0, 0.01);
  EXPECT_THROW(sample_grasps(t, scene().planner), EmptyGraspSetError);
}

TEST(Planner, IdentityTask) {
  const PlanResult r = plan(scene(), scene().start_pose, scene().start_pose, options(true));
  ASSERT_TRUE(r.success()) << r.stats.failure;
  EXPECT_GE(r.plan.size(), 1u);
  EXPECT_EQ(r.stats.transfers, 0);
  EXPECT_EQ(r.stats.handovers, 0);
  EXPECT_TRUE(verify(r, options(true)).sound());
}

TEST(Planner, ZeroLengthEdgeIsValid) {
  RegraspGraph g(scene(), scene().start_pose, scene().start_pose, options(true));
  const RegraspNode root = g.make_node(NodeKey{});
  EXPECT_TRUE(g.validate_edge(root, root));
}

TEST(Planner, ConstrainedCellSucceedsAndIsSound) {
  const PlannerOptions o = options(true);
  const PlanResult r = plan_cell(10, 0, true);
  ASSERT_TRUE(r.success()) << r.stats.failure;
  const PlanVerification v = verify(r, o);
  EXPECT_TRUE(v.sound());
  EXPECT_LT(v.max_theta, o.bend.theta_max);
  // Final object pose is the goal.
  const Pose goal = goal_with_pitch(scene(), deg2rad(10));
  EXPECT_TRUE(poses_close(r.plan.waypoints.back().object_pose, goal, 2 * o.ik.pos_tol, 2 * o.ik.ori_tol));
  // Joint steps stay within the interpolation limit.
  for (std::size_t i = 1; i < r.plan.size(); ++i) {
    const auto& a = r.plan.waypoints[i - 1];
    const auto& b = r.plan.waypoints[i];
    EXPECT_LE((a.q_left - b.q_left).cwiseAbs().maxCoeff(), o.step + 1e-12);
    EXPECT_LE((a.q_right - b.q_right).cwiseAbs().maxCoeff(), o.step + 1e-12);
  }
}

TEST(Planner, PitchedGoalBeyondThresholdHasNoPlan) {
  // The 90 degree row bends the cable past 95 degrees at the goal itself.
  EXPECT_THROW(build_graph(scene(), scene().start_pose, goal_with_pitch(scene(), deg2rad(90)), options(true)),
               NoFeasibleGoalGraspError);
  const PlanResult r = plan_cell(90, 0, true);
  EXPECT_FALSE(r.success());
  EXPECT_NE(r.stats.failure.find("NoFeasibleGoalGrasp"), std::string::npos);
}

TEST(Planner, UnreachableStart) {
  Pose far = scene().start_pose;
  far.translation += Vec3(5, 0, 0);
  EXPECT_THROW(build_graph(scene(), far, scene().goal_pose, options(false)), NoFeasibleStartGraspError);
}

TEST(Planner, BendCheckOnlyInConstrainedMode) {
  RegraspGraph gc(scene(), scene().start_pose, scene().start_pose, options(true));
  RegraspGraph gu(scene(), scene().start_pose, scene().start_pose, options(false));
  Waypoint w;
  w.q_left = scene().robot.home_left;
  w.q_right = scene().robot.home_right;
  w.object_pose = {scene().start_pose.rotation * rot_x(deg2rad(120)), scene().start_pose.translation};
  Waypoint wu = w;
  EXPECT_EQ(gc.check_waypoint(w), FailureReason::BendViolation);
  EXPECT_NEAR(w.theta, deg2rad(120), 1e-9);
  EXPECT_EQ(gu.check_waypoint(wu), FailureReason::None);
}

TEST(Planner, UnconstrainedPlanViolatesBend) {
  // Same 90 degree row: the baseline plans it, and its goal waypoints fail
  // the constrained waypoint check.
  const PlanResult r = plan_cell(90, 0, false);
  ASSERT_TRUE(r.success()) << r.stats.failure;
  RegraspGraph gc(scene(), scene().start_pose, scene().start_pose, options(true));
  int bent = 0;
  for (Waypoint w : r.plan.waypoints) bent += gc.check_waypoint(w) == FailureReason::BendViolation;
  EXPECT_GT(bent, 0);
  EXPECT_GE(verify(r, options(false)).first_bend_violation, 0);
}

TEST(Planner, UnconstrainedApproachHitsCable) {
  const PlanResult r = plan_cell(45, -20, false);
  ASSERT_TRUE(r.success()) << r.stats.failure;
  const PlanVerification v = verify(r, options(false));
  ASSERT_GE(v.first_cable_contact, 0);
  EXPECT_LT(static_cast<std::size_t>(v.first_cable_contact), r.plan.first_grasp_index());
  RegraspGraph gc(scene(), start_with_roll(scene(), deg2rad(-20)), scene().start_pose, options(true));
  Waypoint w = r.plan.waypoints[v.first_cable_contact];
  EXPECT_EQ(gc.check_waypoint(w), FailureReason::CableCollision);
  // The constrained planner routes around it.
  const PlanResult c = plan_cell(45, -20, true);
  ASSERT_TRUE(c.success()) << c.stats.failure;
  EXPECT_TRUE(verify(c, options(true)).sound());
}

TEST(Planner, Deterministic) {
  const PlanResult a = plan_cell(30, 10, true, 11);
  const PlanResult b = plan_cell(30, 10, true, 11);
  ASSERT_EQ(a.status, b.status);
  ASSERT_EQ(a.plan.size(), b.plan.size());
  for (std::size_t i = 0; i < a.plan.size(); ++i) {
    EXPECT_TRUE(a.plan.waypoints[i].q_left == b.plan.waypoints[i].q_left);
    EXPECT_TRUE(a.plan.waypoints[i].q_right == b.plan.waypoints[i].q_right);
  }
  EXPECT_EQ(a.stats.edges_validated, b.stats.edges_validated);
}

TEST(Planner, UnconstrainedDominates) {
  for (const auto& [pitch, roll] : std::vector<std::pair<double, double>>{{0, 0}, {15, 20}, {60, -10}}) {
    const PlanResult c = plan_cell(pitch, roll, true);
    const PlanResult u = plan_cell(pitch, roll, false);
    if (c.success()) EXPECT_TRUE(u.success()) << pitch << "/" << roll;
  }
}

TEST(Planner, CleanUnconstrainedPlanIsTheConstrainedPlan) {
  // The constraint only removes edges, so a baseline plan with no violation
  // is still the cheapest path once they are gone.
  int compared = 0;
  for (const auto& [pitch, roll] : std::vector<std::pair<double, double>>{{0, 0}, {10, 10}, {30, -10}}) {
    const PlanResult u = plan_cell(pitch, roll, false);
    if (!u.success() || !verify(u, options(false)).sound()) continue;
    const PlanResult c = plan_cell(pitch, roll, true);
    ASSERT_TRUE(c.success());
    ASSERT_EQ(c.plan.size(), u.plan.size());
    for (std::size_t i = 0; i < c.plan.size(); ++i) {
      EXPECT_TRUE(c.plan.waypoints[i].q_left == u.plan.waypoints[i].q_left);
      EXPECT_TRUE(c.plan.waypoints[i].q_right == u.plan.waypoints[i].q_right);
    }
    ++compared;
  }
  EXPECT_GT(compared, 0);
}

TEST(Planner, HandoverHoldsTwoGrasps) {
  // Start only the left arm reaches, goal only the right arm reaches.
  Scene s = scene();
  s.start_pose.translation = {0.25, 0.40, 0.30};
  s.balancer.anchor = {0.25, 0.40, 0.95};
  const Pose goal{Rot3::Identity(), {0.25, -0.40, 0.30}};
  PlannerOptions o = options(true, 1);
  const PlanResult r = plan(s, s.start_pose, goal, o);
  ASSERT_TRUE(r.success()) << r.stats.failure;
  ASSERT_GE(r.stats.handovers, 1);
  int both = 0;
  for (const auto& w : r.plan.waypoints) both += w.holding.count() == 2;
  EXPECT_GT(both, 0);
  EXPECT_TRUE(verify_plan(r.plan, s, sample_grasps(s.tool, o), o.bend, o.ik).sound());

  o.max_handovers = 0;
  EXPECT_FALSE(plan(s, s.start_pose, goal, o).success());
}

TEST(Planner, NodesAreConsistent) {
  RegraspGraph g(scene(), scene().start_pose, goal_with_pitch(scene(), deg2rad(30)), options(true));
  const RegraspNode root = g.make_node(NodeKey{});
  int checked = 0;
  for (const NodeKey& k : g.successors(root)) {
    const RegraspNode n = g.make_node(k);
    for (ArmId a : {ArmId::Left, ArmId::Right}) {
      if (const auto& c = n.holding.of(a)) {
        const Pose want = compose(n.object_pose, g.grasps()[*c].grasp_pose_t);
        EXPECT_TRUE(poses_close(fk(scene().robot.arm(a), n.q(a)), want, 1e-4, 1e-3));
        EXPECT_TRUE(scene().robot.arm(a).within_limits(n.q(a)));
        ++checked;
      }
    }
  }
  EXPECT_GT(checked, 0);
}
