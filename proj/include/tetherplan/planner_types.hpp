#pragma once

#include "tetherplan/cable_constraint.hpp"
#include "tetherplan/geometry.hpp"
#include "tetherplan/robot_model.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace tetherplan {

struct GraspCandidate {
  ArmId arm = ArmId::Left;
  Pose grasp_pose_t;              // gripper TCP frame in the tool frame
  Vec3 approach_dir_t = Vec3::UnitZ();
};

struct PlannerOptions {
  bool constrained = true;
  BendConstraint bend;
  int axial_samples = 5;
  int rotation_samples = 12;      // evenly spaced about the handle axis
  double finger_width = 0.02;     // m, gripper contact width along the handle
  double step = 0.05;             // rad, max joint change between waypoints
  double pregrasp_offset = 0.06;  // m, retreat along the approach axis
  std::vector<Pose> handover_poses;
  std::uint64_t seed = 0;
  int max_edges = 20000;          // validated-edge budget
  double time_limit_s = 60.0;
  bool check_dynamic_cable = false;
  int max_handovers = 1;
  IkOptions ik;
};

/// Grasp index (into the sampled candidate list) held by each arm, if any.
struct Holding {
  std::array<std::optional<int>, 2> grasp;

  bool empty() const { return !grasp[0] && !grasp[1]; }
  int count() const { return (grasp[0] ? 1 : 0) + (grasp[1] ? 1 : 0); }
  bool holds(ArmId a) const { return grasp[static_cast<int>(a)].has_value(); }
  const std::optional<int>& of(ArmId a) const { return grasp[static_cast<int>(a)]; }
  std::optional<int>& of(ArmId a) { return grasp[static_cast<int>(a)]; }
  bool operator==(const Holding&) const = default;
};

struct Waypoint {
  JointConfig q_left = JointConfig::Zero();
  JointConfig q_right = JointConfig::Zero();
  Pose object_pose;
  Holding holding;
  // Grippers allowed to touch the tool without holding it (final approach / retreat).
  std::array<bool, 2> contact{false, false};
  double theta = 0.0;             // bend angle (rad)
  double min_clearance = 0.0;     // m

  const JointConfig& q(ArmId a) const { return a == ArmId::Left ? q_left : q_right; }
  JointConfig& q(ArmId a) { return a == ArmId::Left ? q_left : q_right; }
};

struct MotionPlan {
  std::vector<Waypoint> waypoints;

  std::size_t size() const { return waypoints.size(); }
  bool empty() const { return waypoints.empty(); }
  /// Index of the first waypoint holding the tool, or size() if none does.
  std::size_t first_grasp_index() const {
    for (std::size_t i = 0; i < waypoints.size(); ++i)
      if (!waypoints[i].holding.empty()) return i;
    return waypoints.size();
  }
};

enum class PlanStatus { Success, NoPlan };

struct PlanStats {
  int edges_validated = 0;
  int edges_rejected = 0;
  int nodes_closed = 0;
  int transfers = 0;
  int handovers = 0;
  double runtime_s = 0.0;
  std::string failure;            // why NoPlan, empty on success
};

struct PlanResult {
  PlanStatus status = PlanStatus::NoPlan;
  MotionPlan plan;
  PlanStats stats;

  bool success() const { return status == PlanStatus::Success; }
};

}  // namespace tetherplan
