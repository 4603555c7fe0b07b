#pragma once

#include "tetherplan/cable_constraint.hpp"
#include "tetherplan/planner_types.hpp"

#include <vector>

namespace tetherplan {

class EmptyGraspSetError : public Error {
public:
  EmptyGraspSetError() : Error("EmptyGraspSet: handle is shorter than the gripper finger width") {}
};

/// Parallel-jaw grasps on the tool handle: `axial_samples` evenly spaced
/// centres along the usable handle span times `rotation_samples` approach
/// directions around the handle, for each arm (left block first).
///
/// Gripper frame: z = approach (towards the handle axis), y = jaw closing
/// direction, x = handle axis.
inline std::vector<GraspCandidate> sample_grasps(const ToolSpec& tool, const PlannerOptions& opts) {
  const Handle& h = tool.handle;
  const double len = h.length();
  if (len < opts.finger_width || len < 1e-12) throw EmptyGraspSetError();
  const Vec3 u = (h.to - h.from) / len;
  // Reference radial direction: the tool-frame axis least aligned with the handle.
  Vec3 ref = Vec3::UnitX();
  if (std::abs(u.dot(ref)) > 0.9) ref = Vec3::UnitY();
  const Vec3 e1 = (ref - ref.dot(u) * u).normalized();
  const Vec3 e2 = u.cross(e1);

  const double lo = 0.5 * opts.finger_width;
  const double hi = len - 0.5 * opts.finger_width;
  std::vector<GraspCandidate> out;
  out.reserve(2 * static_cast<std::size_t>(opts.axial_samples * opts.rotation_samples));
  for (ArmId arm : {ArmId::Left, ArmId::Right}) {
    for (int i = 0; i < opts.axial_samples; ++i) {
      const double s = opts.axial_samples == 1 ? 0.5 * len : lo + (hi - lo) * i / (opts.axial_samples - 1);
      const Vec3 centre = h.from + s * u;
      for (int k = 0; k < opts.rotation_samples; ++k) {
        const double phi = 2.0 * kPi * k / opts.rotation_samples;
        const Vec3 radial = std::cos(phi) * e1 + std::sin(phi) * e2;
        const Vec3 z = -radial;
        const Vec3 y = u.cross(z);
        const Vec3 x = y.cross(z);
        GraspCandidate g;
        g.arm = arm;
        g.grasp_pose_t.rotation.col(0) = x;
        g.grasp_pose_t.rotation.col(1) = y;
        g.grasp_pose_t.rotation.col(2) = z;
        g.grasp_pose_t.translation = centre;
        g.approach_dir_t = z;
        out.push_back(g);
      }
    }
  }
  return out;
}

}  // namespace tetherplan
