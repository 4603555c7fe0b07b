/**
 * @file collision.hpp
 * @brief Primitive-shape distance queries and the dual-arm collision world.
 *
 * Every arm link is a capsule spanning consecutive joint origins; the
 * gripper is a capsule along the TCP approach axis. Contact convention:
 * shapes collide iff their surface distance is strictly negative, so
 * touching shapes are free.
 */

#pragma once

#include "tetherplan/geometry.hpp"
#include "tetherplan/robot_model.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

namespace tetherplan {

struct Capsule {
  Vec3 a = Vec3::Zero();
  Vec3 b = Vec3::Zero();
  double radius = 0.0;
};

struct Sphere {
  Vec3 center = Vec3::Zero();
  double radius = 0.0;
};

struct Box {
  Pose pose;
  Vec3 half_extents = Vec3::Zero();
};

using Shape = std::variant<Capsule, Sphere, Box>;

struct NamedShape {
  std::string name;
  Shape shape;
};

inline Shape transform(const Pose& p, const Shape& s) {
  return std::visit(
      [&](const auto& v) -> Shape {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Capsule>) {
          return Capsule{p.apply(v.a), p.apply(v.b), v.radius};
        } else if constexpr (std::is_same_v<T, Sphere>) {
          return Sphere{p.apply(v.center), v.radius};
        } else {
          return Box{compose(p, v.pose), v.half_extents};
        }
      },
      s);
}

// ============================================================================
// Distance kernels
// ============================================================================

inline double point_segment_distance(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (a + t * ab - p).norm();
}

/// Exact minimum distance between closed segments [p1,p2] and [q1,q2].
inline double segment_segment_distance(const Vec3& p1, const Vec3& p2, const Vec3& q1, const Vec3& q2) {
  constexpr double kEps = 1e-18;
  const Vec3 d1 = p2 - p1;
  const Vec3 d2 = q2 - q1;
  const Vec3 r = p1 - q1;
  const double a = d1.squaredNorm();
  const double e = d2.squaredNorm();
  const double f = d2.dot(r);
  double s = 0.0, t = 0.0;
  if (a <= kEps && e <= kEps) return r.norm();
  if (a <= kEps) {
    t = std::clamp(f / e, 0.0, 1.0);
  } else {
    const double c = d1.dot(r);
    if (e <= kEps) {
      s = std::clamp(-c / a, 0.0, 1.0);
    } else {
      const double b = d1.dot(d2);
      const double denom = a * e - b * b;
      s = denom > kEps * a * e ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
      t = (b * s + f) / e;
      if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / a, 0.0, 1.0);
      } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  const double d = (p1 + s * d1 - (q1 + t * d2)).norm();
  // The parallel branch fixes s = 0; probing the remaining endpoints keeps
  // the result exact for overlapping parallel segments.
  return std::min({d, point_segment_distance(p1, q1, q2), point_segment_distance(p2, q1, q2),
                   point_segment_distance(q1, p1, p2), point_segment_distance(q2, p1, p2)});
}

inline double point_aabb_distance(const Vec3& p, const Vec3& half) {
  const Vec3 d = (p.cwiseAbs() - half).cwiseMax(0.0);
  return d.norm();
}

// Signed: negative inside the box (depth to the nearest face).
inline double point_box_signed_distance(const Vec3& p_world, const Box& box) {
  const Vec3 p = box.pose.rotation.transpose() * (p_world - box.pose.translation);
  const Vec3 q = p.cwiseAbs() - box.half_extents;
  if ((q.array() <= 0.0).all()) return q.maxCoeff();
  return q.cwiseMax(0.0).norm();
}

/// Distance from a segment to a box (0 when they intersect). The distance
/// to a convex set is convex along the segment, so golden-section search on
/// the segment parameter converges to the global minimum.
inline double segment_box_distance(const Vec3& a_world, const Vec3& b_world, const Box& box) {
  const Rot3 rt = box.pose.rotation.transpose();
  const Vec3 a = rt * (a_world - box.pose.translation);
  const Vec3 b = rt * (b_world - box.pose.translation);
  const Vec3& h = box.half_extents;
  auto f = [&](double t) { return point_aabb_distance(a + t * (b - a), h); };
  constexpr double kInvPhi = 0.6180339887498949;
  double lo = 0.0, hi = 1.0;
  double x1 = hi - kInvPhi * (hi - lo), x2 = lo + kInvPhi * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < 90 && hi - lo > 1e-15; ++i) {
    if (f1 <= f2) {
      hi = x2; x2 = x1; f2 = f1;
      x1 = hi - kInvPhi * (hi - lo); f1 = f(x1);
    } else {
      lo = x1; x1 = x2; f1 = f2;
      x2 = lo + kInvPhi * (hi - lo); f2 = f(x2);
    }
  }
  return std::min({f(0.0), f(1.0), f1, f2});
}

/// Separating-axis gap between two boxes: positive when separated (a lower
/// bound on their distance), otherwise minus the smallest overlap.
inline double box_box_gap(const Box& p, const Box& q) {
  const Rot3& ra = p.pose.rotation;
  const Rot3& rb = q.pose.rotation;
  const Vec3 d = q.pose.translation - p.pose.translation;
  std::array<Vec3, 15> axes;
  int n = 0;
  for (int i = 0; i < 3; ++i) axes[n++] = ra.col(i);
  for (int i = 0; i < 3; ++i) axes[n++] = rb.col(i);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) axes[n++] = ra.col(i).cross(rb.col(j));
  double best = -std::numeric_limits<double>::infinity();
  for (const Vec3& raw : axes) {
    const double len = raw.norm();
    if (len < 1e-9) continue;
    const Vec3 ax = raw / len;
    double pa = 0.0, pb = 0.0;
    for (int k = 0; k < 3; ++k) {
      pa += p.half_extents[k] * std::abs(ax.dot(ra.col(k)));
      pb += q.half_extents[k] * std::abs(ax.dot(rb.col(k)));
    }
    best = std::max(best, std::abs(d.dot(ax)) - pa - pb);
  }
  return best;
}

/// Surface distance between two shapes; strictly negative means collision.
inline double shape_distance(const Shape& s1, const Shape& s2) {
  struct Visitor {
    double operator()(const Capsule& a, const Capsule& b) const {
      return segment_segment_distance(a.a, a.b, b.a, b.b) - a.radius - b.radius;
    }
    double operator()(const Capsule& a, const Sphere& b) const {
      return point_segment_distance(b.center, a.a, a.b) - a.radius - b.radius;
    }
    double operator()(const Sphere& a, const Capsule& b) const { return (*this)(b, a); }
    double operator()(const Sphere& a, const Sphere& b) const {
      return (a.center - b.center).norm() - a.radius - b.radius;
    }
    double operator()(const Capsule& a, const Box& b) const {
      return segment_box_distance(a.a, a.b, b) - a.radius;
    }
    double operator()(const Box& a, const Capsule& b) const { return (*this)(b, a); }
    double operator()(const Sphere& a, const Box& b) const {
      return point_box_signed_distance(a.center, b) - a.radius;
    }
    double operator()(const Box& a, const Sphere& b) const { return (*this)(b, a); }
    double operator()(const Box& a, const Box& b) const { return box_box_gap(a, b); }
  };
  return std::visit(Visitor{}, s1, s2);
}

inline bool capsule_capsule_hit(const Capsule& a, const Capsule& b) {
  return segment_segment_distance(a.a, a.b, b.a, b.b) < a.radius + b.radius;
}

inline bool shapes_hit(const Shape& a, const Shape& b) { return shape_distance(a, b) < 0.0; }

// ============================================================================
// Collision world
// ============================================================================

/// Capsule radii per arm link plus the gripper, expressed in the TCP frame.
struct ArmGeometry {
  // link0 = base to joint 1, link1..link5 = joint i to joint i+1, link6 = joint 6 to flange
  std::array<double, kArmDof + 1> link_radii{0.05, 0.045, 0.045, 0.04, 0.035, 0.035, 0.035};
  Capsule gripper{{0.0, 0.0, -0.12}, {0.0, 0.0, -0.02}, 0.03};
};

inline constexpr int kLinksPerArm = kArmDof + 2;  // link0..link6 + gripper
inline constexpr int kGripperLink = kLinksPerArm - 1;

inline std::string link_name(ArmId arm, int link) {
  const std::string prefix = arm_name(arm);
  if (link == kGripperLink) return prefix + "_gripper";
  return prefix + "_link" + std::to_string(link);
}

inline std::array<Capsule, kLinksPerArm> link_capsules(const ArmModel& arm, const ArmGeometry& geom,
                                                       const ArmFrames& frames) {
  std::array<Capsule, kLinksPerArm> out;
  Vec3 prev = arm.base_pose.translation;
  for (int i = 0; i < kArmDof; ++i) {
    out[i] = Capsule{prev, frames.joints[i].translation, geom.link_radii[i]};
    prev = frames.joints[i].translation;
  }
  out[kArmDof] = Capsule{prev, frames.flange.translation, geom.link_radii[kArmDof]};
  out[kGripperLink] = Capsule{frames.tcp.apply(geom.gripper.a), frames.tcp.apply(geom.gripper.b),
                              geom.gripper.radius};
  return out;
}

struct CollisionPair {
  std::string first;
  std::string second;
  double distance = 0.0;
};

struct CollisionReport {
  std::vector<CollisionPair> pairs;
  double min_clearance = std::numeric_limits<double>::infinity();

  bool empty() const { return pairs.empty(); }
  bool contains(const std::string& a, const std::string& b) const {
    return std::any_of(pairs.begin(), pairs.end(), [&](const CollisionPair& p) {
      return (p.first == a && p.second == b) || (p.first == b && p.second == a);
    });
  }
  bool involves(const std::string& name) const {
    return std::any_of(pairs.begin(), pairs.end(),
                       [&](const CollisionPair& p) { return p.first == name || p.second == name; });
  }
};

/// The tool as seen by one collision query: world pose, shapes in the tool
/// frame, and which grippers may touch it (holding or in final approach).
struct ToolState {
  Pose pose;
  const std::vector<NamedShape>* shapes = nullptr;
  std::array<bool, 2> gripper_contact{false, false};
};

struct CollisionQuery {
  JointConfig q_left = JointConfig::Zero();
  JointConfig q_right = JointConfig::Zero();
  std::optional<ToolState> tool;
  std::optional<Capsule> cable;

  JointConfig& q(ArmId a) { return a == ArmId::Left ? q_left : q_right; }
};

class CollisionWorld {
public:
  CollisionWorld() { rebuild_pairs(); }

  CollisionWorld(std::vector<NamedShape> obstacles, ArmGeometry left, ArmGeometry right,
                 std::vector<std::pair<std::string, std::string>> allowed = {})
      : obstacles_(std::move(obstacles)), geometry_{left, right} {
    std::set<std::string> names;
    for (const auto& o : obstacles_) {
      if (!names.insert(o.name).second) throw ModelError("duplicate obstacle name: " + o.name);
    }
    for (auto& [a, b] : allowed) allowed_.insert(ordered(a, b));
    rebuild_pairs();
  }

  const std::vector<NamedShape>& obstacles() const { return obstacles_; }
  const ArmGeometry& geometry(ArmId a) const { return geometry_[static_cast<int>(a)]; }

  bool allowed(const std::string& a, const std::string& b) const { return allowed_.count(ordered(a, b)) > 0; }
  const std::set<std::pair<std::string, std::string>>& allowed_pairs() const { return allowed_; }

  /// Checks every non-excluded pair; `stop_at_first` trades the full report
  /// for speed when only a yes/no answer is needed.
  CollisionReport check(const DualArm& robot, const CollisionQuery& q, bool stop_at_first = false) const {
    CollisionReport report;
    std::array<std::array<Capsule, kLinksPerArm>, 2> links;
    links[0] = link_capsules(robot.left, geometry_[0], fk_frames(robot.left, q.q_left));
    links[1] = link_capsules(robot.right, geometry_[1], fk_frames(robot.right, q.q_right));

    auto record = [&](const std::string& a, const std::string& b, double d) {
      report.min_clearance = std::min(report.min_clearance, d);
      if (d < 0.0) report.pairs.push_back({a, b, d});
      return stop_at_first && d < 0.0;
    };

    for (const auto& p : robot_pairs_) {
      const double d = shape_distance(links[p.arm_a][p.link_a], links[p.arm_b][p.link_b]);
      if (record(p.name_a, p.name_b, d)) return report;
    }
    for (int arm = 0; arm < 2; ++arm) {
      for (int l = 0; l < kLinksPerArm; ++l) {
        const std::string& ln = link_names_[arm][l];
        for (const auto& o : obstacles_) {
          if (allowed(ln, o.name)) continue;
          if (record(ln, o.name, shape_distance(links[arm][l], o.shape))) return report;
        }
      }
    }

    std::vector<NamedShape> tool_world;
    if (q.tool && q.tool->shapes) {
      for (const auto& s : *q.tool->shapes) tool_world.push_back({"tool_" + s.name, transform(q.tool->pose, s.shape)});
      for (int arm = 0; arm < 2; ++arm) {
        for (int l = 0; l < kLinksPerArm; ++l) {
          if (l == kGripperLink && q.tool->gripper_contact[arm]) continue;
          const std::string& ln = link_names_[arm][l];
          for (const auto& t : tool_world) {
            if (allowed(ln, t.name)) continue;
            if (record(ln, t.name, shape_distance(links[arm][l], t.shape))) return report;
          }
        }
      }
      for (const auto& t : tool_world) {
        for (const auto& o : obstacles_) {
          if (allowed(t.name, o.name)) continue;
          if (record(t.name, o.name, shape_distance(t.shape, o.shape))) return report;
        }
      }
    }

    if (q.cable) {
      for (int arm = 0; arm < 2; ++arm) {
        for (int l = 0; l < kLinksPerArm; ++l) {
          const std::string& ln = link_names_[arm][l];
          if (allowed(ln, "cable")) continue;
          if (record(ln, "cable", shape_distance(links[arm][l], *q.cable))) return report;
        }
      }
    }
    return report;
  }

private:
  struct LinkPair {
    int arm_a, link_a, arm_b, link_b;
    std::string name_a, name_b;
  };

  static std::pair<std::string, std::string> ordered(const std::string& a, const std::string& b) {
    return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
  }

  void rebuild_pairs() {
    for (int arm = 0; arm < 2; ++arm)
      for (int l = 0; l < kLinksPerArm; ++l) link_names_[arm][l] = link_name(static_cast<ArmId>(arm), l);
    robot_pairs_.clear();
    for (int arm = 0; arm < 2; ++arm) {
      for (int i = 0; i < kLinksPerArm; ++i) {
        for (int j = i + 2; j < kLinksPerArm; ++j) {
          if (allowed(link_names_[arm][i], link_names_[arm][j])) continue;
          robot_pairs_.push_back({arm, i, arm, j, link_names_[arm][i], link_names_[arm][j]});
        }
      }
    }
    for (int i = 0; i < kLinksPerArm; ++i) {
      for (int j = 0; j < kLinksPerArm; ++j) {
        if (allowed(link_names_[0][i], link_names_[1][j])) continue;
        robot_pairs_.push_back({0, i, 1, j, link_names_[0][i], link_names_[1][j]});
      }
    }
  }

  std::vector<NamedShape> obstacles_;
  std::array<ArmGeometry, 2> geometry_{};
  std::set<std::pair<std::string, std::string>> allowed_;
  std::array<std::array<std::string, kLinksPerArm>, 2> link_names_;
  std::vector<LinkPair> robot_pairs_;
};

inline CollisionReport robot_in_collision(const CollisionWorld& world, const DualArm& robot,
                                          const CollisionQuery& query) {
  return world.check(robot, query);
}

}  // namespace tetherplan
