/**
 * @file regrasp_planner.hpp
 * @brief Regrasp graph search for a suspended tool with dual-arm handover.
 *
 * Nodes are grasp states: a single-arm grasp at the start pose, a two-arm
 * hold at one of the handover poses, or a single-arm grasp at the goal pose.
 * Edges are composite motions (approach, transfer, release/retreat) whose
 * joint-space interpolation is validated lazily when the search pops them.
 *
 * Constrained mode adds the cable bend check at every waypoint and treats
 * the straight cable above the untouched tool as an obstacle. Unconstrained
 * mode runs the same search without those two checks.
 */

#pragma once

#include "tetherplan/cable_constraint.hpp"
#include "tetherplan/collision.hpp"
#include "tetherplan/grasps.hpp"
#include "tetherplan/planner_types.hpp"
#include "tetherplan/random.hpp"
#include "tetherplan/scene.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <string>
#include <tuple>
#include <vector>

namespace tetherplan {

class PlanningError : public Error {
public:
  using Error::Error;
};

class NoFeasibleStartGraspError : public PlanningError {
public:
  NoFeasibleStartGraspError() : PlanningError("NoFeasibleStartGrasp: every start grasp failed IK, collision or cable checks") {}
};

class NoFeasibleGoalGraspError : public PlanningError {
public:
  NoFeasibleGoalGraspError() : PlanningError("NoFeasibleGoalGrasp: every goal grasp failed IK, collision or bend checks") {}
};

enum class FailureReason { None, Collision, CableCollision, BendViolation, IkInconsistent };

inline const char* to_string(FailureReason r) {
  switch (r) {
    case FailureReason::None: return "none";
    case FailureReason::Collision: return "collision";
    case FailureReason::CableCollision: return "cable_collision";
    case FailureReason::BendViolation: return "bend_violation";
    case FailureReason::IkInconsistent: return "ik_inconsistent";
  }
  return "unknown";
}

struct EdgeCheck {
  bool valid = true;
  FailureReason reason = FailureReason::None;
  int waypoint = -1;
  std::vector<Waypoint> waypoints;   // checked waypoints (all of them when valid)

  explicit operator bool() const { return valid; }
};

/// Six default handover poses on a sphere between the two arm bases: the
/// tool centre sits on the sphere and the tool is tilted towards the centre.
inline std::vector<Pose> default_handover_poses(const DualArm& robot) {
  const Vec3 mid = 0.5 * (robot.left.base_pose.translation + robot.right.base_pose.translation);
  const Vec3 centre = mid + Vec3(0.32, 0.0, 0.32);
  // Tool orientations (roll, pitch, yaw in degrees), upright to inverted.
  static const std::array<Vec3, 12> rpy_deg{
      Vec3(0, 0, 0),   Vec3(0, 45, 0),  Vec3(0, -45, 0),  Vec3(45, 0, 0),
      Vec3(-45, 0, 0), Vec3(0, 90, 0),  Vec3(90, 0, 0),   Vec3(-90, 0, 0),
      Vec3(0, 135, 0), Vec3(135, 0, 0), Vec3(-135, 0, 0), Vec3(180, 0, 0)};
  std::vector<Pose> out;
  for (const Vec3& a : rpy_deg) out.push_back(make_pose(centre, deg2rad(1.0) * a));
  return out;
}

// ============================================================================
// Regrasp graph
// ============================================================================

/// IK solution of one grasp candidate at one object pose. The other arm is
/// assumed at home.
struct GraspIk {
  JointConfig q = JointConfig::Zero();
  JointConfig pregrasp = JointConfig::Zero();
};

enum class NodeKind { Root, StartGrasp, Handover, Goal };

struct NodeKey {
  NodeKind kind = NodeKind::Root;
  int pose = -1;    // handover pose index
  int first = -1;   // grasp candidate (giver for handover)
  int second = -1;  // receiver candidate for handover

  auto operator<=>(const NodeKey&) const = default;
};

struct RegraspNode {
  NodeKey key;
  Pose object_pose;
  Holding holding;
  JointConfig q_left = JointConfig::Zero();
  JointConfig q_right = JointConfig::Zero();
  int handovers = 0;

  const JointConfig& q(ArmId a) const { return a == ArmId::Left ? q_left : q_right; }
  JointConfig& q(ArmId a) { return a == ArmId::Left ? q_left : q_right; }
};

class RegraspGraph {
public:
  static constexpr int kStartPose = 0;
  static constexpr int kGoalPose = 1;
  static constexpr int kFirstHandoverPose = 2;

  RegraspGraph(const Scene& scene, const Pose& start, const Pose& goal, const PlannerOptions& opts)
      : scene_(&scene), opts_(opts), start_(start), goal_(goal) {
    if (!is_orthonormal(start.rotation) || !is_orthonormal(goal.rotation))
      throw PlanningError("start/goal rotations must be orthonormal");
    grasps_ = sample_grasps(scene.tool, opts_);
    handover_poses_ = opts_.handover_poses.empty() ? default_handover_poses(scene.robot) : opts_.handover_poses;
    poses_ = {start_, goal_};
    poses_.insert(poses_.end(), handover_poses_.begin(), handover_poses_.end());
    table_.assign(poses_.size(), std::vector<std::optional<std::optional<GraspIk>>>(grasps_.size()));
    cable_ = static_cable_for(start_);
    goal_is_start_ = poses_close(start_, goal_, 1e-9, 1e-9);

    bool any_start = false, any_goal = false;
    for (int c = 0; c < num_grasps(); ++c) {
      if (grasp_ik(kStartPose, c)) any_start = true;
      if (grasp_ik(kGoalPose, c)) any_goal = true;
    }
    if (!any_start) throw NoFeasibleStartGraspError();
    if (!any_goal) throw NoFeasibleGoalGraspError();
  }

  const Scene& scene() const { return *scene_; }
  const PlannerOptions& options() const { return opts_; }
  const std::vector<GraspCandidate>& grasps() const { return grasps_; }
  const std::vector<Pose>& handover_poses() const { return handover_poses_; }
  int num_grasps() const { return static_cast<int>(grasps_.size()); }
  const Pose& start() const { return start_; }
  const Pose& goal() const { return goal_; }
  const Capsule& cable() const { return cable_; }

  /// Feasible IK for grasp candidate `c` at pose index `p` (memoised). In
  /// constrained mode the pose must satisfy the bend constraint and start
  /// grasps must clear the pre-grasp cable.
  const std::optional<GraspIk>& grasp_ik(int p, int c) {
    auto& slot = table_[p][c];
    if (!slot) slot = solve(p, c);
    return *slot;
  }

  RegraspNode make_node(const NodeKey& key) {
    RegraspNode n;
    n.key = key;
    const auto& robot = scene_->robot;
    n.q_left = robot.home_left;
    n.q_right = robot.home_right;
    switch (key.kind) {
      case NodeKind::Root:
        n.object_pose = start_;
        break;
      case NodeKind::StartGrasp:
      case NodeKind::Goal: {
        const int p = key.kind == NodeKind::StartGrasp ? kStartPose : kGoalPose;
        const ArmId a = grasps_[key.first].arm;
        n.object_pose = poses_[p];
        n.holding.of(a) = key.first;
        n.q(a) = grasp_ik(p, key.first)->q;
        break;
      }
      case NodeKind::Handover: {
        const int p = kFirstHandoverPose + key.pose;
        n.object_pose = poses_[p];
        for (int c : {key.first, key.second}) {
          const ArmId a = grasps_[c].arm;
          n.holding.of(a) = c;
          n.q(a) = grasp_ik(p, c)->q;
        }
        break;
      }
    }
    return n;
  }

  bool is_goal(const RegraspNode& n) const {
    if (n.key.kind == NodeKind::Goal) return true;
    return n.key.kind == NodeKind::StartGrasp && goal_is_start_;
  }

  /// Keys reachable from `n` in one edge (feasible endpoint IK only; the
  /// motion itself is validated lazily).
  std::vector<NodeKey> successors(const RegraspNode& n) {
    std::vector<NodeKey> out;
    switch (n.key.kind) {
      case NodeKind::Root:
        for (int c = 0; c < num_grasps(); ++c)
          if (grasp_ik(kStartPose, c)) out.push_back({NodeKind::StartGrasp, -1, c, -1});
        break;
      case NodeKind::StartGrasp:
        if (!goal_is_start_ && grasp_ik(kGoalPose, n.key.first)) out.push_back({NodeKind::Goal, -1, n.key.first, -1});
        if (opts_.max_handovers > 0) add_handovers(n.key.first, -1, out);
        break;
      case NodeKind::Handover:
        if (grasp_ik(kGoalPose, n.key.second)) out.push_back({NodeKind::Goal, -1, n.key.second, -1});
        if (n.handovers < opts_.max_handovers) add_handovers(n.key.second, n.key.pose, out);
        break;
      case NodeKind::Goal:
        break;
    }
    return out;
  }

  struct Segment {
    ArmId arm = ArmId::Left;
    JointConfig from = JointConfig::Zero();
    JointConfig to = JointConfig::Zero();
    Holding holding;
    std::array<bool, 2> contact{false, false};
  };

  /// Motion segments realising the edge from -> to. Zero-length segments
  /// mark grasp/release events (holding changes).
  std::vector<Segment> edge_segments(const RegraspNode& from, const RegraspNode& to) {
    std::vector<Segment> segs;
    const auto& robot = scene_->robot;
    auto contact_of = [](ArmId a) {
      std::array<bool, 2> c{false, false};
      c[static_cast<int>(a)] = true;
      return c;
    };
    auto approach = [&](ArmId a, int pose, int cand, const Holding& held) {
      const GraspIk& g = *grasp_ik(pose, cand);
      segs.push_back({a, robot.home(a), g.pregrasp, held, {false, false}});
      segs.push_back({a, g.pregrasp, g.q, held, contact_of(a)});
      Holding after = held;
      after.of(a) = cand;
      segs.push_back({a, g.q, g.q, after, {false, false}});
    };
    auto release = [&](ArmId a, int pose, int cand, const Holding& remaining) {
      const GraspIk& g = *grasp_ik(pose, cand);
      segs.push_back({a, g.q, g.q, remaining, contact_of(a)});
      segs.push_back({a, g.q, g.pregrasp, remaining, contact_of(a)});
      segs.push_back({a, g.pregrasp, robot.home(a), remaining, {false, false}});
    };
    auto transfer = [&](ArmId a, const JointConfig& q0, const JointConfig& q1, const Holding& held) {
      segs.push_back({a, q0, q1, held, {false, false}});
    };

    const int to_pose = to.key.kind == NodeKind::Handover ? kFirstHandoverPose + to.key.pose : -1;
    switch (to.key.kind) {
      case NodeKind::StartGrasp:
        approach(grasps_[to.key.first].arm, kStartPose, to.key.first, Holding{});
        break;
      case NodeKind::Goal: {
        const int c = to.key.first;
        const ArmId a = grasps_[c].arm;
        Holding held;
        held.of(a) = c;
        if (from.key.kind == NodeKind::Handover) {
          const int giver = from.key.first;
          release(grasps_[giver].arm, kFirstHandoverPose + from.key.pose, giver, held);
        }
        transfer(a, from.q(a), grasp_ik(kGoalPose, c)->q, held);
        break;
      }
      case NodeKind::Handover: {
        const int carried = to.key.first, incoming = to.key.second;
        const ArmId a = grasps_[carried].arm, b = grasps_[incoming].arm;
        Holding held;
        held.of(a) = carried;
        if (from.key.kind == NodeKind::Handover) {
          const int giver = from.key.first;
          release(grasps_[giver].arm, kFirstHandoverPose + from.key.pose, giver, held);
        }
        transfer(a, from.q(a), grasp_ik(to_pose, carried)->q, held);
        approach(b, to_pose, incoming, held);
        break;
      }
      case NodeKind::Root:
        break;
    }
    return segs;
  }

  static double segments_cost(const std::vector<Segment>& segs) {
    double c = 0.0;
    for (const auto& s : segs) c += (s.to - s.from).norm();
    return c;
  }

  /// Object pose implied by a waypoint: carried by a holding arm, otherwise
  /// resting at the start pose.
  Pose object_pose_for(const JointConfig& ql, const JointConfig& qr, const Holding& h, ArmId prefer) const {
    for (ArmId a : {prefer, other_arm(prefer)}) {
      if (const auto& g = h.of(a)) {
        const JointConfig& q = a == ArmId::Left ? ql : qr;
        return compose(fk(scene_->robot.arm(a), q), inverse(grasps_[*g].grasp_pose_t));
      }
    }
    return start_;
  }

  /// Interpolates and checks every waypoint of the edge from -> to.
  EdgeCheck validate_edge(const RegraspNode& from, const RegraspNode& to) {
    EdgeCheck out;
    const auto segs = edge_segments(from, to);
    JointConfig ql = from.q_left, qr = from.q_right;
    Holding holding = from.holding;
    std::array<bool, 2> contact{false, false};
    auto emit = [&](ArmId moving) -> bool {
      Waypoint w;
      w.q_left = ql;
      w.q_right = qr;
      w.holding = holding;
      w.contact = contact;
      w.object_pose = object_pose_for(ql, qr, holding, moving);
      if (!out.waypoints.empty()) {
        const Waypoint& last = out.waypoints.back();
        if (last.q_left == w.q_left && last.q_right == w.q_right && last.holding == w.holding &&
            last.contact == w.contact)
          return true;
      }
      const FailureReason r = check_waypoint(w);
      out.waypoints.push_back(w);
      if (r != FailureReason::None) {
        out.valid = false;
        out.reason = r;
        out.waypoint = static_cast<int>(out.waypoints.size()) - 1;
        return false;
      }
      return true;
    };
    for (const auto& s : segs) {
      const double span = (s.to - s.from).cwiseAbs().maxCoeff();
      const int n = std::max(1, static_cast<int>(std::ceil(span / opts_.step - 1e-12)));
      holding = s.holding;
      contact = s.contact;
      for (int k = 0; k <= n; ++k) {
        const double t = static_cast<double>(k) / n;
        JointConfig q = s.from + t * (s.to - s.from);
        if (k == n) q = s.to;
        (s.arm == ArmId::Left ? ql : qr) = q;
        if (!emit(s.arm)) return out;
      }
    }
    if (segs.empty()) emit(ArmId::Left);
    return out;
  }

  /// Checks applied to every interpolated waypoint; fills theta and clearance.
  FailureReason check_waypoint(Waypoint& w) const {
    const Scene& s = *scene_;
    w.theta = bend_angle(w.object_pose, s.tool, s.balancer);
    const double pos_tol = 2.0 * opts_.ik.pos_tol, ori_tol = 2.0 * opts_.ik.ori_tol;
    for (ArmId a : {ArmId::Left, ArmId::Right}) {
      if (const auto& g = w.holding.of(a)) {
        const Pose expected = compose(w.object_pose, grasps_[*g].grasp_pose_t);
        if (!poses_close(fk(s.robot.arm(a), w.q(a)), expected, pos_tol, ori_tol)) return FailureReason::IkInconsistent;
      }
    }
    if (opts_.constrained && !check_bend(w.theta, opts_.bend)) return FailureReason::BendViolation;
    CollisionQuery q;
    q.q_left = w.q_left;
    q.q_right = w.q_right;
    q.tool = ToolState{w.object_pose, &s.tool.shapes,
                       {w.contact[0] || w.holding.holds(ArmId::Left), w.contact[1] || w.holding.holds(ArmId::Right)}};
    if (w.holding.empty()) {
      if (opts_.constrained) q.cable = cable_;
    } else if (opts_.check_dynamic_cable) {
      q.cable = cable_capsule(w.object_pose, s.tool, s.balancer);
    }
    const CollisionReport r = s.world.check(s.robot, q, true);
    w.min_clearance = r.min_clearance;
    if (!r.empty()) return r.involves("cable") ? FailureReason::CableCollision : FailureReason::Collision;
    return FailureReason::None;
  }

private:
  Capsule static_cable_for(const Pose& start) const { return static_cable(*scene_, start); }

  void add_handovers(int carried, int exclude_pose, std::vector<NodeKey>& out) {
    const ArmId receiver = other_arm(grasps_[carried].arm);
    for (int k = 0; k < static_cast<int>(handover_poses_.size()); ++k) {
      if (k == exclude_pose) continue;
      const int p = kFirstHandoverPose + k;
      if (!grasp_ik(p, carried)) continue;
      for (int d = 0; d < num_grasps(); ++d) {
        if (grasps_[d].arm != receiver) continue;
        if (grasp_ik(p, d)) out.push_back({NodeKind::Handover, k, carried, d});
      }
    }
  }

  std::optional<GraspIk> solve(int p, int c) const {
    const Scene& s = *scene_;
    const Pose& pose = poses_[p];
    const GraspCandidate& g = grasps_[c];
    const ArmId a = g.arm;
    const ArmModel& arm = s.robot.arm(a);

    if (opts_.constrained && !check_bend(pose, s.tool, s.balancer, opts_.bend)) return std::nullopt;

    IkOptions ik_opts = opts_.ik;
    ik_opts.seed = derive_seed(opts_.seed, {static_cast<std::uint64_t>(p), static_cast<std::uint64_t>(c)});
    const Pose target = compose(pose, g.grasp_pose_t);
    const Pose pre_target = compose(target, Pose{Rot3::Identity(), Vec3(0.0, 0.0, -opts_.pregrasp_offset)});
    const bool needs_pregrasp = p != kGoalPose;

    auto query_for = [&](const JointConfig& q, bool touching) {
      CollisionQuery cq;
      cq.q_left = a == ArmId::Left ? q : s.robot.home_left;
      cq.q_right = a == ArmId::Right ? q : s.robot.home_right;
      std::array<bool, 2> contact{false, false};
      contact[static_cast<int>(a)] = touching;
      cq.tool = ToolState{pose, &s.tool.shapes, contact};
      return cq;
    };
    // Mode-independent feasibility first so unconstrained nodes are a superset.
    GraspIk result;
    auto accept = [&](const JointConfig& q) {
      if (!s.world.check(s.robot, query_for(q, true), true).empty()) return false;
      if (!needs_pregrasp) {
        result.q = q;
        return true;
      }
      IkOptions pre_opts = ik_opts;
      pre_opts.restarts = 1;
      auto pre = ik(arm, pre_target, q, pre_opts);
      if (!pre || (*pre - q).cwiseAbs().maxCoeff() > 1.0) return false;
      if (!s.world.check(s.robot, query_for(*pre, false), true).empty()) return false;
      result.q = q;
      result.pregrasp = *pre;
      return true;
    };
    if (!ik(arm, target, s.robot.home(a), ik_opts, accept)) return std::nullopt;

    if (opts_.constrained && p == kStartPose) {
      for (const JointConfig* q : {&result.q, &result.pregrasp}) {
        CollisionQuery cq = query_for(*q, q == &result.q);
        cq.cable = cable_;
        if (!s.world.check(s.robot, cq, true).empty()) return std::nullopt;
      }
    }
    return result;
  }

  const Scene* scene_;
  PlannerOptions opts_;
  Pose start_, goal_;
  std::vector<GraspCandidate> grasps_;
  std::vector<Pose> handover_poses_;
  std::vector<Pose> poses_;
  std::vector<std::vector<std::optional<std::optional<GraspIk>>>> table_;
  Capsule cable_;
  bool goal_is_start_ = false;
};

inline RegraspGraph build_graph(const Scene& scene, const Pose& start, const Pose& goal, const PlannerOptions& opts) {
  return RegraspGraph(scene, start, goal, opts);
}

// ============================================================================
// Search
// ============================================================================

/// Uniform-cost search over the regrasp graph, ordered by edge count then
/// summed joint-space distance, validating each edge when it is popped.
inline PlanResult plan(const Scene& scene, const Pose& start, const Pose& goal, const PlannerOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  PlanResult result;
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };

  std::optional<RegraspGraph> graph;
  try {
    graph.emplace(scene, start, goal, opts);
  } catch (const PlanningError& e) {
    result.stats.failure = e.what();
    result.stats.runtime_s = elapsed();
    return result;
  }

  struct Entry {
    int edges;
    double cost;
    std::uint64_t seq;
    NodeKey key;
    int parent;  // index into closed
    bool operator>(const Entry& o) const {
      return std::tie(edges, cost, seq) > std::tie(o.edges, o.cost, o.seq);
    }
  };
  struct Closed {
    RegraspNode node;
    int parent;
    std::vector<Waypoint> waypoints;
  };

  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  std::vector<Closed> closed;
  std::map<NodeKey, int> closed_index;
  std::uint64_t seq = 0;
  open.push({0, 0.0, seq++, NodeKey{}, -1});

  while (!open.empty()) {
    if (result.stats.edges_validated >= opts.max_edges) {
      result.stats.failure = "edge budget exhausted";
      break;
    }
    if (elapsed() > opts.time_limit_s) {
      result.stats.failure = "time budget exhausted";
      break;
    }
    const Entry e = open.top();
    open.pop();
    if (closed_index.count(e.key)) continue;

    RegraspNode node = graph->make_node(e.key);
    std::vector<Waypoint> waypoints;
    if (e.parent >= 0) {
      const RegraspNode& parent = closed[e.parent].node;
      node.handovers = parent.handovers + (e.key.kind == NodeKind::Handover ? 1 : 0);
      EdgeCheck check = graph->validate_edge(parent, node);
      ++result.stats.edges_validated;
      if (!check) {
        ++result.stats.edges_rejected;
        continue;
      }
      waypoints = std::move(check.waypoints);
    } else {
      Waypoint w;
      w.q_left = node.q_left;
      w.q_right = node.q_right;
      w.object_pose = node.object_pose;
      const FailureReason r = graph->check_waypoint(w);
      if (r != FailureReason::None) {
        result.stats.failure = std::string("start state invalid: ") + to_string(r);
        break;
      }
      waypoints.push_back(w);
    }
    const int idx = static_cast<int>(closed.size());
    closed.push_back({node, e.parent, std::move(waypoints)});
    closed_index[e.key] = idx;
    ++result.stats.nodes_closed;

    if (graph->is_goal(node)) {
      std::vector<int> chain;
      for (int i = idx; i >= 0; i = closed[i].parent) chain.push_back(i);
      std::reverse(chain.begin(), chain.end());
      for (int i : chain) {
        const RegraspNode& n = closed[i].node;
        if (n.key.kind == NodeKind::Handover) ++result.stats.handovers;
        if (n.key.kind == NodeKind::Goal || n.key.kind == NodeKind::Handover) ++result.stats.transfers;
        for (const auto& w : closed[i].waypoints) {
          auto& out = result.plan.waypoints;
          if (!out.empty() && out.back().q_left == w.q_left && out.back().q_right == w.q_right &&
              out.back().holding == w.holding && out.back().contact == w.contact)
            continue;
          out.push_back(w);
        }
      }
      result.status = PlanStatus::Success;
      break;
    }

    for (const NodeKey& k : graph->successors(node)) {
      if (closed_index.count(k)) continue;
      const RegraspNode next = graph->make_node(k);
      const double c = RegraspGraph::segments_cost(graph->edge_segments(node, next));
      open.push({e.edges + 1, e.cost + c, seq++, k, idx});
    }
  }
  if (result.status != PlanStatus::Success && result.stats.failure.empty())
    result.stats.failure = "regrasp graph exhausted";
  result.stats.runtime_s = elapsed();
  return result;
}

// ============================================================================
// Post-hoc verification
// ============================================================================

struct PlanVerification {
  double max_theta = 0.0;
  int first_bend_violation = -1;     // waypoint with theta >= theta_max
  int first_cable_contact = -1;      // pre-grasp waypoint touching the static cable
  int first_collision = -1;          // any non-cable collision
  int first_inconsistent = -1;       // holding arm fk disagrees with object pose
  std::vector<CollisionPair> cable_pairs;

  bool sound() const {
    return first_bend_violation < 0 && first_cable_contact < 0 && first_collision < 0 && first_inconsistent < 0;
  }
};

/// Re-checks an emitted plan from its waypoint records alone: bend angle of
/// the recorded object pose, full collision reports (with the static cable
/// for every waypoint before the first grasp) and grasp consistency.
inline PlanVerification verify_plan(const MotionPlan& plan, const Scene& scene, const std::vector<GraspCandidate>& grasps,
                                    const BendConstraint& bend, const IkOptions& ik_tol = {}) {
  PlanVerification v;
  if (plan.empty()) return v;
  const Capsule cable = static_cable(scene, plan.waypoints.front().object_pose);
  const std::size_t first_grasp = plan.first_grasp_index();
  for (std::size_t i = 0; i < plan.size(); ++i) {
    const Waypoint& w = plan.waypoints[i];
    const int idx = static_cast<int>(i);
    const double theta = bend_angle(w.object_pose, scene.tool, scene.balancer);
    v.max_theta = std::max(v.max_theta, theta);
    if (!check_bend(theta, bend) && v.first_bend_violation < 0) v.first_bend_violation = idx;
    for (ArmId a : {ArmId::Left, ArmId::Right}) {
      const auto& g = w.holding.of(a);
      if (!g) continue;
      const Pose expected = compose(w.object_pose, grasps.at(*g).grasp_pose_t);
      if (!poses_close(fk(scene.robot.arm(a), w.q(a)), expected, 2.0 * ik_tol.pos_tol, 2.0 * ik_tol.ori_tol) &&
          v.first_inconsistent < 0)
        v.first_inconsistent = idx;
    }
    CollisionQuery q;
    q.q_left = w.q_left;
    q.q_right = w.q_right;
    q.tool = ToolState{w.object_pose, &scene.tool.shapes,
                       {w.contact[0] || w.holding.holds(ArmId::Left), w.contact[1] || w.holding.holds(ArmId::Right)}};
    if (i < first_grasp) q.cable = cable;
    const CollisionReport r = scene.world.check(scene.robot, q);
    for (const auto& p : r.pairs) {
      if (p.first == "cable" || p.second == "cable") {
        if (v.first_cable_contact < 0) v.first_cable_contact = idx;
        v.cable_pairs.push_back(p);
      } else if (v.first_collision < 0) {
        v.first_collision = idx;
      }
    }
  }
  return v;
}

}  // namespace tetherplan
