/**
 * @file scene_io.hpp
 * @brief JSON scene files: parsing, validation, defaults and serialisation.
 *
 * Every key is optional; missing keys take the values of default_scene().
 * Unknown keys are rejected. Lengths are metres, angles in the file are
 * degrees unless the key name says otherwise (`*_rad`). The schema is
 * documented in README.md.
 */

#pragma once

#include "tetherplan/regrasp_planner.hpp"
#include "tetherplan/robot_model.hpp"
#include "tetherplan/scene.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <initializer_list>
#include <ostream>
#include <sstream>
#include <string>

namespace tetherplan {

class ParseError : public Error {
public:
  using Error::Error;
};

using Json = nlohmann::ordered_json;

/// The bundled scene: two UR3-like arms on a table, a screwdriver-like tool
/// hanging from a balancer in front of the robot.
inline Scene default_scene() {
  Scene s;
  s.robot.left = ur3_arm({rot_z(deg2rad(-30.0)), {0.0, 0.22, 0.0}});
  s.robot.right = ur3_arm({rot_z(deg2rad(30.0)), {0.0, -0.22, 0.0}});
  s.robot.home_left = deg2rad(1.0) * (JointConfig() << 55.0, -18.5, 74.6, 34.0, -90.0, -65.0).finished();
  s.robot.home_right = deg2rad(1.0) * (JointConfig() << -117.6, -18.5, 74.6, 34.0, -90.0, -177.6).finished();

  s.balancer.anchor = {0.30, 0.0, 0.95};
  s.balancer.reference_dir = Vec3::UnitZ();
  s.balancer.max_load = 2.0;
  s.balancer.cable_radius = 0.01;

  s.tool.connector_dir = Vec3::UnitZ();
  s.tool.connector_point = {0.0, 0.0, 0.08};
  s.tool.handle = {{0.0, 0.0, -0.06}, {0.0, 0.0, 0.06}, 0.02};
  s.tool.shapes = {
      {"body", Capsule{{0.0, 0.0, -0.16}, {0.0, 0.0, 0.06}, 0.02}},
      {"housing", Box{{Rot3::Identity(), {0.0, 0.0, 0.07}}, {0.025, 0.025, 0.01}}},
  };

  std::vector<NamedShape> obstacles{
      {"table", Box{{Rot3::Identity(), {0.25, 0.0, -0.02}}, {0.6, 0.7, 0.02}}},
  };
  s.world = CollisionWorld(std::move(obstacles), ArmGeometry{}, ArmGeometry{},
                           {{"left_link0", "table"}, {"right_link0", "table"}});

  s.start_pose = {Rot3::Identity(), {0.30, 0.0, 0.30}};
  s.goal_pose = make_pose({0.30, -0.06, 0.30}, {0.0, deg2rad(25.0), deg2rad(90.0)});
  s.planner.handover_poses = default_handover_poses(s.robot);
  return s;
}

namespace detail {

inline void check_keys(const Json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ParseError(path + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) throw ParseError("unknown key '" + it.key() + "' at " + path);
  }
}

inline double num(const Json& j, const std::string& path) {
  if (!j.is_number()) throw ParseError(path + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ValidationError(path + ": must be finite");
  return v;
}

inline Vec3 vec3(const Json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) throw ParseError(path + ": expected an array of 3 numbers");
  return {num(j[0], path + "[0]"), num(j[1], path + "[1]"), num(j[2], path + "[2]")};
}

inline Json to_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

inline Vec3 rad2deg3(const Vec3& v) { return {rad2deg(v.x()), rad2deg(v.y()), rad2deg(v.z())}; }
inline Vec3 deg2rad3(const Vec3& v) { return {deg2rad(v.x()), deg2rad(v.y()), deg2rad(v.z())}; }

inline Pose pose(const Json& j, const std::string& path, const Pose& def) {
  check_keys(j, path, {"xyz", "rpy_deg"});
  Pose p = def;
  if (j.contains("xyz")) p.translation = vec3(j["xyz"], path + "/xyz");
  if (j.contains("rpy_deg")) {
    const Vec3 r = deg2rad3(vec3(j["rpy_deg"], path + "/rpy_deg"));
    p.rotation = rpy_to_rot(r.x(), r.y(), r.z());
  }
  return p;
}

inline Json to_json(const Pose& p) {
  return Json{{"xyz", to_json(p.translation)}, {"rpy_deg", to_json(rad2deg3(rot_to_rpy(p.rotation)))}};
}

template <typename T>
T get_or(const Json& j, const char* key, const std::string& path, T def) {
  if (!j.contains(key)) return def;
  const Json& v = j[key];
  const std::string p = path + "/" + key;
  if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) throw ParseError(p + ": expected a boolean");
    return v.get<bool>();
  } else if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer()) throw ParseError(p + ": expected an integer");
    return v.get<T>();
  } else {
    return num(v, p);
  }
}

inline Shape shape(const Json& j, const std::string& path, std::string& name) {
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string())
    throw ParseError(path + ": shape needs a string 'type'");
  if (!j.contains("name") || !j["name"].is_string()) throw ParseError(path + ": shape needs a string 'name'");
  name = j["name"].get<std::string>();
  const std::string type = j["type"].get<std::string>();
  auto positive = [&](double v, const char* what) {
    if (!(v > 0.0)) throw ValidationError(path + "/" + what + ": must be positive");
    return v;
  };
  if (type == "capsule") {
    check_keys(j, path, {"name", "type", "a", "b", "radius"});
    return Capsule{vec3(j.at("a"), path + "/a"), vec3(j.at("b"), path + "/b"), positive(num(j.at("radius"), path + "/radius"), "radius")};
  }
  if (type == "sphere") {
    check_keys(j, path, {"name", "type", "center", "radius"});
    return Sphere{vec3(j.at("center"), path + "/center"), positive(num(j.at("radius"), path + "/radius"), "radius")};
  }
  if (type == "box") {
    check_keys(j, path, {"name", "type", "pose", "half_extents"});
    const Vec3 h = vec3(j.at("half_extents"), path + "/half_extents");
    if (!(h.minCoeff() > 0.0)) throw ValidationError(path + "/half_extents: must be positive");
    return Box{j.contains("pose") ? pose(j["pose"], path + "/pose", {}) : Pose{}, h};
  }
  throw ParseError(path + "/type: unknown shape type '" + type + "'");
}

inline Json to_json(const NamedShape& s) {
  return std::visit(
      [&](const auto& v) -> Json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Capsule>) {
          return Json{{"name", s.name}, {"type", "capsule"}, {"a", to_json(v.a)}, {"b", to_json(v.b)}, {"radius", v.radius}};
        } else if constexpr (std::is_same_v<T, Sphere>) {
          return Json{{"name", s.name}, {"type", "sphere"}, {"center", to_json(v.center)}, {"radius", v.radius}};
        } else {
          return Json{{"name", s.name}, {"type", "box"}, {"pose", to_json(v.pose)}, {"half_extents", to_json(v.half_extents)}};
        }
      },
      s.shape);
}

inline std::vector<NamedShape> shapes(const Json& j, const std::string& path) {
  if (!j.is_array()) throw ParseError(path + ": expected an array of shapes");
  std::vector<NamedShape> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    NamedShape ns;
    ns.shape = shape(j[i], path + "[" + std::to_string(i) + "]", ns.name);
    for (const auto& o : out)
      if (o.name == ns.name) throw ValidationError(path + ": duplicate shape name '" + ns.name + "'");
    out.push_back(std::move(ns));
  }
  return out;
}

inline JointConfig joints_deg(const Json& j, const std::string& path) {
  if (!j.is_array() || j.size() != kArmDof) throw ParseError(path + ": expected an array of 6 numbers");
  JointConfig q;
  for (int i = 0; i < kArmDof; ++i) q[i] = deg2rad(num(j[i], path + "[" + std::to_string(i) + "]"));
  return q;
}

inline Json to_json_deg(const JointConfig& q) {
  Json a = Json::array();
  for (int i = 0; i < kArmDof; ++i) a.push_back(rad2deg(q[i]));
  return a;
}

inline void arm(const Json& j, const std::string& path, ArmModel& m, JointConfig& home, ArmGeometry& geom) {
  check_keys(j, path, {"base", "joints", "flange", "tcp", "home_deg", "link_radii", "gripper"});
  if (j.contains("base")) m.base_pose = pose(j["base"], path + "/base", m.base_pose);
  if (j.contains("joints")) {
    const Json& js = j["joints"];
    if (!js.is_array() || js.size() != kArmDof) throw ParseError(path + "/joints: expected 6 joint objects");
    for (int i = 0; i < kArmDof; ++i) {
      const std::string p = path + "/joints[" + std::to_string(i) + "]";
      check_keys(js[i], p, {"axis", "origin", "limits_deg"});
      auto& jt = m.joints[i];
      if (js[i].contains("axis")) jt.axis = vec3(js[i]["axis"], p + "/axis");
      if (js[i].contains("origin")) jt.origin = vec3(js[i]["origin"], p + "/origin");
      if (js[i].contains("limits_deg")) {
        const Json& l = js[i]["limits_deg"];
        if (!l.is_array() || l.size() != 2) throw ParseError(p + "/limits_deg: expected [lower, upper]");
        jt.lower = deg2rad(num(l[0], p + "/limits_deg[0]"));
        jt.upper = deg2rad(num(l[1], p + "/limits_deg[1]"));
      }
    }
  }
  if (j.contains("flange")) m.last_joint_to_flange = pose(j["flange"], path + "/flange", m.last_joint_to_flange);
  if (j.contains("tcp")) m.flange_to_tcp = pose(j["tcp"], path + "/tcp", m.flange_to_tcp);
  if (j.contains("home_deg")) home = joints_deg(j["home_deg"], path + "/home_deg");
  if (j.contains("link_radii")) {
    const Json& r = j["link_radii"];
    if (!r.is_array() || r.size() != geom.link_radii.size()) throw ParseError(path + "/link_radii: expected 7 numbers");
    for (std::size_t i = 0; i < geom.link_radii.size(); ++i) {
      geom.link_radii[i] = num(r[i], path + "/link_radii");
      if (!(geom.link_radii[i] > 0.0)) throw ValidationError(path + "/link_radii: must be positive");
    }
  }
  if (j.contains("gripper")) {
    const Json& g = j["gripper"];
    check_keys(g, path + "/gripper", {"a", "b", "radius"});
    if (g.contains("a")) geom.gripper.a = vec3(g["a"], path + "/gripper/a");
    if (g.contains("b")) geom.gripper.b = vec3(g["b"], path + "/gripper/b");
    geom.gripper.radius = get_or(g, "radius", path + "/gripper", geom.gripper.radius);
    if (!(geom.gripper.radius > 0.0)) throw ValidationError(path + "/gripper/radius: must be positive");
  }
}

inline Json arm_to_json(const ArmModel& m, const JointConfig& home, const ArmGeometry& geom) {
  Json joints = Json::array();
  for (const auto& jt : m.joints)
    joints.push_back(Json{{"axis", to_json(jt.axis)}, {"origin", to_json(jt.origin)},
                          {"limits_deg", Json::array({rad2deg(jt.lower), rad2deg(jt.upper)})}});
  Json radii = Json::array();
  for (double r : geom.link_radii) radii.push_back(r);
  return Json{{"base", to_json(m.base_pose)},
              {"joints", joints},
              {"flange", to_json(m.last_joint_to_flange)},
              {"tcp", to_json(m.flange_to_tcp)},
              {"home_deg", to_json_deg(home)},
              {"link_radii", radii},
              {"gripper", Json{{"a", to_json(geom.gripper.a)}, {"b", to_json(geom.gripper.b)}, {"radius", geom.gripper.radius}}}};
}

}  // namespace detail

/// Builds a scene from parsed JSON. Throws ParseError (structure, unknown
/// keys) or ValidationError (named field violates an invariant).
inline Scene scene_from_json(const Json& root) {
  using namespace detail;
  Scene s = default_scene();
  check_keys(root, "/", {"robot", "balancer", "tool", "obstacles", "allowed_pairs", "task", "planner"});

  ArmGeometry gl = s.world.geometry(ArmId::Left), gr = s.world.geometry(ArmId::Right);
  std::vector<NamedShape> obstacles = s.world.obstacles();
  std::vector<std::pair<std::string, std::string>> allowed{{"left_link0", "table"}, {"right_link0", "table"}};
  bool handovers_given = false;

  if (root.contains("robot")) {
    const Json& r = root["robot"];
    check_keys(r, "/robot", {"left", "right"});
    if (r.contains("left")) arm(r["left"], "/robot/left", s.robot.left, s.robot.home_left, gl);
    if (r.contains("right")) arm(r["right"], "/robot/right", s.robot.right, s.robot.home_right, gr);
  }
  if (root.contains("balancer")) {
    const Json& b = root["balancer"];
    check_keys(b, "/balancer", {"anchor", "reference_dir", "max_load_kg", "cable_radius"});
    if (b.contains("anchor")) s.balancer.anchor = vec3(b["anchor"], "/balancer/anchor");
    if (b.contains("reference_dir")) {
      const Vec3 a = vec3(b["reference_dir"], "/balancer/reference_dir");
      if (a.norm() < kMinNorm) throw ValidationError("/balancer/reference_dir: must be non-zero");
      s.balancer.reference_dir = a.normalized();
    }
    s.balancer.max_load = get_or(b, "max_load_kg", "/balancer", s.balancer.max_load);
    s.balancer.cable_radius = get_or(b, "cable_radius", "/balancer", s.balancer.cable_radius);
    if (!(s.balancer.max_load > 0.0)) throw ValidationError("/balancer/max_load_kg: must be positive");
    if (!(s.balancer.cable_radius > 0.0)) throw ValidationError("/balancer/cable_radius: must be positive");
  }
  if (root.contains("tool")) {
    const Json& t = root["tool"];
    check_keys(t, "/tool", {"connector_dir", "connector_point", "handle", "shapes"});
    if (t.contains("connector_dir")) {
      const Vec3 d = vec3(t["connector_dir"], "/tool/connector_dir");
      if (d.norm() < kMinNorm) throw ValidationError("/tool/connector_dir: must be non-zero");
      s.tool.connector_dir = d.normalized();
    }
    if (t.contains("connector_point")) s.tool.connector_point = vec3(t["connector_point"], "/tool/connector_point");
    if (t.contains("handle")) {
      const Json& h = t["handle"];
      check_keys(h, "/tool/handle", {"from", "to", "radius"});
      if (h.contains("from")) s.tool.handle.from = vec3(h["from"], "/tool/handle/from");
      if (h.contains("to")) s.tool.handle.to = vec3(h["to"], "/tool/handle/to");
      s.tool.handle.radius = get_or(h, "radius", "/tool/handle", s.tool.handle.radius);
    }
    if (t.contains("shapes")) s.tool.shapes = shapes(t["shapes"], "/tool/shapes");
  }
  if (root.contains("obstacles")) obstacles = shapes(root["obstacles"], "/obstacles");
  if (root.contains("allowed_pairs")) {
    const Json& a = root["allowed_pairs"];
    if (!a.is_array()) throw ParseError("/allowed_pairs: expected an array of [name, name] pairs");
    allowed.clear();
    for (const auto& p : a) {
      if (!p.is_array() || p.size() != 2 || !p[0].is_string() || !p[1].is_string())
        throw ParseError("/allowed_pairs: expected an array of [name, name] pairs");
      allowed.emplace_back(p[0].get<std::string>(), p[1].get<std::string>());
    }
  }
  if (root.contains("task")) {
    const Json& t = root["task"];
    check_keys(t, "/task", {"start", "goal"});
    if (t.contains("start")) s.start_pose = pose(t["start"], "/task/start", s.start_pose);
    if (t.contains("goal")) s.goal_pose = pose(t["goal"], "/task/goal", s.goal_pose);
  }
  if (root.contains("planner")) {
    const Json& p = root["planner"];
    const std::string path = "/planner";
    check_keys(p, path, {"theta_max_deg", "axial_samples", "rotation_samples", "finger_width", "step_rad",
                         "pregrasp_offset", "handover_poses", "seed", "max_edges", "time_limit_s",
                         "check_dynamic_cable", "max_handovers", "ik"});
    auto& o = s.planner;
    if (p.contains("theta_max_deg")) o.bend.theta_max = deg2rad(num(p["theta_max_deg"], path + "/theta_max_deg"));
    o.axial_samples = get_or(p, "axial_samples", path, o.axial_samples);
    o.rotation_samples = get_or(p, "rotation_samples", path, o.rotation_samples);
    o.finger_width = get_or(p, "finger_width", path, o.finger_width);
    o.step = get_or(p, "step_rad", path, o.step);
    o.pregrasp_offset = get_or(p, "pregrasp_offset", path, o.pregrasp_offset);
    o.seed = get_or(p, "seed", path, o.seed);
    o.max_edges = get_or(p, "max_edges", path, o.max_edges);
    o.time_limit_s = get_or(p, "time_limit_s", path, o.time_limit_s);
    o.check_dynamic_cable = get_or(p, "check_dynamic_cable", path, o.check_dynamic_cable);
    o.max_handovers = get_or(p, "max_handovers", path, o.max_handovers);
    if (p.contains("handover_poses")) {
      const Json& h = p["handover_poses"];
      if (!h.is_array()) throw ParseError(path + "/handover_poses: expected an array of poses");
      o.handover_poses.clear();
      for (std::size_t i = 0; i < h.size(); ++i)
        o.handover_poses.push_back(pose(h[i], path + "/handover_poses[" + std::to_string(i) + "]", {}));
      handovers_given = true;
    }
    if (p.contains("ik")) {
      const Json& k = p["ik"];
      check_keys(k, path + "/ik", {"max_iters", "restarts", "damping", "step_clamp_rad", "pos_tol", "ori_tol_rad"});
      o.ik.max_iters = get_or(k, "max_iters", path + "/ik", o.ik.max_iters);
      o.ik.restarts = get_or(k, "restarts", path + "/ik", o.ik.restarts);
      o.ik.damping = get_or(k, "damping", path + "/ik", o.ik.damping);
      o.ik.step_clamp = get_or(k, "step_clamp_rad", path + "/ik", o.ik.step_clamp);
      o.ik.pos_tol = get_or(k, "pos_tol", path + "/ik", o.ik.pos_tol);
      o.ik.ori_tol = get_or(k, "ori_tol_rad", path + "/ik", o.ik.ori_tol);
    }
  }
  if (!handovers_given) s.planner.handover_poses = default_handover_poses(s.robot);

  try {
    s.world = CollisionWorld(std::move(obstacles), gl, gr, allowed);
  } catch (const ModelError& e) {
    throw ValidationError(std::string("/obstacles: ") + e.what());
  }
  validate(s);
  return s;
}

inline Json scene_to_json(const Scene& s) {
  using namespace detail;
  Json obstacles = Json::array();
  for (const auto& o : s.world.obstacles()) obstacles.push_back(to_json(o));
  Json tool_shapes = Json::array();
  for (const auto& t : s.tool.shapes) tool_shapes.push_back(to_json(t));
  Json handovers = Json::array();
  for (const auto& h : s.planner.handover_poses) handovers.push_back(to_json(h));
  Json allowed = Json::array();
  for (const auto& [a, b] : s.world.allowed_pairs()) allowed.push_back(Json::array({a, b}));
  const auto& p = s.planner;
  return Json{
      {"robot", Json{{"left", arm_to_json(s.robot.left, s.robot.home_left, s.world.geometry(ArmId::Left))},
                     {"right", arm_to_json(s.robot.right, s.robot.home_right, s.world.geometry(ArmId::Right))}}},
      {"balancer", Json{{"anchor", to_json(s.balancer.anchor)},
                        {"reference_dir", to_json(s.balancer.reference_dir)},
                        {"max_load_kg", s.balancer.max_load},
                        {"cable_radius", s.balancer.cable_radius}}},
      {"tool", Json{{"connector_dir", to_json(s.tool.connector_dir)},
                    {"connector_point", to_json(s.tool.connector_point)},
                    {"handle", Json{{"from", to_json(s.tool.handle.from)}, {"to", to_json(s.tool.handle.to)}, {"radius", s.tool.handle.radius}}},
                    {"shapes", tool_shapes}}},
      {"obstacles", obstacles},
      {"allowed_pairs", allowed},
      {"task", Json{{"start", to_json(s.start_pose)}, {"goal", to_json(s.goal_pose)}}},
      {"planner", Json{{"theta_max_deg", rad2deg(p.bend.theta_max)},
                       {"axial_samples", p.axial_samples},
                       {"rotation_samples", p.rotation_samples},
                       {"finger_width", p.finger_width},
                       {"step_rad", p.step},
                       {"pregrasp_offset", p.pregrasp_offset},
                       {"handover_poses", handovers},
                       {"seed", p.seed},
                       {"max_edges", p.max_edges},
                       {"time_limit_s", p.time_limit_s},
                       {"check_dynamic_cable", p.check_dynamic_cable},
                       {"max_handovers", p.max_handovers},
                       {"ik", Json{{"max_iters", p.ik.max_iters},
                                   {"restarts", p.ik.restarts},
                                   {"damping", p.ik.damping},
                                   {"step_clamp_rad", p.ik.step_clamp},
                                   {"pos_tol", p.ik.pos_tol},
                                   {"ori_tol_rad", p.ik.ori_tol}}}}},
  };
}

/// Parses scene text. Syntax errors are reported with line and column.
inline Scene parse_scene(const std::string& text, std::ostream* log = nullptr) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError("syntax error at line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + e.what());
  }
  Scene s = scene_from_json(j);
  if (log) *log << "# resolved scene\n" << scene_to_json(s).dump(2) << "\n";
  return s;
}

/// Loads a scene file; the name "default" selects the bundled scene.
inline Scene load_scene(const std::string& path, std::ostream* log = nullptr) {
  if (path == "default") {
    Scene s = default_scene();
    validate(s);
    if (log) *log << "# resolved scene (default)\n" << scene_to_json(s).dump(2) << "\n";
    return s;
  }
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scene file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scene(ss.str(), log);
}

}  // namespace tetherplan
