// tetherplan command line: plan, sweep, torque.

#include "tetherplan/tetherplan.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace tetherplan;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNoPlan = 1;
constexpr int kExitInput = 2;

struct InputError : Error {
  using Error::Error;
};

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  return out;
}

Vec3 rpy_rad(const std::vector<double>& deg) {
  if (deg.size() != 3) throw InputError("expected three angles (roll pitch yaw, degrees)");
  return {deg2rad(deg[0]), deg2rad(deg[1]), deg2rad(deg[2])};
}

Scene load_with_log(const std::string& scene, const std::string& log_path) {
  if (log_path.empty()) return load_scene(scene);
  std::ofstream log = open_out(log_path);
  return load_scene(scene, &log);
}

struct PlanArgs {
  std::string scene = "default";
  std::vector<double> start_rpy{0.0, 0.0, 0.0};
  std::vector<double> goal_rpy{0.0, 0.0, 0.0};
  bool constrained = false;
  bool unconstrained = false;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string log;
};

int run_plan(const PlanArgs& a) {
  const Scene scene = load_with_log(a.scene, a.log);
  PlannerOptions opts = scene.planner;
  opts.constrained = !a.unconstrained;
  if (a.seed) opts.seed = *a.seed;
  const Pose start = offset_pose(scene.start_pose, rpy_rad(a.start_rpy));
  const Pose goal = offset_pose(scene.goal_pose, rpy_rad(a.goal_rpy));

  const PlanResult r = plan(scene, start, goal, opts);
  const Outcome o = classify(r, scene, opts);
  if (!a.out.empty()) {
    std::ofstream out = open_out(a.out);
    write_plan_csv(out, r.plan);
  }
  std::cout << "mode," << (opts.constrained ? "constrained" : "unconstrained") << "\n"
            << "label," << to_string(o.label) << "\n"
            << "symbol," << symbol(o.label) << "\n"
            << "waypoints," << r.plan.size() << "\n"
            << "theta_max_deg," << detail::fmt(rad2deg(o.theta_max), 3) << "\n"
            << "first_violation," << o.first_violation << "\n"
            << "edges_validated," << r.stats.edges_validated << "\n"
            << "handovers," << r.stats.handovers << "\n";
  if (!r.success()) std::cout << "reason," << r.stats.failure << "\n";
  std::cerr << "runtime " << detail::fmt(r.stats.runtime_s, 3) << " s\n";
  return r.success() ? kExitOk : kExitNoPlan;
}

struct SweepArgs {
  std::string scene = "default";
  std::string out_dir = "sweep_out";
  std::uint64_t seed = 0;
};

int run_sweep(const SweepArgs& a) {
  fs::create_directories(a.out_dir);
  const fs::path dir(a.out_dir);
  std::ofstream log = open_out((dir / "run.log").string());
  const Scene scene = load_scene(a.scene, &log);
  const int threads = sweep_threads();
  log << "# seed " << a.seed << ", threads " << threads << "\n";

  const SweepReport rep = sweep(scene, default_grid(), a.seed, threads);

  {
    std::ofstream out = open_out((dir / "grid.txt").string());
    write_grid_text(out, rep);
    write_torque_summary(out, rep);
  }
  {
    std::ofstream out = open_out((dir / "sweep.csv").string());
    write_sweep_csv(out, rep);
  }
  {
    std::ofstream out = open_out((dir / "torque.csv").string());
    write_torque_sweep_csv(out, rep);
  }
  for (const auto& c : rep.cells) {
    for (int m = 0; m < kModes; ++m) {
      log << "cell " << c.row << "," << c.col << " " << mode_name(m) << " " << to_string(c.outcome[m].label) << " "
          << detail::fmt(c.result[m].stats.runtime_s, 3) << " s";
      if (!c.result[m].stats.failure.empty()) log << " (" << c.result[m].stats.failure << ")";
      log << "\n";
    }
  }
  write_grid_text(std::cout, rep);
  write_torque_summary(std::cout, rep);
  return kExitOk;
}

struct TorqueArgs {
  std::vector<std::string> plan_files;
  std::string scene = "default";
  std::string out;
};

MotionPlan read_plan_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open plan file '" + path + "'");
  return read_plan_csv(in);
}

int run_torque(const TorqueArgs& a) {
  if (a.plan_files.empty() || a.plan_files.size() > 2) throw InputError("give one or two --plan-file options");
  const Scene scene = load_scene(a.scene);
  std::vector<TorqueTrace> traces;
  for (const auto& p : a.plan_files) traces.push_back(trace_plan(read_plan_file(p), scene));

  std::ostringstream text;
  if (traces.size() == 1) {
    write_torque_csv(text, traces[0]);
  } else {
    write_torque_comparison_csv(text, compare_max_torque(traces[0], traces[1]));
  }
  if (a.out.empty()) {
    std::cout << text.str();
  } else {
    std::ofstream out = open_out(a.out);
    out << text.str();
    if (traces.size() == 2) std::cout << text.str();
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regrasp planning for a tool hanging from a balancer cable"};
  app.require_subcommand(1);

  PlanArgs pa;
  auto* plan_cmd = app.add_subcommand("plan", "Plan one start/goal task");
  plan_cmd->add_option("--scene", pa.scene, "Scene file, or 'default'");
  plan_cmd->add_option("--start-rpy", pa.start_rpy, "Start offset roll pitch yaw (deg, tool frame)")->expected(3);
  plan_cmd->add_option("--goal-rpy", pa.goal_rpy, "Goal offset roll pitch yaw (deg, tool frame)")->expected(3);
  auto* c_flag = plan_cmd->add_flag("--constrained", pa.constrained, "Bend and cable constraints on (default)");
  auto* u_flag = plan_cmd->add_flag("--unconstrained", pa.unconstrained, "Bend and pre-grasp cable checks off");
  c_flag->excludes(u_flag);
  plan_cmd->add_option("--seed", pa.seed, "Master seed (default: scene planner.seed)");
  plan_cmd->add_option("--out", pa.out, "Plan CSV output path");
  plan_cmd->add_option("--log", pa.log, "Write the resolved scene here");

  SweepArgs sa;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run the 8x5 start/goal grid in both modes");
  sweep_cmd->add_option("--scene", sa.scene, "Scene file, or 'default'");
  sweep_cmd->add_option("--out-dir", sa.out_dir, "Output directory");
  sweep_cmd->add_option("--seed", sa.seed, "Master seed");

  TorqueArgs ta;
  auto* torque_cmd = app.add_subcommand("torque", "Cable torques along a plan, or compare two plans");
  torque_cmd->add_option("--plan-file", ta.plan_files, "Plan CSV (repeat once to compare: first vs second)")
      ->required();
  torque_cmd->add_option("--scene", ta.scene, "Scene file, or 'default'");
  torque_cmd->add_option("--out", ta.out, "CSV output path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return kExitInput;
  }

  try {
    if (*plan_cmd) return run_plan(pa);
    if (*sweep_cmd) return run_sweep(sa);
    if (*torque_cmd) return run_torque(ta);
  } catch (const std::exception& e) {
    // Scene, CSV and argument problems all end up here.
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}
