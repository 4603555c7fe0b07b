/**
 * @file harness.hpp
 * @brief Outcome labels, the start/goal grid sweep, and the CSV formats.
 */

#pragma once

#include "tetherplan/grasps.hpp"
#include "tetherplan/regrasp_planner.hpp"
#include "tetherplan/scene.hpp"
#include "tetherplan/torque_model.hpp"

#include <atomic>
#include <cstdlib>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace tetherplan {

class CsvError : public Error {
public:
  using Error::Error;
};

// ============================================================================
// Outcomes
// ============================================================================

enum class Label { Success, BendViolation, CableCollision, NoPlan };

inline const char* to_string(Label l) {
  switch (l) {
    case Label::Success: return "Success";
    case Label::BendViolation: return "BendViolation";
    case Label::CableCollision: return "CableCollision";
    case Label::NoPlan: return "NoPlan";
  }
  return "?";
}

inline char symbol(Label l) {
  switch (l) {
    case Label::Success: return 'o';
    case Label::BendViolation: return 'x';
    case Label::CableCollision: return '*';
    case Label::NoPlan: return 'F';
  }
  return '?';
}

inline Label label_from_string(const std::string& s) {
  for (Label l : {Label::Success, Label::BendViolation, Label::CableCollision, Label::NoPlan}) {
    if (s == to_string(l) || (s.size() == 1 && s[0] == symbol(l))) return l;
  }
  throw CsvError("unknown outcome label '" + s + "'");
}

struct Outcome {
  Label label = Label::NoPlan;
  int first_violation = -1;   // waypoint index of the deciding violation
  double theta_max = 0.0;     // rad, over the plan (0 without a plan)
  double runtime_s = 0.0;
  std::string detail;
};

/// Post-hoc labelling. A plan that bends the cable past the threshold is a
/// BendViolation even if it also touched the cable before grasping.
inline Outcome classify(const PlanResult& r, const PlanVerification& v) {
  Outcome o;
  o.runtime_s = r.stats.runtime_s;
  if (!r.success()) {
    o.label = Label::NoPlan;
    o.detail = r.stats.failure;
    return o;
  }
  o.theta_max = v.max_theta;
  if (v.first_bend_violation >= 0) {
    o.label = Label::BendViolation;
    o.first_violation = v.first_bend_violation;
  } else if (v.first_cable_contact >= 0) {
    o.label = Label::CableCollision;
    o.first_violation = v.first_cable_contact;
  } else if (v.first_collision >= 0 || v.first_inconsistent >= 0) {
    // The planner checks these itself; reaching here means an invalid plan.
    o.label = Label::NoPlan;
    o.first_violation = v.first_collision >= 0 ? v.first_collision : v.first_inconsistent;
    o.detail = "plan failed post-hoc collision/consistency check";
  } else {
    o.label = Label::Success;
  }
  return o;
}

inline Outcome classify(const PlanResult& r, const Scene& scene, const PlannerOptions& opts) {
  if (!r.success()) return classify(r, PlanVerification{});
  return classify(r, verify_plan(r.plan, scene, sample_grasps(scene.tool, opts), opts.bend, opts.ik));
}

// ============================================================================
// Sweep
// ============================================================================

/// Rows: goal pitch offsets (deg, about the tool y axis). Columns: start roll
/// offsets (deg, about the tool x axis).
struct SweepGrid {
  std::vector<double> rows_deg;
  std::vector<double> cols_deg;

  std::size_t cells() const { return rows_deg.size() * cols_deg.size(); }
};

inline SweepGrid default_grid() { return {{0, 10, 15, 30, 45, 60, 75, 90}, {-20, -10, 0, 10, 20}}; }

inline constexpr int kModes = 2;
inline constexpr int kConstrained = 0;
inline constexpr int kUnconstrained = 1;

inline const char* mode_name(int mode) { return mode == kConstrained ? "constrained" : "unconstrained"; }

struct SweepCell {
  int row = 0;
  int col = 0;
  std::uint64_t seed = 0;
  std::array<Outcome, kModes> outcome;
  std::array<PlanResult, kModes> result;
};

struct TorqueAggregate {
  std::array<double, 2> mean_pct{0.0, 0.0};  // per arm
  std::array<int, 2> count{0, 0};
  double mean_all_pct = 0.0;                 // over every (cell, arm) entry
  int count_all = 0;
};

struct TorqueCellRow {
  int row = 0;
  int col = 0;
  TorqueComparison cmp;   // a = constrained, b = unconstrained
  bool both_labelled_success = false;
};

struct SweepReport {
  SweepGrid grid;
  std::uint64_t master_seed = 0;
  std::vector<SweepCell> cells;  // row-major
  std::vector<TorqueCellRow> torque;
  TorqueAggregate torque_planned;   // cells where both planners returned a plan
  TorqueAggregate torque_success;   // cells where both plans are labelled Success

  const SweepCell& cell(int r, int c) const { return cells.at(static_cast<std::size_t>(r) * grid.cols_deg.size() + c); }

  int count(int mode, Label l) const {
    int n = 0;
    for (const auto& c : cells) n += c.outcome[mode].label == l;
    return n;
  }
  /// successes / cells; nullopt for an empty grid.
  std::optional<double> success_rate(int mode) const {
    if (cells.empty()) return std::nullopt;
    return static_cast<double>(count(mode, Label::Success)) / static_cast<double>(cells.size());
  }
};

/// Per-cell seed; both planner modes of a cell share it.
inline std::uint64_t cell_seed(std::uint64_t master, int row, int col) {
  return derive_seed(master, {static_cast<std::uint64_t>(row), static_cast<std::uint64_t>(col)});
}

/// Worker count: TETHERPLAN_THREADS if set to a positive integer, else the
/// hardware concurrency.
inline int sweep_threads() {
  if (const char* env = std::getenv("TETHERPLAN_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

inline SweepCell run_cell(const Scene& scene, const SweepGrid& grid, std::uint64_t master, int r, int c) {
  SweepCell cell;
  cell.row = r;
  cell.col = c;
  cell.seed = cell_seed(master, r, c);
  const Pose start = start_with_roll(scene, deg2rad(grid.cols_deg[c]));
  const Pose goal = goal_with_pitch(scene, deg2rad(grid.rows_deg[r]));
  for (int mode = 0; mode < kModes; ++mode) {
    PlannerOptions opts = scene.planner;
    opts.constrained = mode == kConstrained;
    opts.seed = cell.seed;
    cell.result[mode] = plan(scene, start, goal, opts);
    cell.outcome[mode] = classify(cell.result[mode], scene, opts);
  }
  return cell;
}

inline void aggregate(TorqueAggregate& agg, const TorqueComparison& cmp) {
  for (int a = 0; a < 2; ++a) {
    if (!cmp.reduction_pct[a]) continue;
    agg.mean_pct[a] += *cmp.reduction_pct[a];
    ++agg.count[a];
    agg.mean_all_pct += *cmp.reduction_pct[a];
    ++agg.count_all;
  }
}

inline void finish(TorqueAggregate& agg) {
  for (int a = 0; a < 2; ++a)
    if (agg.count[a] > 0) agg.mean_pct[a] /= agg.count[a];
  if (agg.count_all > 0) agg.mean_all_pct /= agg.count_all;
}

/// Runs both planner modes on every grid cell. Cells run in parallel with
/// `threads` workers (0: sweep_threads()); the report does not depend on it.
inline SweepReport sweep(const Scene& scene, const SweepGrid& grid, std::uint64_t master_seed, int threads = 0) {
  SweepReport rep;
  rep.grid = grid;
  rep.master_seed = master_seed;
  const int n = static_cast<int>(grid.cells());
  rep.cells.resize(n);
  const int ncols = static_cast<int>(grid.cols_deg.size());

  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < n; i = next++) rep.cells[i] = run_cell(scene, grid, master_seed, i / ncols, i % ncols);
  };
  const int workers = std::min(threads > 0 ? threads : sweep_threads(), std::max(n, 1));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (const auto& cell : rep.cells) {
    const auto& rc = cell.result[kConstrained];
    const auto& ru = cell.result[kUnconstrained];
    if (!rc.success() || !ru.success()) continue;
    TorqueCellRow row;
    row.row = cell.row;
    row.col = cell.col;
    row.cmp = compare_max_torque(trace_plan(rc.plan, scene), trace_plan(ru.plan, scene));
    row.both_labelled_success =
        cell.outcome[kConstrained].label == Label::Success && cell.outcome[kUnconstrained].label == Label::Success;
    aggregate(rep.torque_planned, row.cmp);
    if (row.both_labelled_success) aggregate(rep.torque_success, row.cmp);
    rep.torque.push_back(row);
  }
  finish(rep.torque_planned);
  finish(rep.torque_success);
  return rep;
}

// ============================================================================
// Text and CSV output
// ============================================================================

namespace detail {

inline std::string fmt(double v, int precision) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(precision) << v;
  return os.str();
}

inline std::string fmt_rate(const std::optional<double>& r) { return r ? fmt(100.0 * *r, 1) + "%" : "n/a"; }

inline std::string fmt_opt(const std::optional<double>& v, int precision) { return v ? fmt(*v, precision) : ""; }

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

inline double to_double(const std::string& s, const std::string& what) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) throw CsvError("bad number '" + s + "' in " + what);
  return v;
}

inline int to_int(const std::string& s, const std::string& what) {
  char* end = nullptr;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size()) throw CsvError("bad integer '" + s + "' in " + what);
  return static_cast<int>(v);
}

inline std::string full(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace detail

/// Fixed-width grid, constrained block then unconstrained block.
inline void write_grid_text(std::ostream& os, const SweepReport& rep) {
  const auto& g = rep.grid;
  os << "rows: goal pitch offset (deg); columns: start roll offset (deg)\n";
  os << "o success  x bend violation  * cable collision  F no plan\n\n";
  for (int mode = 0; mode < kModes; ++mode) {
    os << mode_name(mode) << "\n" << std::setw(7) << "";
    for (double c : g.cols_deg) os << std::setw(6) << detail::fmt(c, 0);
    os << "\n";
    for (std::size_t r = 0; r < g.rows_deg.size(); ++r) {
      os << std::setw(7) << detail::fmt(g.rows_deg[r], 0);
      for (std::size_t c = 0; c < g.cols_deg.size(); ++c)
        os << std::setw(6) << symbol(rep.cell(static_cast<int>(r), static_cast<int>(c)).outcome[mode].label);
      os << "\n";
    }
    os << "success rate: " << detail::fmt_rate(rep.success_rate(mode)) << " (" << rep.count(mode, Label::Success) << "/"
       << rep.cells.size() << ")";
    os << "  x=" << rep.count(mode, Label::BendViolation) << " *=" << rep.count(mode, Label::CableCollision)
       << " F=" << rep.count(mode, Label::NoPlan) << "\n\n";
  }
}

inline void write_torque_summary(std::ostream& os, const SweepReport& rep) {
  auto line = [&](const char* name, const TorqueAggregate& a) {
    os << name << ": left " << (a.count[0] ? detail::fmt(a.mean_pct[0], 2) + "%" : "n/a") << " (n=" << a.count[0]
       << "), right " << (a.count[1] ? detail::fmt(a.mean_pct[1], 2) + "%" : "n/a") << " (n=" << a.count[1]
       << "), all " << (a.count_all ? detail::fmt(a.mean_all_pct, 2) + "%" : "n/a") << " (n=" << a.count_all << ")\n";
  };
  os << "mean max-torque reduction, constrained vs unconstrained\n";
  line("  both planners returned a plan", rep.torque_planned);
  line("  both plans labelled Success ", rep.torque_success);
}

inline const char* kSweepCsvHeader =
    "mode,row,col,goal_pitch_deg,start_roll_deg,label,symbol,theta_max_deg,first_violation,waypoints,edges_validated,"
    "handovers";

inline void write_sweep_csv(std::ostream& os, const SweepReport& rep) {
  os << kSweepCsvHeader << "\n";
  for (int mode = 0; mode < kModes; ++mode) {
    for (const auto& c : rep.cells) {
      const Outcome& o = c.outcome[mode];
      const PlanResult& r = c.result[mode];
      os << mode_name(mode) << "," << c.row << "," << c.col << "," << detail::fmt(rep.grid.rows_deg[c.row], 3) << ","
         << detail::fmt(rep.grid.cols_deg[c.col], 3) << "," << to_string(o.label) << "," << symbol(o.label) << ","
         << detail::fmt(rad2deg(o.theta_max), 6) << "," << o.first_violation << "," << r.plan.size() << ","
         << r.stats.edges_validated << "," << r.stats.handovers << "\n";
    }
  }
}

/// One parsed sweep CSV row.
struct SweepCsvRow {
  int mode = 0;
  int row = 0;
  int col = 0;
  double goal_pitch_deg = 0.0;
  double start_roll_deg = 0.0;
  Label label = Label::NoPlan;
};

inline std::vector<SweepCsvRow> read_sweep_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kSweepCsvHeader) throw CsvError("sweep CSV: missing or unexpected header");
  std::vector<SweepCsvRow> out;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = detail::split(line, ',');
    const std::string where = "sweep CSV line " + std::to_string(lineno);
    if (f.size() != 12) throw CsvError(where + ": expected 12 fields");
    SweepCsvRow r;
    if (f[0] == "constrained") r.mode = kConstrained;
    else if (f[0] == "unconstrained") r.mode = kUnconstrained;
    else throw CsvError(where + ": unknown mode '" + f[0] + "'");
    r.row = detail::to_int(f[1], where);
    r.col = detail::to_int(f[2], where);
    r.goal_pitch_deg = detail::to_double(f[3], where);
    r.start_roll_deg = detail::to_double(f[4], where);
    r.label = label_from_string(f[5]);
    if (label_from_string(f[6]) != r.label) throw CsvError(where + ": label and symbol disagree");
    out.push_back(r);
  }
  return out;
}

inline const char* kTorqueSweepCsvHeader =
    "row,col,goal_pitch_deg,start_roll_deg,arm,constrained_max_nm,unconstrained_max_nm,reduction_pct,both_success";

inline void write_torque_sweep_csv(std::ostream& os, const SweepReport& rep) {
  os << kTorqueSweepCsvHeader << "\n";
  for (const auto& t : rep.torque) {
    for (ArmId a : {ArmId::Left, ArmId::Right}) {
      const int i = static_cast<int>(a);
      if (!t.cmp.max_a[i] && !t.cmp.max_b[i]) continue;
      os << t.row << "," << t.col << "," << detail::fmt(rep.grid.rows_deg[t.row], 3) << ","
         << detail::fmt(rep.grid.cols_deg[t.col], 3) << "," << arm_name(a) << "," << detail::fmt_opt(t.cmp.max_a[i], 6)
         << "," << detail::fmt_opt(t.cmp.max_b[i], 6) << "," << detail::fmt_opt(t.cmp.reduction_pct[i], 4) << ","
         << (t.both_labelled_success ? 1 : 0) << "\n";
    }
  }
}

// ---------------------------------------------------------------------------
// Plan CSV
// ---------------------------------------------------------------------------

inline const char* kPlanCsvHeader =
    "index,qL1,qL2,qL3,qL4,qL5,qL6,qR1,qR2,qR3,qR4,qR5,qR6,qw,qx,qy,qz,x,y,z,holding,contact,theta_deg,min_clearance";

inline std::string holding_to_string(const Holding& h) {
  std::string s;
  for (ArmId a : {ArmId::Left, ArmId::Right}) {
    if (!h.of(a)) continue;
    if (!s.empty()) s += "|";
    s += std::string(1, arm_letter(a)) + ":" + std::to_string(*h.of(a));
  }
  return s.empty() ? "-" : s;
}

inline Holding holding_from_string(const std::string& s) {
  Holding h;
  if (s == "-") return h;
  for (const auto& part : detail::split(s, '|')) {
    if (part.size() < 3 || part[1] != ':' || (part[0] != 'L' && part[0] != 'R'))
      throw CsvError("bad holding field '" + s + "'");
    h.of(part[0] == 'L' ? ArmId::Left : ArmId::Right) = detail::to_int(part.substr(2), "holding");
  }
  return h;
}

inline std::string contact_to_string(const std::array<bool, 2>& c) {
  std::string s;
  if (c[0]) s += "L";
  if (c[1]) s += "R";
  return s.empty() ? "-" : s;
}

inline std::array<bool, 2> contact_from_string(const std::string& s) {
  if (s == "-") return {false, false};
  if (s == "L") return {true, false};
  if (s == "R") return {false, true};
  if (s == "LR") return {true, true};
  throw CsvError("bad contact field '" + s + "'");
}

/// Joint angles in radians, quaternion (w >= 0) and translation of the tool.
inline void write_plan_csv(std::ostream& os, const MotionPlan& plan) {
  os << kPlanCsvHeader << "\n";
  for (std::size_t i = 0; i < plan.size(); ++i) {
    const Waypoint& w = plan.waypoints[i];
    Eigen::Quaterniond q(w.object_pose.rotation);
    q.normalize();
    if (q.w() < 0.0) q.coeffs() *= -1.0;
    os << i;
    for (int j = 0; j < kArmDof; ++j) os << "," << detail::full(w.q_left[j]);
    for (int j = 0; j < kArmDof; ++j) os << "," << detail::full(w.q_right[j]);
    os << "," << detail::full(q.w()) << "," << detail::full(q.x()) << "," << detail::full(q.y()) << ","
       << detail::full(q.z());
    for (int j = 0; j < 3; ++j) os << "," << detail::full(w.object_pose.translation[j]);
    os << "," << holding_to_string(w.holding) << "," << contact_to_string(w.contact) << ","
       << detail::full(rad2deg(w.theta)) << "," << detail::full(w.min_clearance) << "\n";
  }
}

inline MotionPlan read_plan_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kPlanCsvHeader) throw CsvError("plan CSV: missing or unexpected header");
  MotionPlan plan;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = detail::split(line, ',');
    const std::string where = "plan CSV line " + std::to_string(lineno);
    if (f.size() != 24) throw CsvError(where + ": expected 24 fields");
    if (detail::to_int(f[0], where) != static_cast<int>(plan.size())) throw CsvError(where + ": index out of sequence");
    Waypoint w;
    for (int j = 0; j < kArmDof; ++j) {
      w.q_left[j] = detail::to_double(f[1 + j], where);
      w.q_right[j] = detail::to_double(f[7 + j], where);
    }
    Eigen::Quaterniond q(detail::to_double(f[13], where), detail::to_double(f[14], where),
                         detail::to_double(f[15], where), detail::to_double(f[16], where));
    if (q.norm() < 1e-9) throw CsvError(where + ": zero quaternion");
    w.object_pose.rotation = q.normalized().toRotationMatrix();
    for (int j = 0; j < 3; ++j) w.object_pose.translation[j] = detail::to_double(f[17 + j], where);
    w.holding = holding_from_string(f[20]);
    w.contact = contact_from_string(f[21]);
    w.theta = deg2rad(detail::to_double(f[22], where));
    w.min_clearance = detail::to_double(f[23], where);
    plan.waypoints.push_back(w);
  }
  return plan;
}

// ---------------------------------------------------------------------------
// Torque trace CSV
// ---------------------------------------------------------------------------

inline const char* kTorqueCsvHeader = "index,arm,tau1,tau2,tau3,tau4,tau5,tau6,tau_abs_max";

inline void write_torque_csv(std::ostream& os, const TorqueTrace& trace) {
  os << kTorqueCsvHeader << "\n";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    for (ArmId a : {ArmId::Left, ArmId::Right}) {
      const auto& t = trace.rows[i].of(a);
      if (!t) continue;
      os << i << "," << arm_name(a);
      for (int j = 0; j < kArmDof; ++j) os << "," << detail::fmt((*t)[j], 6);
      os << "," << detail::fmt(t->cwiseAbs().maxCoeff(), 6) << "\n";
    }
  }
}

inline const char* kTorqueCompareCsvHeader = "arm,max_a_nm,max_b_nm,reduction_pct";

inline void write_torque_comparison_csv(std::ostream& os, const TorqueComparison& cmp) {
  os << kTorqueCompareCsvHeader << "\n";
  for (ArmId a : {ArmId::Left, ArmId::Right}) {
    const int i = static_cast<int>(a);
    os << arm_name(a) << "," << detail::fmt_opt(cmp.max_a[i], 6) << "," << detail::fmt_opt(cmp.max_b[i], 6) << ","
       << detail::fmt_opt(cmp.reduction_pct[i], 4) << "\n";
  }
}

}  // namespace tetherplan
