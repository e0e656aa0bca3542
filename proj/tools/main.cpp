#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "sdrik/bench.hpp"
#include "sdrik/errors.hpp"

using namespace sdrik;

namespace {

#ifndef SDRIK_ROBOTS_DIR
#define SDRIK_ROBOTS_DIR "robots"
#endif

struct CommonOpts {
  std::string robot;
  std::string mode = "rot";
  std::string variant = "auto";
  double c0 = -1.0;  // negative: pick by mode
  bool adaptive_c = true;
  int restarts = 0;
  double eps1 = 1e-3;
  double eps2 = 1e-7;
  int kmax = 200;
  int mdirs = 42;
  std::uint64_t seed = 0;
  std::string out;
  int jobs = 0;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool needs_robot = true) {
  auto* r = cmd->add_option("--robot", o.robot, "robot description JSON file");
  if (needs_robot) r->required();
  cmd->add_option("--mode", o.mode, "lift mode: rot|quat")->check(CLI::IsMember({"rot", "quat"}));
  cmd->add_option("--variant", o.variant, "update variant: eigenmax|costrelax|auto")
      ->check(CLI::IsMember({"eigenmax", "costrelax", "auto"}));
  cmd->add_option("--c0", o.c0, "initial contraction factor for costrelax");
  cmd->add_flag("--adaptive-c,!--no-adaptive-c", o.adaptive_c, "adapt c on infeasible updates");
  cmd->add_option("--restarts", o.restarts, "restart attempts after a stall");
  cmd->add_option("--eps1", o.eps1, "rank tolerance");
  cmd->add_option("--eps2", o.eps2, "step-norm tolerance");
  cmd->add_option("--kmax", o.kmax, "iteration cap per rank-minimization cycle");
  cmd->add_option("--mdirs", o.mdirs, "joint-limit polyhedron direction count");
  cmd->add_option("--seed", o.seed, "random seed");
  cmd->add_option("--out", o.out, "output path (default stdout)");
  cmd->add_option("--jobs", o.jobs, "worker pool size (default: available parallelism)");
}

AssemblyOptions assembly_options(const CommonOpts& o) {
  AssemblyOptions a;
  a.mode = o.mode == "quat" ? LiftMode::Quaternion : LiftMode::Rotation;
  a.angle_directions = o.mdirs;
  return a;
}

RankMinConfig rankmin_config(const CommonOpts& o) {
  RankMinConfig c;
  c.eps_rank = o.eps1;
  c.eps_step = o.eps2;
  c.max_iterations = o.kmax;
  c.adaptive_c = o.adaptive_c;
  c.restart.max_attempts = o.restarts;
  c.seed = o.seed;
  c.c0 = o.c0 > 0 ? o.c0 : (o.mode == "quat" ? 0.05 : 0.2);
  if (o.variant == "eigenmax") c.variant = RankMinVariant::EigenMax;
  else if (o.variant == "costrelax") c.variant = RankMinVariant::CostRelax;
  else c.variant = RankMinVariant::Auto;
  return c;
}

GoalSpec load_goal(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("cannot open goal file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ModelError(std::string("goal file is not valid JSON: ") + e.what());
  }
  GoalSpec goal;
  if (j.contains("R")) {
    const auto& r = j["R"];
    if (!r.is_array() || r.size() != 9) throw ModelError("goal.R: expected 9 row-major numbers");
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 3; ++k) goal.target.rotation(i, k) = r[3 * i + k].get<double>();
    require_rotation(goal.target.rotation, "goal.R");
  }
  if (j.contains("T")) {
    const auto& t = j["T"];
    if (!t.is_array() || t.size() != 3) throw ModelError("goal.T: expected 3 numbers");
    for (int i = 0; i < 3; ++i) goal.target.translation[i] = t[i].get<double>();
  }
  if (j.contains("weight_rotation")) goal.weight_rotation = j["weight_rotation"].get<double>();
  if (j.contains("weight_translation"))
    goal.weight_translation = j["weight_translation"].get<double>();
  return goal;
}

std::ostream& open_out(const std::string& path, std::ofstream& file) {
  if (path.empty()) return std::cout;
  file.open(path);
  if (!file) throw ModelError("cannot open output path '" + path + "'");
  return file;
}

int cmd_solve(const CommonOpts& o, const std::string& goal_path, const std::string& trace_path) {
  RobotGraph g = load_model_file(o.robot);
  GoalSpec goal = load_goal(goal_path);
  Relaxation rel = assemble_relaxation(g, goal, assembly_options(o));
  RunResult res = run(rel, rankmin_config(o));
  SolveReport rep = verify(rel, goal, res);
  std::ofstream file;
  open_out(o.out, file) << rep.to_json() << "\n";
  if (!trace_path.empty()) {
    std::ofstream tf(trace_path);
    rep.trace.to_csv(tf);
  }
  switch (res.status) {
    case RunStatus::RankOne: return 0;
    case RunStatus::Infeasible: return 3;
    case RunStatus::Failed: return 4;
    case RunStatus::Stalled: return 5;
  }
  return 4;
}

int cmd_batch(const CommonOpts& o, const std::vector<double>& box, const std::vector<double>& euler,
              int count, const std::string& summary_path) {
  RobotGraph g = load_model_file(o.robot);
  GoalSampler sampler;
  sampler.t_lo = Vec3(box[0], box[2], box[4]);
  sampler.t_hi = Vec3(box[1], box[3], box[5]);
  if (!euler.empty()) {
    sampler.euler_lo = Vec3(euler[0], euler[2], euler[4]);
    sampler.euler_hi = Vec3(euler[1], euler[3], euler[5]);
  }
  for (int i = 0; i < 3; ++i) {
    if (sampler.t_lo[i] > sampler.t_hi[i]) throw ModelError("--box bounds out of order");
  }
  auto goals = sampled_goals(sampler, count, o.seed);
  auto items = run_batch(g, goals, rankmin_config(o), assembly_options(o), o.jobs);
  std::ofstream file;
  write_batch_csv(open_out(o.out, file), items);
  BatchSummary s = summarize(items);
  if (!summary_path.empty()) {
    std::ofstream sf(summary_path);
    write_summary_csv(sf, s);
  } else {
    write_summary_csv(std::cerr, s);
  }
  return 0;
}

int cmd_certify(const CommonOpts& o, const std::string& goal_path) {
  RobotGraph g = load_model_file(o.robot);
  GoalSpec goal = load_goal(goal_path);
  CertifyResult res = certify(g, goal, assembly_options(o));
  nlohmann::json j;
  j["feasible"] = res.feasible;
  j["certified_infeasible"] = res.certified_infeasible;
  j["solver_status"] = to_string(res.solver_status);
  j["iterations"] = res.iterations;
  j["seconds"] = res.seconds;
  std::ofstream file;
  open_out(o.out, file) << j.dump(2) << "\n";
  return 0;
}

int cmd_stewart(CommonOpts o, const std::string& which, const std::string& goals_path,
                int count) {
  if (o.robot.empty()) {
    o.robot = std::string(SDRIK_ROBOTS_DIR) + "/stewart_" + which + ".json";
  }
  RobotGraph g = load_model_file(o.robot);
  std::vector<GoalSpec> goals;
  if (!goals_path.empty()) {
    std::ifstream in(goals_path);
    if (!in) throw ModelError("cannot open goals file '" + goals_path + "'");
    nlohmann::json arr;
    in >> arr;
    for (const auto& j : arr) {
      GoalSpec goal;
      for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) goal.target.rotation(i, k) = j["R"][3 * i + k].get<double>();
      for (int i = 0; i < 3; ++i) goal.target.translation[i] = j["T"][i].get<double>();
      goals.push_back(goal);
    }
  } else {
    // the platform evaluation box
    GoalSampler sampler;
    sampler.t_lo = Vec3(0.2, -0.3, 0.8);
    sampler.t_hi = Vec3(0.8, 0.3, 1.05);
    sampler.euler_lo = Vec3(-M_PI / 3, -M_PI / 12, -M_PI / 12);
    sampler.euler_hi = Vec3(M_PI / 3, M_PI / 12, M_PI / 12);
    goals = sampled_goals(sampler, count, o.seed);
  }
  RankMinConfig cfg = rankmin_config(o);
  AssemblyOptions aopts = assembly_options(o);
  std::vector<StewartCase> cases;
  for (const auto& goal : goals) cases.push_back(stewart_case(g, goal, cfg, aopts));
  std::ofstream file;
  write_stewart_csv(open_out(o.out, file), cases);
  int solved = 0;
  double mean_err = 0.0;
  for (const auto& sc : cases) {
    if (sc.report.status == RunStatus::RankOne) {
      ++solved;
      mean_err += sc.mean_error_vs_achieved;
    }
  }
  std::cerr << "stewart: " << solved << "/" << cases.size() << " solved";
  if (solved > 0) std::cerr << ", mean per-leg extension error " << mean_err / solved;
  std::cerr << "\n";
  return 0;
}

int cmd_roundtrip(const CommonOpts& o, int n) {
  RobotGraph g = load_model_file(o.robot);
  auto goals = roundtrip_goals(g, n, o.seed);
  auto items = run_batch(g, goals, rankmin_config(o), assembly_options(o), o.jobs);
  int pass = 0;
  for (const auto& it : items) {
    if (it.harness_error) continue;
    if (it.report.status == RunStatus::RankOne && it.report.f_lifted <= 1e-6) ++pass;
  }
  std::ofstream file;
  write_batch_csv(open_out(o.out, file), items);
  std::cerr << "roundtrip: " << pass << "/" << n << " passed\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"inverse kinematics via semidefinite relaxation and rank minimization"};
  app.require_subcommand(1);

  CommonOpts o_solve, o_batch, o_certify, o_stewart, o_roundtrip;
  std::string goal_path, trace_path, summary_path, goals_path, which = "griffis_duffy";
  std::vector<double> box, euler;
  int count = 50, n_round = 25;

  auto* c_solve = app.add_subcommand("solve", "solve one inverse-kinematics problem");
  add_common(c_solve, o_solve);
  c_solve->add_option("--goal", goal_path, "goal pose JSON file")->required();
  c_solve->add_option("--trace", trace_path, "write the eigenvalue trace CSV here");

  auto* c_batch = app.add_subcommand("batch", "solve a batch of sampled goals");
  add_common(c_batch, o_batch);
  c_batch->add_option("--box", box, "translation box x0 x1 y0 y1 z0 z1")->expected(6)->required();
  c_batch->add_option("--euler", euler, "euler ranges a0 a1 b0 b1 c0 c1 (Rz Ry Rx)")->expected(6);
  c_batch->add_option("--count", count, "number of goals");
  c_batch->add_option("--summary", summary_path, "write the aggregate CSV here");

  auto* c_certify = app.add_subcommand("certify", "feasibility certificate for one goal");
  add_common(c_certify, o_certify);
  c_certify->add_option("--goal", goal_path, "goal pose JSON file")->required();

  auto* c_stewart = app.add_subcommand("stewart", "platform solves vs the analytic leg oracle");
  add_common(c_stewart, o_stewart, false);
  c_stewart->add_option("--geometry", which, "griffis_duffy|dietmaier")
      ->check(CLI::IsMember({"griffis_duffy", "dietmaier"}));
  c_stewart->add_option("--goals", goals_path, "JSON array of goal poses");
  c_stewart->add_option("--count", count, "number of sampled poses");

  auto* c_round = app.add_subcommand("roundtrip", "forward-kinematics round-trip check");
  add_common(c_round, o_roundtrip);
  c_round->add_option("--n", n_round, "number of sampled configurations");

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_solve->parsed()) return cmd_solve(o_solve, goal_path, trace_path);
    if (c_batch->parsed()) return cmd_batch(o_batch, box, euler, count, summary_path);
    if (c_certify->parsed()) return cmd_certify(o_certify, goal_path);
    if (c_stewart->parsed()) return cmd_stewart(o_stewart, which, goals_path, count);
    if (c_round->parsed()) return cmd_roundtrip(o_roundtrip, n_round);
  } catch (const ModelError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
