#include "sdrik/bench.hpp"

#include <atomic>
#include <cmath>
#include <ostream>
#include <thread>

#include "sdrik/errors.hpp"

namespace sdrik {

Pose GoalSampler::sample(Rng& rng) const {
  Pose p;
  for (int i = 0; i < 3; ++i) p.translation[i] = rng.uniform(t_lo[i], t_hi[i]);
  double a = rng.uniform(euler_lo[0], euler_hi[0]);
  double b = rng.uniform(euler_lo[1], euler_hi[1]);
  double c = rng.uniform(euler_lo[2], euler_hi[2]);
  p.rotation = rot_zyx(a, b, c);
  return p;
}

double reach_bound(const RobotGraph& g) {
  double base = 0.0;
  for (const auto& [link, pose] : g.base_poses) base = std::max(base, pose.translation.norm());
  double sum = 0.0;
  for (const auto& e : g.edges) {
    if (e.kind == JointKind::Prismatic) {
      sum += std::max(std::abs(e.ext_lo), std::abs(e.ext_hi)) * std::sqrt(3.0);
    } else {
      sum += e.offset.norm() * std::sqrt(3.0);
    }
  }
  return base + sum;
}

std::vector<GoalSpec> roundtrip_goals(const RobotGraph& g, int n, std::uint64_t seed) {
  std::vector<GoalSpec> goals;
  for (int i = 0; i < n; ++i) {
    JointConfig q = sample_config(g, Rng::substream(seed, i));
    GoalSpec goal;
    goal.target = forward_kinematics(g, q)[g.end_effector];
    goals.push_back(goal);
  }
  return goals;
}

std::vector<GoalSpec> out_of_reach_goals(const RobotGraph& g, int n, std::uint64_t seed,
                                         double margin) {
  std::vector<GoalSpec> goals = roundtrip_goals(g, n, seed);
  double bound = reach_bound(g);
  Rng rng(Rng::substream(seed, 0xbeef));
  for (auto& goal : goals) {
    Vec3 dir(rng.normal(), rng.normal(), rng.normal());
    dir.normalize();
    goal.target.translation += dir * (bound + margin);
  }
  return goals;
}

std::vector<GoalSpec> sampled_goals(const GoalSampler& sampler, int n, std::uint64_t seed) {
  std::vector<GoalSpec> goals;
  for (int i = 0; i < n; ++i) {
    Rng rng(Rng::substream(seed, i));
    GoalSpec goal;
    goal.target = sampler.sample(rng);
    goals.push_back(goal);
  }
  return goals;
}

std::vector<BatchItem> run_batch(const RobotGraph& g, const std::vector<GoalSpec>& goals,
                                 const RankMinConfig& cfg, const AssemblyOptions& aopts,
                                 int jobs) {
  std::vector<BatchItem> items(goals.size());
  if (jobs <= 0) jobs = static_cast<int>(std::thread::hardware_concurrency());
  jobs = std::max(1, std::min<int>(jobs, static_cast<int>(goals.size())));
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (size_t i = next.fetch_add(1); i < goals.size(); i = next.fetch_add(1)) {
      BatchItem& item = items[i];
      item.index = static_cast<int>(i);
      item.goal = goals[i];
      try {
        Relaxation rel = assemble_relaxation(g, goals[i], aopts);
        RunResult res = run(rel, cfg);
        item.report = verify(rel, goals[i], res);
      } catch (const std::exception& e) {
        item.harness_error = true;
        item.error_text = e.what();
      }
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return items;
}

BatchSummary summarize(const std::vector<BatchItem>& items) {
  BatchSummary s;
  s.count = static_cast<int>(items.size());
  int solved = 0;
  for (const auto& it : items) {
    if (it.harness_error) {
      ++s.harness_errors;
      continue;
    }
    switch (it.report.status) {
      case RunStatus::RankOne: ++s.rank_one; break;
      case RunStatus::Stalled: ++s.stalled; break;
      case RunStatus::Infeasible: ++s.infeasible; break;
      case RunStatus::Failed: ++s.failed; break;
    }
    s.mean_seconds += it.report.seconds;
    if (it.report.status == RunStatus::RankOne) {
      ++solved;
      s.mean_err_R += it.report.err_R;
      s.mean_err_T += it.report.err_T;
      s.mean_iterations += it.report.iterations;
      s.max_rank_gap = std::max(s.max_rank_gap, it.report.max_rank_gap);
      s.max_so3_distance = std::max(s.max_so3_distance, it.report.max_so3_distance);
    }
  }
  if (solved > 0) {
    s.mean_err_R /= solved;
    s.mean_err_T /= solved;
    s.mean_iterations /= solved;
  }
  if (s.count > 0) {
    s.mean_seconds /= s.count;
    s.success_rate = static_cast<double>(s.rank_one) / s.count;
  }
  return s;
}

void write_batch_csv(std::ostream& os, const std::vector<BatchItem>& items) {
  os << "index,status,certified,f_lifted,err_R,err_T,max_rank_gap,max_so3_distance,"
        "max_closure_residual,iterations,restarts,variant,goal_x,goal_y,goal_z,seconds\n";
  os.precision(17);
  for (const auto& it : items) {
    if (it.harness_error) {
      os << it.index << ",error,,,,,,,,,,,,,,\n";
      continue;
    }
    const SolveReport& r = it.report;
    os << it.index << ',' << to_string(r.status) << ',' << (r.certified ? 1 : 0) << ','
       << r.f_lifted << ',' << r.err_R << ',' << r.err_T << ',' << r.max_rank_gap << ','
       << r.max_so3_distance << ',' << r.max_closure_residual << ',' << r.iterations << ','
       << r.restarts << ',' << r.variant << ',' << it.goal.target.translation[0] << ','
       << it.goal.target.translation[1] << ',' << it.goal.target.translation[2] << ','
       << r.seconds << '\n';
  }
}

void write_summary_csv(std::ostream& os, const BatchSummary& s) {
  os << "count,rank_one,stalled,infeasible,failed,harness_errors,success_rate,"
        "mean_err_R,mean_err_T,mean_iterations,max_rank_gap,max_so3_distance,mean_seconds\n";
  os.precision(17);
  os << s.count << ',' << s.rank_one << ',' << s.stalled << ',' << s.infeasible << ','
     << s.failed << ',' << s.harness_errors << ',' << s.success_rate << ',' << s.mean_err_R
     << ',' << s.mean_err_T << ',' << s.mean_iterations << ',' << s.max_rank_gap << ','
     << s.max_so3_distance << ',' << s.mean_seconds << '\n';
}

CertifyResult certify(const RobotGraph& g, const GoalSpec& goal, AssemblyOptions aopts,
                      SolveSettings settings) {
  Relaxation rel = assemble_relaxation(g, goal, aopts);
  rel.assemble_stationarity();
  rel.program().clear_objective();
  SolverResult res = solve(rel.program(), settings);
  CertifyResult out;
  out.solver_status = res.status;
  out.iterations = res.iterations;
  out.seconds = res.wall_time;
  out.feasible = res.status == SolveStatus::Optimal;
  out.certified_infeasible = res.status == SolveStatus::Infeasible && res.has_dual_certificate;
  return out;
}

StewartCase stewart_case(const RobotGraph& g, const GoalSpec& goal, const RankMinConfig& cfg,
                         const AssemblyOptions& aopts) {
  StewartCase sc;
  sc.goal = goal;
  Relaxation rel = assemble_relaxation(g, goal, aopts);
  RunResult res = run(rel, cfg);
  sc.report = verify(rel, goal, res);
  if (res.status == RunStatus::RankOne || res.status == RunStatus::Stalled) {
    StewartAnchors an = stewart_anchors(g);
    for (int leg : an.legs) {
      const JointEdge& e = g.edges[leg];
      double tau = sc.report.config.extensions.count(leg)
                       ? sc.report.config.extensions.at(leg)
                       : 0.0;
      sc.recovered_lengths.push_back(e.ext_lo + tau * (e.ext_hi - e.ext_lo));
    }
    sc.oracle_at_goal = stewart_inverse_legs(g, goal.target);
    sc.oracle_at_achieved = stewart_inverse_legs(g, sc.report.poses[g.end_effector]);
    for (size_t i = 0; i < sc.recovered_lengths.size(); ++i) {
      double err = std::abs(sc.recovered_lengths[i] - sc.oracle_at_achieved[i]);
      sc.max_error_vs_achieved = std::max(sc.max_error_vs_achieved, err);
      sc.mean_error_vs_achieved += err / sc.recovered_lengths.size();
    }
  }
  return sc;
}

void write_stewart_csv(std::ostream& os, const std::vector<StewartCase>& cases) {
  os << "index,status,f_lifted,max_rank_gap,iterations";
  for (int i = 1; i <= 6; ++i) os << ",len" << i << ",oracle_achieved" << i << ",oracle_goal" << i;
  os << ",mean_error_vs_achieved,max_error_vs_achieved,seconds\n";
  os.precision(17);
  for (size_t k = 0; k < cases.size(); ++k) {
    const StewartCase& sc = cases[k];
    os << k << ',' << to_string(sc.report.status) << ',' << sc.report.f_lifted << ','
       << sc.report.max_rank_gap << ',' << sc.report.iterations;
    for (int i = 0; i < 6; ++i) {
      if (sc.recovered_lengths.size() == 6) {
        os << ',' << sc.recovered_lengths[i] << ',' << sc.oracle_at_achieved[i] << ','
           << sc.oracle_at_goal[i];
      } else {
        os << ",,,";
      }
    }
    os << ',' << sc.mean_error_vs_achieved << ',' << sc.max_error_vs_achieved << ','
       << sc.report.seconds << '\n';
  }
}

}  // namespace sdrik
