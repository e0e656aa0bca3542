#include <doctest.h>

#include <sstream>

#include "sdrik/bench.hpp"

using namespace sdrik;

namespace {

RobotGraph planar2() { return load_model_file(std::string(SDRIK_ROBOTS_DIR) + "/planar_arm_2.json"); }

std::string csv_without_timing(const std::string& csv) {
  std::istringstream in(csv);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    auto pos = line.rfind(',');
    out << line.substr(0, pos) << '\n';
  }
  return out.str();
}

}  // namespace

TEST_CASE("reach bound dominates every fk pose") {
  RobotGraph g = planar2();
  double bound = reach_bound(g);
  for (int i = 0; i < 50; ++i) {
    auto poses = forward_kinematics(g, sample_config(g, i));
    CHECK(poses[g.end_effector].translation.norm() <= bound);
  }
}

TEST_CASE("goal generators are deterministic") {
  RobotGraph g = planar2();
  auto a = roundtrip_goals(g, 5, 42);
  auto b = roundtrip_goals(g, 5, 42);
  for (int i = 0; i < 5; ++i) {
    CHECK((a[i].target.translation - b[i].target.translation).norm() == 0.0);
    CHECK((a[i].target.rotation - b[i].target.rotation).norm() == 0.0);
  }
  auto c = roundtrip_goals(g, 5, 43);
  CHECK((a[0].target.translation - c[0].target.translation).norm() > 0.0);

  GoalSampler sampler;
  sampler.t_lo = Vec3(-1, -1, 0);
  sampler.t_hi = Vec3(1, 1, 2);
  sampler.euler_lo = Vec3(-1, -0.5, -0.5);
  sampler.euler_hi = Vec3(1, 0.5, 0.5);
  auto s1 = sampled_goals(sampler, 3, 7);
  auto s2 = sampled_goals(sampler, 3, 7);
  for (int i = 0; i < 3; ++i) {
    CHECK((s1[i].target.translation - s2[i].target.translation).norm() == 0.0);
    CHECK(is_rotation(s1[i].target.rotation));
  }
}

TEST_CASE("batch: identical spec and seed give identical csv modulo timing") {
  RobotGraph g = planar2();
  auto goals = roundtrip_goals(g, 4, 11);
  RankMinConfig cfg;
  AssemblyOptions aopts;
  auto items1 = run_batch(g, goals, cfg, aopts, 2);
  auto items2 = run_batch(g, goals, cfg, aopts, 1);  // different pool size
  std::ostringstream c1, c2;
  write_batch_csv(c1, items1);
  write_batch_csv(c2, items2);
  CHECK(csv_without_timing(c1.str()) == csv_without_timing(c2.str()));

  BatchSummary s = summarize(items1);
  CHECK(s.count == 4);
  CHECK(s.rank_one == 4);
  CHECK(s.success_rate == 1.0);
  CHECK(s.mean_err_T <= 1e-6);
}

TEST_CASE("batch isolation: a poisoned item does not disturb the others") {
  RobotGraph g = planar2();
  auto goals = roundtrip_goals(g, 3, 21);
  std::vector<GoalSpec> poisoned = goals;
  poisoned[1].target.translation[0] = std::numeric_limits<double>::quiet_NaN();
  RankMinConfig cfg;
  AssemblyOptions aopts;
  auto clean = run_batch(g, {goals[0], goals[2]}, cfg, aopts, 1);
  auto mixed = run_batch(g, poisoned, cfg, aopts, 1);
  CHECK(mixed[1].harness_error);
  CHECK(mixed[0].report.err_T == clean[0].report.err_T);
  CHECK(mixed[2].report.err_T == clean[1].report.err_T);
}

TEST_CASE("certify: no false certificates, reliable true ones") {
  RobotGraph g = planar2();
  auto feasible = roundtrip_goals(g, 3, 31);
  for (const auto& goal : feasible) {
    CertifyResult res = certify(g, goal);
    CHECK(res.feasible);
    CHECK(!res.certified_infeasible);
  }
  auto out = out_of_reach_goals(g, 3, 31);
  for (const auto& goal : out) {
    CertifyResult res = certify(g, goal);
    CHECK(res.certified_infeasible);
  }
}

TEST_CASE("stewart: one feasible platform pose solves and matches the oracle") {
  RobotGraph g = load_model_file(std::string(SDRIK_ROBOTS_DIR) + "/stewart_griffis_duffy.json");
  GoalSpec goal;
  goal.target.translation = Vec3(0.5, 0.0, 0.9);
  goal.target.rotation = rot_z(0.2);
  auto legs = stewart_inverse_legs(g, goal.target);
  for (double l : legs) {
    CHECK(l > 0.0002);
    CHECK(l < 1.0);  // the pose is inside the leg workspace
  }
  RankMinConfig cfg;
  StewartCase sc = stewart_case(g, goal, cfg, AssemblyOptions{});
  REQUIRE(sc.report.status == RunStatus::RankOne);
  CHECK(sc.report.err_T <= 1e-6);
  CHECK(sc.mean_error_vs_achieved <= 1e-4);
  // extensions should also match the goal-pose oracle since the goal is met
  for (int i = 0; i < 6; ++i) {
    CHECK(std::abs(sc.recovered_lengths[i] - sc.oracle_at_goal[i]) <= 1e-4);
  }
}
