#include <doctest.h>

#include <cmath>

#include "sdrik/errors.hpp"
#include "sdrik/recovery.hpp"

using namespace sdrik;

namespace {

RobotGraph mixed_chain() {
  return load_model(R"({
    "links": ["base", "a", "b", "c"],
    "bases": {"base": {}},
    "joints": [
      {"parent": "base", "child": "a", "kind": "revolute", "offset": [0,0,0.2],
       "zero_rotation": [1,0,0, 0,0,-1, 0,1,0], "angle_limits": [-1.2, 1.2]},
      {"parent": "a", "child": "b", "kind": "revolute", "offset": [0.5,0,0],
       "angle_limits": [-1.0, 1.0]},
      {"parent": "b", "child": "c", "kind": "prismatic",
       "extension_limits": [0.1, 0.6]}
    ],
    "end_effector": "c"
  })");
}

}  // namespace

TEST_CASE("so3 distance") {
  Rng rng(83);
  for (int i = 0; i < 20; ++i) {
    CHECK(so3_distance(random_rotation(rng)) < 1e-12);
  }
  CHECK(so3_distance(2.0 * Mat3::Identity()) == doctest::Approx(std::sqrt(3.0)));
  // det < 0: projection flips to det +1; distance matches a direct search
  Mat3 refl = Mat3::Identity();
  refl(2, 2) = -1.0;
  Mat3 P = project_to_so3(refl);
  CHECK(P.determinant() == doctest::Approx(1.0));
  double direct = so3_distance(refl);
  double best = 1e100;
  for (int i = 0; i < 40000; ++i) {
    Mat3 R = random_rotation(rng);
    best = std::min(best, (refl - R).norm());
  }
  CHECK(direct <= best + 1e-3);
}

TEST_CASE("round trip: extraction recovers the sampled configuration") {
  RobotGraph g = mixed_chain();
  for (int trial = 0; trial < 10; ++trial) {
    JointConfig q = sample_config(g, 900 + trial);
    Relaxation rel(g);
    rel.assemble_default();
    ExtractedSolution sol = extract_solution(rel, rel.lift_config(q));
    for (const auto& [e, th] : q.angles) {
      CHECK(sol.config.angles[e] == doctest::Approx(th).epsilon(1e-8));
    }
    for (const auto& [e, t] : q.extensions) {
      CHECK(sol.config.extensions[e] == doctest::Approx(t).epsilon(1e-8));
    }
    auto poses = forward_kinematics(g, q);
    for (int v = 0; v < g.num_links(); ++v) {
      CHECK((sol.poses[v].rotation - poses[v].rotation).norm() < 1e-10);
      CHECK((sol.poses[v].translation - poses[v].translation).norm() < 1e-10);
    }
  }
}

TEST_CASE("identity state gives cumulative translations") {
  RobotGraph g = load_model(R"({
    "links": ["base", "a", "b"],
    "bases": {"base": {}},
    "joints": [
      {"parent": "base", "child": "a", "kind": "revolute", "offset": [1,0,0]},
      {"parent": "a", "child": "b", "kind": "revolute", "offset": [1,0,0]}
    ],
    "end_effector": "b"
  })");
  JointConfig q;
  q.angles[0] = q.angles[1] = 0.0;
  Relaxation rel(g);
  ExtractedSolution sol = extract_solution(rel, rel.lift_config(q));
  CHECK((sol.poses[1].translation - Vec3(1, 0, 0)).norm() < 1e-14);
  CHECK((sol.poses[2].translation - Vec3(2, 0, 0)).norm() < 1e-14);
}

TEST_CASE("verify fills every metric on a solved run") {
  RobotGraph g = mixed_chain();
  JointConfig q = sample_config(g, 77);
  GoalSpec goal;
  goal.target = forward_kinematics(g, q)[g.end_effector];
  Relaxation rel = assemble_relaxation(g, goal);
  RunResult res = run(rel);
  REQUIRE(res.status == RunStatus::RankOne);
  SolveReport rep = verify(rel, goal, res);
  CHECK(rep.certified);
  CHECK(rep.err_R <= 1e-6);
  CHECK(rep.err_T <= 1e-6);
  CHECK(rep.max_rank_gap <= 1e-3);
  CHECK(rep.max_so3_distance <= 1e-4);
  // self-consistency between the lifted objective and the FK re-evaluation
  CHECK(rep.objective_discrepancy <= 10.0 * rep.max_rank_gap + 1e-6);
  // joint limits: the exact ball within the polyhedral slack
  auto dirs = Relaxation::sphere_directions(rel.options().angle_directions);
  double cover = Relaxation::covering_radius(dirs);
  for (const auto& [e, slack] : rep.joint_limit_slack) {
    double rho = std::sqrt(2 - 2 * std::cos(g.edges[e].angle_limit));
    CHECK(slack >= -(rho * (1.0 / std::cos(cover) - 1.0) + 1e-8));
  }
  std::string js = rep.to_json();
  CHECK(js.find("\"err_T\"") != std::string::npos);
  CHECK(js.find("\"max_rank_gap\"") != std::string::npos);
}

TEST_CASE("stalled run is marked non-certified") {
  RobotGraph g = mixed_chain();
  JointConfig q = sample_config(g, 3);
  GoalSpec goal;
  goal.target = forward_kinematics(g, q)[g.end_effector];
  RankMinConfig cfg;
  cfg.max_iterations = 0;  // truncate before any rank minimization
  Relaxation rel = assemble_relaxation(g, goal);
  RunResult res = run(rel, cfg);
  SolveReport rep = verify(rel, goal, res);
  if (res.status == RunStatus::Stalled) {
    CHECK(!rep.certified);
    CHECK(rep.max_rank_gap > 1e-3);
  }
}
