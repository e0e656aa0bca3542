#include <doctest.h>

#include <cmath>

#include "sdrik/assembly.hpp"
#include "sdrik/errors.hpp"
#include "sdrik/solver.hpp"

using namespace sdrik;

namespace {

RobotGraph planar2() {
  return load_model(R"({
    "links": ["base", "a", "b"],
    "bases": {"base": {}},
    "joints": [
      {"parent": "base", "child": "a", "kind": "revolute", "offset": [0,0,0]},
      {"parent": "a", "child": "b", "kind": "revolute", "offset": [1,0,0]}
    ],
    "end_effector": "b"
  })");
}

RobotGraph limited_chain() {
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

GoalSpec goal_from_config(const RobotGraph& g, const JointConfig& q) {
  auto poses = forward_kinematics(g, q);
  GoalSpec goal;
  goal.target = poses[g.end_effector];
  return goal;
}

}  // namespace

TEST_CASE("containment: lifted feasible configs satisfy every assembled row") {
  for (LiftMode mode : {LiftMode::Rotation, LiftMode::Quaternion}) {
    RobotGraph g = limited_chain();
    AssemblyOptions opts;
    opts.mode = mode;
    Relaxation rel(g, opts);
    rel.assemble_default();
    for (int trial = 0; trial < 100; ++trial) {
      JointConfig q = sample_config(g, 1000 + trial);
      VecX x = rel.pack(rel.lift_config(q));
      CHECK(rel.program().max_eq_residual(x) < 1e-9);
      CHECK(rel.program().max_ineq_violation(x) < 1e-9);
      CHECK(rel.is_member(x, 1e-9));
    }
  }
}

TEST_CASE("objective equivalence: f(lift(q)) equals the direct pose cost") {
  RobotGraph g = limited_chain();
  Rng rng(71);
  for (int trial = 0; trial < 30; ++trial) {
    JointConfig q = sample_config(g, 500 + trial);
    GoalSpec goal;
    goal.target.rotation = random_rotation(rng);
    goal.target.translation = Vec3(rng.normal(), rng.normal(), rng.normal());
    Relaxation rel = assemble_relaxation(g, goal);
    VecX x = rel.pack(rel.lift_config(q));
    auto poses = forward_kinematics(g, q);
    const Pose& ee = poses[g.end_effector];
    double direct = (ee.rotation - goal.target.rotation).squaredNorm() +
                    (ee.translation - goal.target.translation).squaredNorm();
    CHECK(rel.program().objective_value(x) == doctest::Approx(direct).epsilon(1e-10));
  }
}

TEST_CASE("axis rows force the shared z-axis") {
  RobotGraph g = planar2();
  Relaxation rel(g);
  rel.assemble_structure();
  rel.assemble_axis();
  JointConfig q;
  q.angles[0] = 0.4;
  q.angles[1] = -0.9;
  VecX x = rel.pack(rel.lift_config(q));
  CHECK(rel.program().max_eq_residual(x) < 1e-12);
  // rows reference the lift, so a z-misaligned state violates them
  LiftedState st = rel.lift_config(q);
  st.rotations[1] = lift_rotation(rot_x(0.3));  // breaks the shared axis with link 2
  VecX bad = rel.pack(st);
  CHECK(rel.program().max_eq_residual(bad) > 1e-3);
}

TEST_CASE("angle polyhedron radius and violation behavior") {
  CHECK(std::sqrt(2 - 2 * std::cos(M_PI / 3)) == doctest::Approx(1.0));
  CHECK(std::sqrt(2 - 2 * std::cos(M_PI / 2)) == doctest::Approx(M_SQRT2));

  RobotGraph g = load_model(R"({
    "links": ["base", "arm"],
    "bases": {"base": {}},
    "joints": [{"parent": "base", "child": "arm", "kind": "revolute",
                "angle_limits": [-1.0, 1.0]}],
    "end_effector": "arm"
  })");
  Relaxation rel(g);
  rel.assemble_angle_polyhedron(42);
  auto eval = [&](double theta) {
    JointConfig q;
    q.angles[0] = 0.0;
    LiftedState st = rel.lift_config(q);
    st.rotations[1] = lift_rotation(rot_z(theta));  // bypass FK limit checking
    return rel.program().max_ineq_violation(rel.pack(st));
  };
  CHECK(eval(0.9) <= 0.0 + 1e-12);    // inside the limit: all rows hold
  CHECK(eval(1.0) <= 1e-12);          // the ball is an outer bound of the polyhedron
  CHECK(eval(1.2) > 0.0);             // 20% over the limit violates some face
}

TEST_CASE("alpha zero contributes equality rows") {
  RobotGraph g = load_model(R"({
    "links": ["base", "arm"],
    "bases": {"base": {}},
    "joints": [{"parent": "base", "child": "arm", "kind": "revolute",
                "angle_limits": [0, 0]}],
    "end_effector": "arm"
  })");
  Relaxation rel(g);
  rel.assemble_angle_polyhedron(42);
  CHECK(rel.counts().angle_eq == 3);
  CHECK(rel.counts().angle_ineq == 0);
}

TEST_CASE("unlimited joints contribute no angle rows") {
  RobotGraph g = planar2();
  Relaxation rel(g);
  rel.assemble_angle_polyhedron(42);
  CHECK(rel.counts().angle_ineq == 0);
}

TEST_CASE("parallel rows hold exactly on lifted prismatic pairs") {
  RobotGraph g = limited_chain();
  Relaxation rel(g);
  rel.assemble_parallel();
  JointConfig q = sample_config(g, 9);
  VecX x = rel.pack(rel.lift_config(q));
  CHECK(rel.program().max_eq_residual(x) < 1e-12);
  // lifts from distinct rotations: residual equals the max entry difference
  LiftedState st = rel.lift_config(q);
  auto poses = forward_kinematics(g, q);
  Mat3 other = rot_y(0.37) * poses[3].rotation;
  st.rotations[3] = lift_rotation(other);
  double res = rel.program().max_eq_residual(rel.pack(st));
  double expect = (other - poses[3].rotation).cwiseAbs().maxCoeff();
  CHECK(res == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("prismatic item rows match direct construction") {
  RobotGraph g = limited_chain();
  Relaxation rel(g);
  rel.assemble_prismatic();
  for (int trial = 0; trial < 50; ++trial) {
    JointConfig q = sample_config(g, 30 + trial);
    VecX x = rel.pack(rel.lift_config(q));
    CHECK(rel.program().max_eq_residual(x) < 1e-12);
    CHECK(rel.program().max_ineq_violation(x) < 1e-12);
  }
  // a diagonal Ytau violating item 3-style coupling shows up as a residual
  JointConfig q = sample_config(g, 1);
  LiftedState st = rel.lift_config(q);
  MatX Yt = st.prismatics[2];
  Yt(5, 6) += 0.25;
  Yt(6, 5) += 0.25;
  st.prismatics[2] = Yt;
  CHECK(rel.program().max_eq_residual(rel.pack(st)) == doctest::Approx(0.25).epsilon(1e-9));
}

TEST_CASE("assemble_relaxation counts blocks and row dimensions") {
  RobotGraph g = planar2();
  Relaxation rel = assemble_relaxation(g, GoalSpec{});
  // 1 revolute joint from the base plus one more: blocks for links a, b
  CHECK(rel.program().blocks().size() == 2);
  CHECK(rel.counts().structure == 8);  // 4 per 7x7 block
  int nvar = 0;
  for (const auto& b : rel.program().blocks()) nvar += svec_dim(b.n);
  CHECK(rel.program().num_vars() == nvar);
  rel.program().validate();
}

TEST_CASE("problem 2b: reachable goal solves to near-zero cost") {
  RobotGraph g = planar2();
  JointConfig q;
  q.angles[0] = 0.6;
  q.angles[1] = -0.8;
  GoalSpec goal = goal_from_config(g, q);
  Relaxation rel = assemble_relaxation(g, goal);
  SolverResult res = solve(rel.program());
  REQUIRE(res.status == SolveStatus::Optimal);
  CHECK(res.objective <= 1e-9);
}

TEST_CASE("stationarity rows: feasible at the minimizer, certify out of reach") {
  RobotGraph g = planar2();
  JointConfig q;
  q.angles[0] = 0.3;
  q.angles[1] = 0.2;

  SUBCASE("reachable goal keeps the augmented program feasible") {
    GoalSpec goal = goal_from_config(g, q);
    Relaxation rel = assemble_relaxation(g, goal);
    rel.assemble_stationarity();
    rel.program().clear_objective();
    SolverResult res = solve(rel.program());
    CHECK(res.status == SolveStatus::Optimal);
  }
  SUBCASE("goal beyond total reach is certified infeasible") {
    GoalSpec goal = goal_from_config(g, q);
    goal.target.translation += Vec3(5.0, 0, 0);  // reach is 1
    Relaxation rel = assemble_relaxation(g, goal);
    rel.assemble_stationarity();
    rel.program().clear_objective();
    SolverResult res = solve(rel.program());
    CHECK(res.status == SolveStatus::Infeasible);
    CHECK(res.has_dual_certificate);
  }
}

TEST_CASE("closure rows: degenerate closure eliminates to nothing") {
  RobotGraph g = load_model(R"({
    "links": ["base", "a"],
    "bases": {"base": {}},
    "joints": [{"parent": "base", "child": "a", "kind": "revolute"}],
    "end_effector": "a",
    "closures": [{"path_a": ["base", "a"], "path_b": ["base", "a"]}]
  })");
  Relaxation rel(g);
  rel.assemble_closure();
  CHECK(rel.counts().closure == 0);
}

TEST_CASE("closed loop: consistent configs satisfy cycle rows") {
  // two 2R arms from one base rigidly joined at a common end link
  RobotGraph g = load_model(R"({
    "links": ["base", "l1", "l2", "r1", "r2", "ee"],
    "bases": {"base": {}},
    "joints": [
      {"parent": "base", "child": "l1", "kind": "revolute", "offset": [0, 0.5, 0]},
      {"parent": "l1", "child": "l2", "kind": "revolute", "offset": [1,0,0]},
      {"parent": "l2", "child": "ee", "kind": "revolute", "offset": [1,0,0]},
      {"parent": "base", "child": "r1", "kind": "revolute", "offset": [0,-0.5, 0]},
      {"parent": "r1", "child": "r2", "kind": "revolute", "offset": [1,0,0]},
      {"parent": "r2", "child": "ee", "kind": "revolute", "offset": [1,0,0]}
    ],
    "end_effector": "ee",
    "closures": [{"path_a": ["base","l1","l2","ee"], "path_b": ["base","r1","r2","ee"]}]
  })");
  // mirrored planar configuration meeting exactly on the symmetry plane:
  // 0.5 + sin(t1) + sin(t1 + t2) = 0 puts the left chain tip at y = 0
  double t1 = -0.6;
  double t2 = -t1 + std::asin(-0.5 - std::sin(t1));
  JointConfig q;
  q.angles[0] = t1;
  q.angles[1] = t2;
  q.angles[2] = -(t1 + t2);  // wrist: R_ee = I from the left path
  q.angles[3] = -t1;
  q.angles[4] = -t2;
  q.angles[5] = t1 + t2;
  auto poses = forward_kinematics(g, q);
  Pose pa = propagate_path(g, poses, q, {0, 1, 2, 5});
  Pose pb = propagate_path(g, poses, q, {0, 3, 4, 5});
  REQUIRE((pa.translation - pb.translation).norm() < 1e-12);

  Relaxation rel(g);
  rel.assemble_default();
  VecX x = rel.pack(rel.lift_config(q));
  CHECK(rel.program().max_eq_residual(x) < 1e-10);
}

TEST_CASE("infeasible closure is reported by the relaxation") {
  // the two-arm loop, but the left arm is too short to close the loop
  RobotGraph g = load_model(R"({
    "links": ["base", "l1", "r1", "ee"],
    "bases": {"base": {}},
    "joints": [
      {"parent": "base", "child": "l1", "kind": "revolute", "offset": [0, 3.0, 0]},
      {"parent": "l1", "child": "ee", "kind": "revolute", "offset": [0.2,0,0]},
      {"parent": "base", "child": "r1", "kind": "revolute", "offset": [0,-3.0, 0]},
      {"parent": "r1", "child": "ee", "kind": "revolute", "offset": [0.2,0,0]}
    ],
    "end_effector": "ee",
    "closures": [{"path_a": ["base","l1","ee"], "path_b": ["base","r1","ee"]}]
  })");
  GoalSpec goal;  // irrelevant, the kinematics alone are contradictory
  Relaxation rel = assemble_relaxation(g, goal);
  SolverResult res = solve(rel.program());
  CHECK(res.status == SolveStatus::Infeasible);
}

TEST_CASE("quaternion mode emits trace rows and smaller blocks") {
  RobotGraph g = planar2();
  AssemblyOptions opts;
  opts.mode = LiftMode::Quaternion;
  Relaxation rel = assemble_relaxation(g, GoalSpec{}, opts);
  for (const auto& b : rel.program().blocks()) CHECK(b.n == 4);
  CHECK(rel.counts().structure == 2);  // one trace row per block
}

TEST_CASE("sphere directions are unit and well spread") {
  for (int m : {6, 12, 42, 162}) {
    auto dirs = Relaxation::sphere_directions(m);
    CHECK(static_cast<int>(dirs.size()) >= m);
    for (const auto& d : dirs) CHECK(d.norm() == doctest::Approx(1.0));
  }
  CHECK(Relaxation::sphere_directions(42).size() == 42);
  double cover42 = Relaxation::covering_radius(Relaxation::sphere_directions(42));
  CHECK(cover42 < 0.40);  // about 21 degrees for the subdivided icosahedron
  CHECK(cover42 > 0.1);
}
