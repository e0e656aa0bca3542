#include "sdrik/recovery.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "sdrik/errors.hpp"

namespace sdrik {

double so3_distance(const Mat3& R) { return (R - project_to_so3(R)).norm(); }

namespace {

Mat3 recovered_rotation(const Relaxation& rel, const LiftedState& state, int link) {
  const RobotGraph& g = rel.graph();
  if (g.is_base(link)) return g.base_poses.at(link).rotation;
  const MatX& B = state.rotations.at(link);
  if (state.mode == LiftMode::Rotation) return recover_rotation(Mat7(B));
  return rotation_from_quaternion_lift(Mat4(B));
}

/// Signed angle from w_i to w_j about the z axis shared by the two frames.
double revolute_angle(const Mat3& Ri, const Mat3& Rj, const Mat3& Re) {
  Vec3 wi = Ri * Re.col(0);
  Vec3 wj = Rj.col(0);
  Vec3 axis = Ri * Re.col(2);
  return std::atan2(axis.dot(wi.cross(wj)), wi.dot(wj));
}

}  // namespace

ExtractedSolution extract_solution(const Relaxation& rel, const LiftedState& state) {
  const RobotGraph& g = rel.graph();
  ExtractedSolution out;
  VecX x = rel.pack(state);

  out.raw_rotations.resize(g.num_links());
  std::vector<Mat3> proj(g.num_links());
  for (int v = 0; v < g.num_links(); ++v) {
    out.raw_rotations[v] = recovered_rotation(rel, state, v);
    if (g.is_base(v)) {
      proj[v] = out.raw_rotations[v];
    } else {
      try {
        proj[v] = project_to_so3(out.raw_rotations[v]);
      } catch (const StateError&) {
        proj[v] = Mat3::Identity();  // collapsed block of a failed solve
      }
    }
  }

  // joint values from the projected rotations
  for (int e = 0; e < static_cast<int>(g.edges.size()); ++e) {
    const JointEdge& je = g.edges[e];
    switch (je.kind) {
      case JointKind::Revolute: {
        double theta = revolute_angle(proj[je.parent], proj[je.child], je.zero_rotation);
        if (std::abs(theta) > je.angle_limit) {
          // clamp only tiny excess from the polyhedral outer approximation
          if (std::abs(theta) - je.angle_limit < 1e-3) {
            theta = theta < 0 ? -je.angle_limit : je.angle_limit;
          }
        }
        out.config.angles[e] = theta;
        break;
      }
      case JointKind::Prismatic:
        out.config.extensions[e] = recover_tau(Mat8(state.prismatics.at(e)));
        break;
      case JointKind::Spherical:
        out.config.sphericals[e] =
            project_to_so3(proj[je.parent].transpose() * proj[je.child]);
        break;
    }
  }

  // poses: raw rotations, translations through the relaxation's affine maps
  out.poses.resize(g.num_links());
  for (int v = 0; v < g.num_links(); ++v) {
    out.poses[v].rotation = out.raw_rotations[v];
    for (int r = 0; r < 3; ++r) out.poses[v].translation[r] = rel.translation(v)[r].eval(x);
  }
  return out;
}

SolveReport verify(const Relaxation& rel, const GoalSpec& goal, const RunResult& run) {
  const RobotGraph& g = rel.graph();
  SolveReport rep;
  rep.status = run.status;
  rep.iterations = run.iterations;
  rep.restarts = run.restarts_used;
  rep.seconds = run.seconds;
  rep.variant = to_string(run.variant_used);
  rep.mode = rel.options().mode == LiftMode::Rotation ? "rotation" : "quaternion";
  rep.c_final = run.c_final;
  rep.f_initial = run.f_initial;
  rep.trace = run.trace;
  rep.blocks = static_cast<int>(rel.program().blocks().size());
  rep.eq_rows = rel.program().num_eq();
  rep.ineq_rows = rel.program().num_ineq();
  if (run.status == RunStatus::Infeasible || run.x.size() == 0) {
    return rep;
  }

  ExtractedSolution sol = extract_solution(rel, run.state);
  rep.config = sol.config;
  rep.poses = sol.poses;

  const Pose& ee = sol.poses[g.end_effector];
  rep.err_R = (ee.rotation - goal.target.rotation).norm();
  rep.err_T = (ee.translation - goal.target.translation).norm();

  for (int v = 0; v < g.num_links(); ++v) {
    if (g.is_base(v)) continue;
    double d;
    try {
      d = so3_distance(sol.raw_rotations[v]);
    } catch (const StateError&) {
      d = std::numeric_limits<double>::infinity();
    }
    rep.max_so3_distance = std::max(rep.max_so3_distance, d);
  }
  for (int b = 0; b < static_cast<int>(rel.program().blocks().size()); ++b) {
    double gap = rank_gap(rel.program().block_value(run.x, b));
    rep.block_rank_gaps[rel.program().block(b).name] = gap;
    rep.max_rank_gap = std::max(rep.max_rank_gap, gap);
  }

  // exact ball form of the joint limits, not just the polyhedron
  for (int e = 0; e < static_cast<int>(g.edges.size()); ++e) {
    const JointEdge& je = g.edges[e];
    if (je.kind != JointKind::Revolute || !je.limited()) continue;
    Vec3 wi = sol.raw_rotations[je.parent] * je.zero_rotation.col(0);
    Vec3 wj = sol.raw_rotations[je.child].col(0);
    double rho = std::sqrt(2.0 - 2.0 * std::cos(je.angle_limit));
    rep.joint_limit_slack[e] = rho - (wi - wj).norm();
  }

  // closure consistency: non-tree edges and explicit closure pairs
  for (int ei : g.cycle_edges) {
    const JointEdge& e = g.edges[ei];
    Vec3 expect;
    if (e.kind == JointKind::Prismatic) {
      double len = e.ext_lo + sol.config.extensions[ei] * (e.ext_hi - e.ext_lo);
      expect = sol.poses[e.parent].translation + len * sol.poses[e.child].rotation.col(2);
    } else {
      expect = sol.poses[e.parent].translation + sol.poses[e.parent].rotation * e.offset;
    }
    rep.max_closure_residual =
        std::max(rep.max_closure_residual, (expect - sol.poses[e.child].translation).norm());
  }
  for (const auto& cl : g.closures) {
    Pose pa = sol.poses[cl.path_a.back()].compose(cl.relative);
    const Pose& pb = sol.poses[cl.path_b.back()];
    rep.max_closure_residual =
        std::max(rep.max_closure_residual, (pa.translation - pb.translation).norm());
    rep.max_closure_residual =
        std::max(rep.max_closure_residual, (pa.rotation - pb.rotation).norm());
  }

  rep.f_lifted = rel.program().objective_value(run.x);
  try {
    auto poses_fk = forward_kinematics(g, sol.config);
    const Pose& fk_ee = poses_fk[g.end_effector];
    rep.f_fk = goal.weight_rotation * (fk_ee.rotation - goal.target.rotation).squaredNorm() +
               goal.weight_translation *
                   (fk_ee.translation - goal.target.translation).squaredNorm();
  } catch (const ModelError&) {
    rep.f_fk = std::numeric_limits<double>::quiet_NaN();
  }
  rep.objective_discrepancy = std::abs(rep.f_lifted - rep.f_fk);
  rep.certified = run.status == RunStatus::RankOne;
  return rep;
}

std::string SolveReport::to_json(int indent) const {
  nlohmann::json j;
  j["status"] = to_string(status);
  j["certified"] = certified;
  j["err_R"] = err_R;
  j["err_T"] = err_T;
  j["max_so3_distance"] = max_so3_distance;
  j["max_rank_gap"] = max_rank_gap;
  j["block_rank_gaps"] = block_rank_gaps;
  j["max_closure_residual"] = max_closure_residual;
  j["f_lifted"] = f_lifted;
  j["f_fk"] = f_fk;
  j["f_initial"] = f_initial;
  j["objective_discrepancy"] = objective_discrepancy;
  j["iterations"] = iterations;
  j["restarts"] = restarts;
  j["seconds"] = seconds;
  j["variant"] = variant;
  j["mode"] = mode;
  j["c_final"] = c_final;
  j["program"] = {{"blocks", blocks}, {"eq_rows", eq_rows}, {"ineq_rows", ineq_rows}};
  nlohmann::json slack = nlohmann::json::object();
  for (const auto& [e, s] : joint_limit_slack) slack[std::to_string(e)] = s;
  j["joint_limit_slack"] = slack;
  nlohmann::json angles = nlohmann::json::object(), exts = nlohmann::json::object();
  for (const auto& [e, a] : config.angles) angles[std::to_string(e)] = a;
  for (const auto& [e, t] : config.extensions) exts[std::to_string(e)] = t;
  j["config"] = {{"angles", angles}, {"extensions", exts}};
  return j.dump(indent);
}

}  // namespace sdrik
