#pragma once

#include <string>

#include "sdrik/rankmin.hpp"

namespace sdrik {

/// Frobenius distance to the special-orthogonal polar factor. Throws
/// StateError when R is rank deficient and the projection is ill-defined.
double so3_distance(const Mat3& R);

/// Joint configuration and link poses extracted from a lifted solution.
/// Rotations are the raw linear recovery from the blocks (on SO(3) exactly
/// when the blocks are rank one); translations are propagated from the bases
/// through the same affine maps the relaxation uses. Joint angles come from
/// the projected rotations so the configuration is always well formed; angles
/// that exceed a limit by more than the polyhedral slack are left unclamped.
struct ExtractedSolution {
  JointConfig config;
  std::vector<Pose> poses;
  std::vector<Mat3> raw_rotations;  // per link, before projection
};

ExtractedSolution extract_solution(const Relaxation& rel, const LiftedState& state);

/// Everything the evaluation protocol reports about one solve.
struct SolveReport {
  RunStatus status = RunStatus::Failed;
  bool certified = false;  // rank-one within tolerance
  JointConfig config;
  std::vector<Pose> poses;
  double err_R = 0.0;  // || vec(R_ee) - vec(R_goal) ||
  double err_T = 0.0;  // || T_ee - T_goal ||
  double max_so3_distance = 0.0;
  double max_rank_gap = 0.0;              // largest second eigenvalue over blocks
  std::map<std::string, double> block_rank_gaps;
  std::map<int, double> joint_limit_slack;  // per limited edge: rho - |w_i - w_j|
  double max_closure_residual = 0.0;
  double f_lifted = 0.0;      // objective at the lifted solution
  double f_fk = 0.0;          // objective re-evaluated through forward kinematics
  double objective_discrepancy = 0.0;
  double f_initial = 0.0;
  int iterations = 0;
  int restarts = 0;
  double seconds = 0.0;
  std::string variant;
  std::string mode;
  double c_final = 0.0;
  int blocks = 0;
  int eq_rows = 0;
  int ineq_rows = 0;
  IterationTrace trace;

  std::string to_json(int indent = 2) const;
};

/// Fill every metric of the report from a finished run. Checks the exact
/// ball form of the joint limits (not only the polyhedron) and re-evaluates
/// the cost on the extracted configuration.
SolveReport verify(const Relaxation& rel, const GoalSpec& goal, const RunResult& run);

}  // namespace sdrik
