#pragma once

#include "sdrik/lifting.hpp"
#include "sdrik/program.hpp"
#include "sdrik/robot_model.hpp"

namespace sdrik {

/// Desired end-effector pose with the two cost weights.
struct GoalSpec {
  Pose target;
  double weight_rotation = 1.0;
  double weight_translation = 1.0;
};

struct AssemblyOptions {
  LiftMode mode = LiftMode::Rotation;
  int angle_directions = 42;  // polyhedral density of the joint-limit ball
};

struct RowCounts {
  int structure = 0;
  int axis = 0;
  int angle_eq = 0;
  int angle_ineq = 0;
  int parallel = 0;
  int prismatic_eq = 0;
  int prismatic_ineq = 0;
  int closure = 0;
  int cost_residuals = 0;
  int stationarity = 0;
};

/// Builds the conic relaxation of a robot's kinematic constraints: one PSD
/// block per free link rotation (7x7 lift or 4x4 quaternion lift) and one 8x8
/// block per prismatic edge, with every kinematic relation expressed as linear
/// rows over the symmetric vectorizations. Translations are eliminated: each
/// link translation is an affine expression in the lifts, propagated from the
/// fixed bases over a spanning tree.
class Relaxation {
 public:
  explicit Relaxation(const RobotGraph& g, AssemblyOptions opts = {});

  // Row-group assemblers. assemble_default() emits the standard set
  // (structure, axis, angle polyhedron, parallel, prismatic, closure).
  void assemble_structure();
  void assemble_axis();
  void assemble_angle_polyhedron(int m);
  void assemble_parallel();
  void assemble_prismatic();
  void assemble_closure();
  void assemble_default();
  void assemble_cost(const GoalSpec& goal);
  /// Rows pinning the cost gradient to zero (for the eigenvalue-maximization
  /// update and for infeasibility certification). Requires a quadratic
  /// objective; returns the number of rows added.
  int assemble_stationarity();

  /// Membership in the relaxed set described by a program's rows and blocks.
  static bool program_member(const ConicProgram& prog, const VecX& x, double tol_rows = 1e-8,
                             double tol_psd = kTolPsd);

  ConicProgram& program() { return prog_; }
  const ConicProgram& program() const { return prog_; }
  const RobotGraph& graph() const { return *g_; }
  const AssemblyOptions& options() const { return opts_; }
  const RowCounts& counts() const { return counts_; }

  int rotation_block(int link) const;   // -1 for fixed links
  int prismatic_block(int edge) const;

  /// 9 affine expressions for vec(R_link), column-major.
  const AffineVec& rotation_vec(int link) const { return rotvec_[link]; }
  /// 3 affine expressions for the link translation.
  const AffineVec& translation(int link) const { return trans_[link]; }

  LiftedState unpack(const VecX& x) const;
  VecX pack(const LiftedState& state) const;
  /// Exact lift of a joint configuration (through forward kinematics).
  LiftedState lift_config(const JointConfig& q) const;

  /// Max violation over eq rows, ineq rows and block PSD-ness (negative
  /// eigenvalue magnitude) at x.
  double membership_residual(const VecX& x) const;
  bool is_member(const VecX& x, double tol_rows = 1e-8, double tol_psd = kTolPsd) const;

  /// Deterministic unit directions covering the sphere; m is rounded up to
  /// the nearest supported subdivided-icosahedron size (6, 12, 42, 162, 642).
  static std::vector<Vec3> sphere_directions(int m);
  /// Covering radius (radians) of a direction set: the largest angle from
  /// any unit vector to its nearest direction.
  static double covering_radius(const std::vector<Vec3>& dirs);

 private:
  AffineVec edge_w(int edge, bool parent_side) const;  // R_i R_e e1 or R_j e1
  void build_layout();
  void build_translations();

  const RobotGraph* g_;
  AssemblyOptions opts_;
  ConicProgram prog_;
  RowCounts counts_;
  std::vector<int> rot_block_;         // link -> block index or -1
  std::map<int, int> prism_block_;     // edge -> block index
  std::vector<AffineVec> rotvec_;      // link -> 9 exprs
  std::vector<AffineVec> trans_;       // link -> 3 exprs
  std::vector<std::pair<int, AffineVec>> cycle_rows_;  // edge, violated expr
};

/// The full relaxed program of the inverse-kinematics problem: all kinematic
/// rows plus the quadratic goal cost.
Relaxation assemble_relaxation(const RobotGraph& g, const GoalSpec& goal,
                               AssemblyOptions opts = {});

/// Append the gradient-pinning rows of a quadratic objective to any program
/// (the free-standing form of Relaxation::assemble_stationarity).
int assemble_stationarity(ConicProgram& prog);

}  // namespace sdrik
