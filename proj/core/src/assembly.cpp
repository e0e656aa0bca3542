#include "sdrik/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "sdrik/errors.hpp"

namespace sdrik {

namespace {

/// Right-multiplication matrix of a quaternion p: q (x) p = R(p) q.
Mat4 quat_right_mult(const Vec4& p) {
  double w = p[0], x = p[1], y = p[2], z = p[3];
  Mat4 M;
  M << w, -x, -y, -z,
       x,  w,  z, -y,
       y, -z,  w,  x,
       z,  y, -x,  w;
  return M;
}

}  // namespace

Relaxation::Relaxation(const RobotGraph& g, AssemblyOptions opts) : g_(&g), opts_(opts) {
  build_layout();
  build_translations();
}

int Relaxation::rotation_block(int link) const { return rot_block_[link]; }

int Relaxation::prismatic_block(int edge) const {
  auto it = prism_block_.find(edge);
  return it == prism_block_.end() ? -1 : it->second;
}

void Relaxation::build_layout() {
  const RobotGraph& g = *g_;
  rot_block_.assign(g.num_links(), -1);
  for (int v = 0; v < g.num_links(); ++v) {
    if (g.is_base(v)) continue;
    if (opts_.mode == LiftMode::Rotation) {
      rot_block_[v] = prog_.add_block("Y_" + g.link_names[v], 7, 3.0, BlockRole::Rotation, v);
    } else {
      rot_block_[v] = prog_.add_block("Q_" + g.link_names[v], 4, 1.0, BlockRole::Rotation, v);
    }
  }
  for (int e : g.edges_of_kind(JointKind::Prismatic)) {
    prism_block_[e] = prog_.add_block("Ytau_" + g.link_names[g.edges[e].parent], 8, 2.0,
                                      BlockRole::Prismatic, e);
  }

  // Affine expressions for vec(R_link), column-major.
  rotvec_.assign(g.num_links(), {});
  for (int v = 0; v < g.num_links(); ++v) {
    AffineVec vec9(9);
    if (g.is_base(v)) {
      const Mat3& R = g.base_poses.at(v).rotation;
      for (int c = 0; c < 3; ++c)
        for (int r = 0; r < 3; ++r) vec9[3 * c + r].constant = R(r, c);
    } else if (opts_.mode == LiftMode::Rotation) {
      int b = rot_block_[v];
      for (int r = 0; r < 3; ++r) {
        prog_.add_entry(vec9[r], b, r, 6, 1.0);          // column 1
        prog_.add_entry(vec9[3 + r], b, 3 + r, 6, 1.0);  // column 2
      }
      // column 3 = y1 x y2, linear in the top-left block entries
      prog_.add_entry(vec9[6], b, 1, 5, 1.0);
      prog_.add_entry(vec9[6], b, 2, 4, -1.0);
      prog_.add_entry(vec9[7], b, 2, 3, 1.0);
      prog_.add_entry(vec9[7], b, 0, 5, -1.0);
      prog_.add_entry(vec9[8], b, 0, 4, 1.0);
      prog_.add_entry(vec9[8], b, 1, 3, -1.0);
    } else {
      int b = rot_block_[v];
      auto E = [&](LinExpr& e, int i, int j, double c) { prog_.add_entry(e, b, i, j, c); };
      vec9[0].constant = 1.0; E(vec9[0], 2, 2, -2.0); E(vec9[0], 3, 3, -2.0);
      E(vec9[1], 1, 2, 2.0); E(vec9[1], 3, 0, 2.0);
      E(vec9[2], 1, 3, 2.0); E(vec9[2], 2, 0, -2.0);
      E(vec9[3], 1, 2, 2.0); E(vec9[3], 3, 0, -2.0);
      vec9[4].constant = 1.0; E(vec9[4], 1, 1, -2.0); E(vec9[4], 3, 3, -2.0);
      E(vec9[5], 2, 3, 2.0); E(vec9[5], 1, 0, 2.0);
      E(vec9[6], 1, 3, 2.0); E(vec9[6], 2, 0, 2.0);
      E(vec9[7], 2, 3, 2.0); E(vec9[7], 1, 0, -2.0);
      vec9[8].constant = 1.0; E(vec9[8], 1, 1, -2.0); E(vec9[8], 2, 2, -2.0);
    }
    for (auto& e : vec9) e.compress();
    rotvec_[v] = std::move(vec9);
  }
}

void Relaxation::build_translations() {
  const RobotGraph& g = *g_;
  trans_.assign(g.num_links(), {});
  std::vector<char> have(g.num_links(), 0);
  for (const auto& [link, pose] : g.base_poses) {
    trans_[link] = affine_constant(pose.translation);
    have[link] = 1;
  }

  auto column = [&](int link, int c) {
    AffineVec col(3);
    for (int r = 0; r < 3; ++r) col[r] = rotvec_[link][3 * c + r];
    return col;
  };
  // parent-to-child displacement of an edge as an affine 3-vector
  auto edge_disp = [&](int ei) {
    const JointEdge& e = g.edges[ei];
    AffineVec d(3);
    if (e.kind == JointKind::Prismatic) {
      // tau_l R_j^(3) + (tau_u - tau_l) Ytau(1:3,7); R_j carries the folded frame
      AffineVec c3 = column(e.child, 2);
      int bt = prism_block_.at(ei);
      for (int r = 0; r < 3; ++r) {
        d[r] += e.ext_lo * LinExpr(c3[r]);
        LinExpr t;
        prog_.add_entry(t, bt, r, 6, e.ext_hi - e.ext_lo);
        d[r] += t;
      }
    } else {
      for (int c = 0; c < 3; ++c) {  // R_i * offset
        if (e.offset[c] == 0.0) continue;
        AffineVec col_c = column(e.parent, c);
        for (int r = 0; r < 3; ++r) d[r] += e.offset[c] * LinExpr(col_c[r]);
      }
    }
    return d;
  };

  for (const TraversalStep& step : g.tree) {
    const JointEdge& e = g.edges[step.edge];
    AffineVec d = edge_disp(step.edge);
    if (step.forward) {
      trans_[e.child] = affine_add(trans_[e.parent], d);
      have[e.child] = 1;
    } else {
      trans_[e.parent] = affine_sub(trans_[e.child], d);
      have[e.parent] = 1;
    }
  }
  for (int v = 0; v < g.num_links(); ++v) {
    if (!have[v]) throw ModelError("translation propagation failed for link " + g.link_names[v]);
    for (auto& e : trans_[v]) e.compress();
  }

  // every non-tree edge must still satisfy its translation relation
  for (int ei : g.cycle_edges) {
    const JointEdge& e = g.edges[ei];
    AffineVec lhs = affine_add(trans_[e.parent], edge_disp(ei));
    cycle_rows_.emplace_back(ei, affine_sub(lhs, trans_[e.child]));
  }
}

void Relaxation::assemble_structure() {
  for (int b = 0; b < static_cast<int>(prog_.blocks().size()); ++b) {
    const PsdBlock& blk = prog_.block(b);
    if (blk.role == BlockRole::Prismatic) continue;  // trace pinned by the item rows
    if (blk.n == 7) {
      LinExpr t1, t2, t3, pin;
      for (int i = 0; i < 3; ++i) prog_.add_entry(t1, b, i, i, 1.0);
      t1.constant = -1.0;
      for (int i = 3; i < 6; ++i) prog_.add_entry(t2, b, i, i, 1.0);
      t2.constant = -1.0;
      for (int i = 0; i < 3; ++i) prog_.add_entry(t3, b, i, i + 3, 1.0);
      prog_.add_entry(pin, b, 6, 6, 1.0);
      pin.constant = -1.0;
      prog_.add_eq(t1);
      prog_.add_eq(t2);
      prog_.add_eq(t3);
      prog_.add_eq(pin);
      counts_.structure += 4;
    } else {
      LinExpr tr;
      for (int i = 0; i < 4; ++i) prog_.add_entry(tr, b, i, i, 1.0);
      tr.constant = -1.0;
      prog_.add_eq(tr);
      counts_.structure += 1;
    }
  }
}

AffineVec Relaxation::edge_w(int edge, bool parent_side) const {
  const JointEdge& e = g_->edges[edge];
  AffineVec w(3);
  if (parent_side) {
    Vec3 a = e.zero_rotation.col(0);  // R_e e1
    for (int c = 0; c < 3; ++c) {
      if (a[c] == 0.0) continue;
      for (int r = 0; r < 3; ++r) w[r] += a[c] * LinExpr(rotvec_[e.parent][3 * c + r]);
    }
  } else {
    for (int r = 0; r < 3; ++r) w[r] = rotvec_[e.child][r];
  }
  return w;
}

void Relaxation::assemble_axis() {
  for (int ei : g_->edges_of_kind(JointKind::Revolute)) {
    const JointEdge& e = g_->edges[ei];
    Vec3 a = e.zero_rotation.col(2);  // R_e e3
    for (int r = 0; r < 3; ++r) {
      LinExpr row;
      for (int c = 0; c < 3; ++c) {
        if (a[c] != 0.0) row += a[c] * LinExpr(rotvec_[e.parent][3 * c + r]);
      }
      row -= rotvec_[e.child][6 + r];
      prog_.add_eq(row);
      ++counts_.axis;
    }
  }
}

void Relaxation::assemble_angle_polyhedron(int m) {
  if (m < 4) throw ProgramError("angle polyhedron needs at least 4 directions");
  std::vector<Vec3> dirs;
  for (int ei : g_->edges_of_kind(JointKind::Revolute)) {
    const JointEdge& e = g_->edges[ei];
    if (!e.limited()) continue;
    AffineVec diff = affine_sub(edge_w(ei, true), edge_w(ei, false));
    if (e.angle_limit <= 0.0) {
      for (int r = 0; r < 3; ++r) prog_.add_eq(diff[r]);
      counts_.angle_eq += 3;
      continue;
    }
    if (dirs.empty()) dirs = sphere_directions(m);
    double rho = std::sqrt(2.0 - 2.0 * std::cos(e.angle_limit));
    for (const Vec3& d : dirs) {
      LinExpr row;
      for (int r = 0; r < 3; ++r) row += d[r] * LinExpr(diff[r]);
      row.constant -= rho;
      prog_.add_ineq(row);
      ++counts_.angle_ineq;
    }
  }
}

void Relaxation::assemble_parallel() {
  for (int ei : g_->edges_of_kind(JointKind::Prismatic)) {
    const JointEdge& e = g_->edges[ei];
    if (opts_.mode == LiftMode::Rotation || g_->is_base(e.parent) || g_->is_base(e.child)) {
      // vec(R_j) = (R_p' (x) I) vec(R_i), 9 rows
      MatX M = MatX::Zero(9, 9);
      for (int c = 0; c < 3; ++c)
        for (int k = 0; k < 3; ++k)
          M.block<3, 3>(3 * c, 3 * k) = e.zero_rotation(k, c) * Mat3::Identity();
      AffineVec folded = affine_matvec(M, rotvec_[e.parent]);
      for (int r = 0; r < 9; ++r) {
        prog_.add_eq(LinExpr(rotvec_[e.child][r]) - folded[r]);
        ++counts_.parallel;
      }
    } else {
      // Q_j = R(p) Q_i R(p)', the sign-invariant quaternion form of R_j = R_i R_p
      Vec4 qp = quaternion_from_rotation(e.zero_rotation);
      Mat4 Mp = quat_right_mult(qp);
      int bi = rot_block_[e.parent], bj = rot_block_[e.child];
      MatX K(10, 10);
      VecX ek = VecX::Zero(10);
      for (int c = 0; c < 10; ++c) {
        ek[c] = 1.0;
        K.col(c) = svec(Mp * smat(ek, 4) * Mp.transpose());
        ek[c] = 0.0;
      }
      for (int i = 0; i < 4; ++i) {
        for (int j = i; j < 4; ++j) {
          int rslot = svec_index(4, j, i);
          LinExpr row;
          prog_.add_entry(row, bj, i, j, i == j ? 1.0 : M_SQRT2);
          for (int c = 0; c < 10; ++c) {
            if (K(rslot, c) != 0.0) {
              row.terms.emplace_back(prog_.block(bi).offset + c, -K(rslot, c));
            }
          }
          prog_.add_eq(row);
          ++counts_.parallel;
        }
      }
    }
  }
}

void Relaxation::assemble_prismatic() {
  for (const auto& [ei, bt] : prism_block_) {
    const JointEdge& e = g_->edges[ei];
    LinExpr tr;  // item 1: trace = 2
    for (int i = 0; i < 8; ++i) prog_.add_entry(tr, bt, i, i, 1.0);
    tr.constant = -2.0;
    prog_.add_eq(tr);
    LinExpr i2a, i2b;  // item 2: block traces tie to the tail entries
    for (int i = 0; i < 3; ++i) prog_.add_entry(i2a, bt, i, i, 1.0);
    prog_.add_entry(i2a, bt, 6, 6, -1.0);
    for (int i = 3; i < 6; ++i) prog_.add_entry(i2b, bt, i, i, 1.0);
    prog_.add_entry(i2b, bt, 7, 7, -1.0);
    prog_.add_eq(i2a);
    prog_.add_eq(i2b);
    for (int r = 0; r < 3; ++r) {  // item 3
      LinExpr row;
      prog_.add_entry(row, bt, 3 + r, 6, 1.0);
      prog_.add_entry(row, bt, r, 7, -1.0);
      prog_.add_eq(row);
    }
    LinExpr i4;  // item 4: cross trace equals (7,8)
    for (int i = 0; i < 3; ++i) prog_.add_entry(i4, bt, i, i + 3, 1.0);
    prog_.add_entry(i4, bt, 6, 7, -1.0);
    prog_.add_eq(i4);
    counts_.prismatic_eq += 7;

    LinExpr lo, hi, i6;  // item 5: (7,7) in [0,1]; item 6: (7,8) >= 0
    prog_.add_entry(lo, bt, 6, 6, -1.0);
    prog_.add_ineq(lo);
    prog_.add_entry(hi, bt, 6, 6, 1.0);
    hi.constant = -1.0;
    prog_.add_ineq(hi);
    prog_.add_entry(i6, bt, 6, 7, -1.0);
    prog_.add_ineq(i6);
    counts_.prismatic_ineq += 3;

    // item 7: Ytau(1:3,7) + Ytau(4:6,8) equals the folded third column
    for (int r = 0; r < 3; ++r) {
      LinExpr row;
      prog_.add_entry(row, bt, r, 6, 1.0);
      prog_.add_entry(row, bt, 3 + r, 7, 1.0);
      row -= rotvec_[e.child][6 + r];
      prog_.add_eq(row);
      ++counts_.prismatic_eq;
    }
  }
}

void Relaxation::assemble_closure() {
  // translation relations of the non-tree edges
  int before = prog_.num_eq();
  for (const auto& [ei, expr] : cycle_rows_) {
    for (const auto& row : expr) prog_.add_eq(row);
  }
  // explicit closures: the pose propagated along path A, composed with the
  // fixed relative transform, equals the pose along path B
  for (const auto& cl : g_->closures) {
    int end = cl.path_a.back();
    const Mat3& Rrel = cl.relative.rotation;
    if ((Rrel - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-15) {
      MatX M = MatX::Zero(9, 9);
      for (int c = 0; c < 3; ++c)
        for (int k = 0; k < 3; ++k) M.block<3, 3>(3 * c, 3 * k) = Rrel(k, c) * Mat3::Identity();
      AffineVec rotated = affine_matvec(M, rotvec_[end]);
      for (int r = 0; r < 9; ++r) prog_.add_eq(LinExpr(rotated[r]) - rotvec_[end][r]);
    }
    AffineVec shift(3);
    for (int c = 0; c < 3; ++c) {
      if (cl.relative.translation[c] == 0.0) continue;
      for (int r = 0; r < 3; ++r) {
        shift[r] += cl.relative.translation[c] * LinExpr(rotvec_[end][3 * c + r]);
      }
    }
    AffineVec lhs = affine_add(trans_[cl.path_a.back()], shift);
    const AffineVec& rhs = trans_[cl.path_b.back()];
    for (int r = 0; r < 3; ++r) prog_.add_eq(LinExpr(lhs[r]) - rhs[r]);
  }
  counts_.closure += prog_.num_eq() - before;
}

void Relaxation::assemble_default() {
  assemble_structure();
  assemble_axis();
  assemble_angle_polyhedron(opts_.angle_directions);
  assemble_parallel();
  assemble_prismatic();
  assemble_closure();
}

void Relaxation::assemble_cost(const GoalSpec& goal) {
  if (goal.weight_rotation < 0 || goal.weight_translation < 0 ||
      (goal.weight_rotation == 0 && goal.weight_translation == 0)) {
    throw ProgramError("goal weights must be nonnegative and not both zero");
  }
  int ee = g_->end_effector;
  std::vector<LinExpr> residuals;
  double wr = std::sqrt(goal.weight_rotation), wt = std::sqrt(goal.weight_translation);
  if (wr > 0) {
    for (int c = 0; c < 3; ++c) {
      for (int r = 0; r < 3; ++r) {
        LinExpr res = wr * LinExpr(rotvec_[ee][3 * c + r]);
        res.constant -= wr * goal.target.rotation(r, c);
        residuals.push_back(res);
      }
    }
  }
  if (wt > 0) {
    for (int r = 0; r < 3; ++r) {
      LinExpr res = wt * LinExpr(trans_[ee][r]);
      res.constant -= wt * goal.target.translation[r];
      residuals.push_back(res);
    }
  }
  counts_.cost_residuals = static_cast<int>(residuals.size());
  prog_.set_least_squares_objective(std::move(residuals));
}

int assemble_stationarity(ConicProgram& prog) {
  if (prog.objective_kind() != ConicProgram::ObjectiveKind::Quadratic) {
    throw ProgramError("stationarity rows require a quadratic objective");
  }
  const auto& res = prog.residuals();
  const int nr = static_cast<int>(res.size());
  const int n = prog.num_vars();
  MatX J = MatX::Zero(nr, n);
  VecX c0(nr);
  for (int r = 0; r < nr; ++r) {
    for (const auto& [i, v] : res[r].terms) J(r, i) += v;
    c0[r] = res[r].constant;
  }
  if (J.lpNorm<Eigen::Infinity>() == 0.0) {
    // P = 0: the gradient is the constant q = 2 J' c0, satisfiable only at q = 0
    VecX q = 2.0 * J.transpose() * c0;
    if (q.lpNorm<Eigen::Infinity>() > 1e-14) {
      throw ProgramError("stationarity of a zero-curvature objective with nonzero gradient");
    }
    return 0;
  }
  // grad f = 2 J'(Jx + c0) = 0  <=>  Jx = Jx* at any least-squares point x*
  VecX xstar = J.colPivHouseholderQr().solve(-c0);
  int added = 0;
  for (int r = 0; r < nr; ++r) {
    LinExpr row = res[r];
    row.constant = -J.row(r).dot(xstar);
    prog.add_eq(row);
    ++added;
  }
  return added;
}

int Relaxation::assemble_stationarity() {
  int added = sdrik::assemble_stationarity(prog_);
  counts_.stationarity += added;
  return added;
}

bool Relaxation::program_member(const ConicProgram& prog, const VecX& x, double tol_rows,
                                double tol_psd) {
  if (prog.max_eq_residual(x) > tol_rows) return false;
  if (prog.max_ineq_violation(x) > tol_rows) return false;
  for (int b = 0; b < static_cast<int>(prog.blocks().size()); ++b) {
    Eigen::SelfAdjointEigenSolver<MatX> es(prog.block_value(x, b), Eigen::EigenvaluesOnly);
    if (es.eigenvalues()[0] < -tol_psd) return false;
  }
  return true;
}

LiftedState Relaxation::unpack(const VecX& x) const {
  LiftedState st;
  st.mode = opts_.mode;
  for (int v = 0; v < g_->num_links(); ++v) {
    if (rot_block_[v] >= 0) st.rotations[v] = prog_.block_value(x, rot_block_[v]);
  }
  for (const auto& [e, b] : prism_block_) st.prismatics[e] = prog_.block_value(x, b);
  return st;
}

VecX Relaxation::pack(const LiftedState& state) const {
  VecX x = VecX::Zero(prog_.num_vars());
  for (const auto& [v, Y] : state.rotations) prog_.set_block_value(x, rot_block_[v], Y);
  for (const auto& [e, Y] : state.prismatics) prog_.set_block_value(x, prism_block_.at(e), Y);
  return x;
}

LiftedState Relaxation::lift_config(const JointConfig& q) const {
  std::vector<Pose> poses = forward_kinematics(*g_, q);
  LiftedState st;
  st.mode = opts_.mode;
  for (int v = 0; v < g_->num_links(); ++v) {
    if (rot_block_[v] < 0) continue;
    st.rotations[v] = opts_.mode == LiftMode::Rotation
                          ? MatX(lift_rotation(poses[v].rotation))
                          : MatX(lift_quaternion(poses[v].rotation));
  }
  for (const auto& [e, b] : prism_block_) {
    st.prismatics[e] = lift_prismatic(poses[g_->edges[e].child].rotation, q.extensions.at(e));
  }
  return st;
}

double Relaxation::membership_residual(const VecX& x) const {
  double r = std::max(prog_.max_eq_residual(x), prog_.max_ineq_violation(x));
  for (int b = 0; b < static_cast<int>(prog_.blocks().size()); ++b) {
    Eigen::SelfAdjointEigenSolver<MatX> es(prog_.block_value(x, b), Eigen::EigenvaluesOnly);
    r = std::max(r, -es.eigenvalues()[0]);
  }
  return r;
}

bool Relaxation::is_member(const VecX& x, double tol_rows, double tol_psd) const {
  if (prog_.max_eq_residual(x) > tol_rows) return false;
  if (prog_.max_ineq_violation(x) > tol_rows) return false;
  for (int b = 0; b < static_cast<int>(prog_.blocks().size()); ++b) {
    Eigen::SelfAdjointEigenSolver<MatX> es(prog_.block_value(x, b), Eigen::EigenvaluesOnly);
    if (es.eigenvalues()[0] < -tol_psd) return false;
  }
  return true;
}

std::vector<Vec3> Relaxation::sphere_directions(int m) {
  if (m <= 6) {
    std::vector<Vec3> out;
    for (int a = 0; a < 3; ++a)
      for (double s : {1.0, -1.0}) out.push_back(s * Vec3::Unit(a));
    return out;
  }
  const double p = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> verts = {
      {-1, p, 0}, {1, p, 0}, {-1, -p, 0}, {1, -p, 0}, {0, -1, p}, {0, 1, p},
      {0, -1, -p}, {0, 1, -p}, {p, 0, -1}, {p, 0, 1}, {-p, 0, -1}, {-p, 0, 1}};
  for (auto& v : verts) v.normalize();
  std::vector<std::array<int, 3>> faces = {
      {0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11},
      {1, 5, 9}, {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8}, {3, 8, 9},
      {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1}};
  int levels = 0;
  if (m > 12) levels = 1;
  if (m > 42) levels = 2;
  if (m > 162) levels = 3;
  for (int lvl = 0; lvl < levels; ++lvl) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      verts.push_back((verts[a] + verts[b]).normalized());
      int idx = static_cast<int>(verts.size()) - 1;
      midpoint[key] = idx;
      return idx;
    };
    std::vector<std::array<int, 3>> next;
    for (const auto& f : faces) {
      int ab = mid(f[0], f[1]), bc = mid(f[1], f[2]), ca = mid(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    faces = std::move(next);
  }
  return verts;
}

double Relaxation::covering_radius(const std::vector<Vec3>& dirs) {
  const int n = 20000;
  const double ga = M_PI * (3.0 - std::sqrt(5.0));
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    double zc = 1.0 - 2.0 * (i + 0.5) / n;
    double r = std::sqrt(std::max(0.0, 1.0 - zc * zc));
    Vec3 pt(r * std::cos(ga * i), r * std::sin(ga * i), zc);
    double best = -1.0;
    for (const auto& d : dirs) best = std::max(best, d.dot(pt));
    worst = std::max(worst, std::acos(std::min(1.0, best)));
  }
  return worst;
}

Relaxation assemble_relaxation(const RobotGraph& g, const GoalSpec& goal, AssemblyOptions opts) {
  Relaxation rel(g, opts);
  rel.assemble_default();
  rel.assemble_cost(goal);
  return rel;
}

}  // namespace sdrik
