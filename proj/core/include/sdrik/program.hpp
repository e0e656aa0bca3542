#pragma once

#include <string>
#include <vector>

#include "sdrik/geometry.hpp"
#include "sdrik/sym.hpp"

namespace sdrik {

enum class BlockRole { Rotation, Prismatic };

/// One PSD matrix variable, stored as its symmetric vectorization inside the
/// concatenated decision vector.
struct PsdBlock {
  std::string name;
  int n = 0;           // matrix dimension
  int offset = 0;      // first slot in x
  int dim = 0;         // svec_dim(n)
  double trace_target = 0.0;
  BlockRole role = BlockRole::Rotation;
  int key = -1;        // link id (rotation) or edge id (prismatic)
};

/// Sparse affine expression a.x + c over the decision vector.
struct LinExpr {
  std::vector<std::pair<int, double>> terms;
  double constant = 0.0;

  LinExpr() = default;
  explicit LinExpr(double c) : constant(c) {}

  LinExpr& operator+=(const LinExpr& o);
  LinExpr& operator-=(const LinExpr& o);
  LinExpr& operator*=(double s);
  friend LinExpr operator+(LinExpr a, const LinExpr& b) { return a += b; }
  friend LinExpr operator-(LinExpr a, const LinExpr& b) { return a -= b; }
  friend LinExpr operator*(double s, LinExpr a) { return a *= s; }

  double eval(const VecX& x) const;
  /// Merge duplicate slots and drop negligible coefficients.
  void compress();
  bool is_zero(double tol = 0.0) const;
};

/// 3- or 9-dimensional affine expressions (translations, vectorized rotations).
using AffineVec = std::vector<LinExpr>;

AffineVec affine_constant(const VecX& v);
AffineVec affine_add(const AffineVec& a, const AffineVec& b);
AffineVec affine_sub(const AffineVec& a, const AffineVec& b);
/// M * v for a constant matrix M and affine vector v.
AffineVec affine_matvec(const MatX& M, const AffineVec& v);

/// PSD block variables plus linear equality/inequality rows and a quadratic
/// (sum of squared affine residuals) or linear objective, all acting on the
/// symmetric vectorization of the blocks.
class ConicProgram {
 public:
  int add_block(const std::string& name, int n, double trace_target, BlockRole role, int key);

  int num_vars() const { return nvar_; }
  const std::vector<PsdBlock>& blocks() const { return blocks_; }
  const PsdBlock& block(int b) const { return blocks_[b]; }
  int find_block(BlockRole role, int key) const;  // -1 when absent

  /// Slot of entry (i,j) of block b in the decision vector.
  int slot(int b, int i, int j) const {
    return blocks_[b].offset + svec_index(blocks_[b].n, i, j);
  }
  /// Term representing coefficient c on matrix entry (i,j) of block b.
  void add_entry(LinExpr& e, int b, int i, int j, double c) const {
    e.terms.emplace_back(slot(b, i, j), c * svec_entry_coeff(i, j));
  }

  void add_eq(LinExpr e);        // e == 0
  void add_ineq(LinExpr e);      // e <= 0
  int num_eq() const { return static_cast<int>(eq_.size()); }
  int num_ineq() const { return static_cast<int>(ineq_.size()); }
  const std::vector<LinExpr>& eq_rows() const { return eq_; }
  const std::vector<LinExpr>& ineq_rows() const { return ineq_; }

  enum class ObjectiveKind { None, Linear, Quadratic };
  ObjectiveKind objective_kind() const { return obj_kind_; }
  /// minimize sum of squares of the residual expressions, plus r0.
  void set_least_squares_objective(std::vector<LinExpr> residuals, double r0 = 0.0);
  /// minimize q.x + r.
  void set_linear_objective(VecX q, double r = 0.0);
  void clear_objective();

  const std::vector<LinExpr>& residuals() const { return residuals_; }
  const VecX& linear_cost() const { return linear_q_; }
  double objective_offset() const { return obj_r_; }

  /// x^T P x + q^T x + r form of the quadratic objective (P = J^T J for the
  /// residual Jacobian J, PSD by construction).
  void quadratic_terms(MatX& P, VecX& q, double& r) const;

  double objective_value(const VecX& x) const;

  // Block values in and out of a decision vector.
  MatX block_value(const VecX& x, int b) const;
  void set_block_value(VecX& x, int b, const MatX& M) const;

  double max_eq_residual(const VecX& x) const;
  double max_ineq_violation(const VecX& x) const;

  /// Dimension consistency of every row and the objective.
  void validate() const;

 private:
  std::vector<PsdBlock> blocks_;
  int nvar_ = 0;
  std::vector<LinExpr> eq_;
  std::vector<LinExpr> ineq_;
  ObjectiveKind obj_kind_ = ObjectiveKind::None;
  std::vector<LinExpr> residuals_;
  VecX linear_q_;
  double obj_r_ = 0.0;
};

}  // namespace sdrik
