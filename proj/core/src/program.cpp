#include "sdrik/program.hpp"

#include <algorithm>
#include <map>

#include "sdrik/errors.hpp"

namespace sdrik {

LinExpr& LinExpr::operator+=(const LinExpr& o) {
  terms.insert(terms.end(), o.terms.begin(), o.terms.end());
  constant += o.constant;
  return *this;
}

LinExpr& LinExpr::operator-=(const LinExpr& o) {
  terms.reserve(terms.size() + o.terms.size());
  for (const auto& [i, c] : o.terms) terms.emplace_back(i, -c);
  constant -= o.constant;
  return *this;
}

LinExpr& LinExpr::operator*=(double s) {
  for (auto& [i, c] : terms) c *= s;
  constant *= s;
  return *this;
}

double LinExpr::eval(const VecX& x) const {
  double v = constant;
  for (const auto& [i, c] : terms) v += c * x[i];
  return v;
}

void LinExpr::compress() {
  std::sort(terms.begin(), terms.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::pair<int, double>> out;
  for (const auto& [i, c] : terms) {
    if (!out.empty() && out.back().first == i) out.back().second += c;
    else out.emplace_back(i, c);
  }
  std::erase_if(out, [](const auto& t) { return t.second == 0.0; });
  terms = std::move(out);
}

bool LinExpr::is_zero(double tol) const {
  if (std::abs(constant) > tol) return false;
  for (const auto& [i, c] : terms)
    if (std::abs(c) > tol) return false;
  return true;
}

AffineVec affine_constant(const VecX& v) {
  AffineVec out(v.size());
  for (int i = 0; i < v.size(); ++i) out[i].constant = v[i];
  return out;
}

AffineVec affine_add(const AffineVec& a, const AffineVec& b) {
  AffineVec out = a;
  for (size_t i = 0; i < out.size(); ++i) out[i] += b[i];
  return out;
}

AffineVec affine_sub(const AffineVec& a, const AffineVec& b) {
  AffineVec out = a;
  for (size_t i = 0; i < out.size(); ++i) out[i] -= b[i];
  return out;
}

AffineVec affine_matvec(const MatX& M, const AffineVec& v) {
  AffineVec out(M.rows());
  for (int i = 0; i < M.rows(); ++i) {
    for (int j = 0; j < M.cols(); ++j) {
      if (M(i, j) == 0.0) continue;
      out[i] += M(i, j) * LinExpr(v[j]);
    }
  }
  return out;
}

int ConicProgram::add_block(const std::string& name, int n, double trace_target, BlockRole role,
                            int key) {
  PsdBlock b;
  b.name = name;
  b.n = n;
  b.offset = nvar_;
  b.dim = svec_dim(n);
  b.trace_target = trace_target;
  b.role = role;
  b.key = key;
  nvar_ += b.dim;
  blocks_.push_back(b);
  return static_cast<int>(blocks_.size()) - 1;
}

int ConicProgram::find_block(BlockRole role, int key) const {
  for (int b = 0; b < static_cast<int>(blocks_.size()); ++b) {
    if (blocks_[b].role == role && blocks_[b].key == key) return b;
  }
  return -1;
}

void ConicProgram::add_eq(LinExpr e) {
  e.compress();
  if (e.is_zero()) return;  // degenerate 0 = 0 rows are eliminated
  eq_.push_back(std::move(e));
}

void ConicProgram::add_ineq(LinExpr e) {
  e.compress();
  if (e.terms.empty() && e.constant <= 0.0) return;
  ineq_.push_back(std::move(e));
}

void ConicProgram::set_least_squares_objective(std::vector<LinExpr> residuals, double r0) {
  for (auto& r : residuals) r.compress();
  residuals_ = std::move(residuals);
  obj_r_ = r0;
  obj_kind_ = ObjectiveKind::Quadratic;
  linear_q_.resize(0);
}

void ConicProgram::set_linear_objective(VecX q, double r) {
  if (q.size() != nvar_) throw ProgramError("linear objective has wrong dimension");
  linear_q_ = std::move(q);
  obj_r_ = r;
  obj_kind_ = ObjectiveKind::Linear;
  residuals_.clear();
}

void ConicProgram::clear_objective() {
  obj_kind_ = ObjectiveKind::None;
  residuals_.clear();
  linear_q_.resize(0);
  obj_r_ = 0.0;
}

void ConicProgram::quadratic_terms(MatX& P, VecX& q, double& r) const {
  if (obj_kind_ != ObjectiveKind::Quadratic) {
    throw ProgramError("objective is not quadratic");
  }
  P = MatX::Zero(nvar_, nvar_);
  q = VecX::Zero(nvar_);
  r = obj_r_;
  for (const auto& res : residuals_) {
    for (const auto& [i, ci] : res.terms) {
      for (const auto& [j, cj] : res.terms) P(i, j) += ci * cj;
      q[i] += 2.0 * res.constant * ci;
    }
    r += res.constant * res.constant;
  }
}

double ConicProgram::objective_value(const VecX& x) const {
  switch (obj_kind_) {
    case ObjectiveKind::None:
      return 0.0;
    case ObjectiveKind::Linear:
      return linear_q_.dot(x) + obj_r_;
    case ObjectiveKind::Quadratic: {
      double f = obj_r_;
      for (const auto& res : residuals_) {
        double v = res.eval(x);
        f += v * v;
      }
      return f;
    }
  }
  return 0.0;
}

MatX ConicProgram::block_value(const VecX& x, int b) const {
  return smat(x.segment(blocks_[b].offset, blocks_[b].dim), blocks_[b].n);
}

void ConicProgram::set_block_value(VecX& x, int b, const MatX& M) const {
  x.segment(blocks_[b].offset, blocks_[b].dim) = svec(M);
}

double ConicProgram::max_eq_residual(const VecX& x) const {
  double r = 0.0;
  for (const auto& e : eq_) r = std::max(r, std::abs(e.eval(x)));
  return r;
}

double ConicProgram::max_ineq_violation(const VecX& x) const {
  double r = 0.0;
  for (const auto& e : ineq_) r = std::max(r, e.eval(x));
  return r;
}

void ConicProgram::validate() const {
  auto check_expr = [&](const LinExpr& e, const char* what) {
    for (const auto& [i, c] : e.terms) {
      if (i < 0 || i >= nvar_) throw ProgramError(std::string(what) + ": slot out of range");
      if (!std::isfinite(c)) throw ProgramError(std::string(what) + ": non-finite coefficient");
    }
    if (!std::isfinite(e.constant)) throw ProgramError(std::string(what) + ": non-finite constant");
  };
  for (const auto& e : eq_) check_expr(e, "eq row");
  for (const auto& e : ineq_) check_expr(e, "ineq row");
  for (const auto& e : residuals_) check_expr(e, "objective residual");
  if (obj_kind_ == ObjectiveKind::Linear && linear_q_.size() != nvar_) {
    throw ProgramError("linear objective dimension mismatch");
  }
}

}  // namespace sdrik
