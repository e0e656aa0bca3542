#include "sdrik/solver.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include <Eigen/Sparse>

#include "sdrik/errors.hpp"

namespace sdrik {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::NumericalFailure: return "numerical_failure";
    case SolveStatus::IterationLimit: return "iteration_limit";
  }
  return "?";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using SpMat = Eigen::SparseMatrix<double>;
using SpMatR = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Trip = Eigen::Triplet<double>;

// ---------------------------------------------------------------------------
// Standard conic form:  min c'x  s.t.  A x = b,  G x + s = h,  s in K,
// K = R+^l x SOC(q_1) x ... x PSD(n_1) x ...  The PSD part of G is the
// negated selector of the corresponding x segment (h = 0 there), so cone
// membership of a matrix block is exactly s_block = x_block.
// ---------------------------------------------------------------------------

struct ConeLayout {
  int l = 0;
  struct Soc {
    int offset = 0;
    int dim = 0;
  };
  std::vector<Soc> socs;
  struct Psd {
    int offset = 0;   // offset in the cone vector
    int n = 0;        // matrix dimension
    int dim = 0;      // svec dimension
    int xoffset = 0;  // offset of the block inside x
  };
  std::vector<Psd> psds;
  int m = 0;
  int degree = 0;
};

struct StdForm {
  int n = 0;
  int p = 0;
  VecX c;
  SpMat A;  // p x n
  VecX b;
  SpMat Gl;    // l x n
  SpMatR GlR;  // row-major mirror for row iteration
  VecX hl;
  std::vector<MatX> Gq;  // per SOC, dim x n (dense; SOC dims are small)
  std::vector<VecX> hq;
  ConeLayout cone;
};

VecX cone_identity(const ConeLayout& cone) {
  VecX e = VecX::Zero(cone.m);
  e.head(cone.l).setOnes();
  for (const auto& q : cone.socs) e[q.offset] = 1.0;
  for (const auto& b : cone.psds) {
    for (int i = 0; i < b.n; ++i) e[b.offset + svec_index(b.n, i, i)] = 1.0;
  }
  return e;
}

double cone_mineig(const ConeLayout& cone, const VecX& u) {
  double me = kInf;
  for (int i = 0; i < cone.l; ++i) me = std::min(me, u[i]);
  for (const auto& q : cone.socs) {
    me = std::min(me, u[q.offset] - u.segment(q.offset + 1, q.dim - 1).norm());
  }
  for (const auto& b : cone.psds) {
    MatX M = smat(u.segment(b.offset, b.dim), b.n);
    Eigen::SelfAdjointEigenSolver<MatX> es(M, Eigen::EigenvaluesOnly);
    me = std::min(me, es.eigenvalues()[0]);
  }
  return me;
}

VecX jordan_mul(const ConeLayout& cone, const VecX& u, const VecX& v) {
  VecX out(cone.m);
  out.head(cone.l) = u.head(cone.l).cwiseProduct(v.head(cone.l));
  for (const auto& q : cone.socs) {
    auto u1 = u.segment(q.offset + 1, q.dim - 1);
    auto v1 = v.segment(q.offset + 1, q.dim - 1);
    out[q.offset] = u.segment(q.offset, q.dim).dot(v.segment(q.offset, q.dim));
    out.segment(q.offset + 1, q.dim - 1) = u[q.offset] * v1 + v[q.offset] * u1;
  }
  for (const auto& b : cone.psds) {
    MatX U = smat(u.segment(b.offset, b.dim), b.n);
    MatX V = smat(v.segment(b.offset, b.dim), b.n);
    out.segment(b.offset, b.dim) = svec(0.5 * (U * V + V * U));
  }
  return out;
}

// -------------------------- NT scaling --------------------------------------

struct Scaling {
  VecX w_nn;
  struct SocScale {
    double beta = 1.0;
    VecX v;
    MatX W;
    MatX Winv;
  };
  std::vector<SocScale> socs;
  struct PsdScale {
    MatX r, rinv;
  };
  std::vector<PsdScale> psds;
  VecX lambda;  // scaled point
};

Scaling identity_scaling(const ConeLayout& cone) {
  Scaling sc;
  sc.w_nn = VecX::Ones(cone.l);
  for (const auto& q : cone.socs) {
    Scaling::SocScale s;
    s.v = VecX::Zero(q.dim);
    s.v[0] = 1.0;
    s.W = MatX::Identity(q.dim, q.dim);
    s.Winv = s.W;
    sc.socs.push_back(std::move(s));
  }
  for (const auto& b : cone.psds) {
    Scaling::PsdScale s;
    s.r = MatX::Identity(b.n, b.n);
    s.rinv = s.r;
    sc.psds.push_back(std::move(s));
  }
  sc.lambda = cone_identity(cone);
  return sc;
}

bool compute_scaling(const ConeLayout& cone, const VecX& s, const VecX& z, Scaling& sc) {
  for (int i = 0; i < cone.l; ++i) {
    if (s[i] <= 0 || z[i] <= 0) return false;
  }
  sc.w_nn = (s.head(cone.l).cwiseQuotient(z.head(cone.l))).cwiseSqrt();
  sc.lambda.resize(cone.m);
  sc.lambda.head(cone.l) = (s.head(cone.l).cwiseProduct(z.head(cone.l))).cwiseSqrt();

  sc.socs.assign(cone.socs.size(), {});
  for (size_t k = 0; k < cone.socs.size(); ++k) {
    const auto& q = cone.socs[k];
    VecX sq = s.segment(q.offset, q.dim);
    VecX zq = z.segment(q.offset, q.dim);
    double a2 = sq[0] * sq[0] - sq.tail(q.dim - 1).squaredNorm();
    double b2 = zq[0] * zq[0] - zq.tail(q.dim - 1).squaredNorm();
    if (a2 <= 0 || b2 <= 0) return false;
    double a = std::sqrt(a2), b = std::sqrt(b2);
    VecX sbar = sq / a, zbar = zq / b;
    double gamma = std::sqrt(0.5 * (1.0 + sbar.dot(zbar)));
    if (!(gamma > 0)) return false;
    auto& soc = sc.socs[k];
    soc.v = sbar;
    soc.v[0] += zbar[0];
    soc.v.tail(q.dim - 1) -= zbar.tail(q.dim - 1);  // sbar + J zbar
    soc.v /= 2.0 * gamma;                            // v'Jv = 1
    soc.beta = std::sqrt(a / b);
    const auto& w1 = soc.v.tail(q.dim - 1);
    MatX Wb(q.dim, q.dim);
    Wb(0, 0) = soc.v[0];
    Wb.block(0, 1, 1, q.dim - 1) = w1.transpose();
    Wb.block(1, 0, q.dim - 1, 1) = w1;
    Wb.block(1, 1, q.dim - 1, q.dim - 1) =
        MatX::Identity(q.dim - 1, q.dim - 1) + w1 * w1.transpose() / (1.0 + soc.v[0]);
    soc.W = soc.beta * Wb;
    // W^{-1} = (1/beta) J Wb J
    MatX WbJ = Wb;
    WbJ.block(0, 1, 1, q.dim - 1) *= -1.0;
    WbJ.block(1, 0, q.dim - 1, 1) *= -1.0;
    soc.Winv = (1.0 / soc.beta) * WbJ;
    sc.lambda.segment(q.offset, q.dim) = soc.W * zq;
  }

  sc.psds.assign(cone.psds.size(), {});
  for (size_t k = 0; k < cone.psds.size(); ++k) {
    const auto& b = cone.psds[k];
    MatX S = smat(s.segment(b.offset, b.dim), b.n);
    MatX Z = smat(z.segment(b.offset, b.dim), b.n);
    Eigen::LLT<MatX> lltS(S), lltZ(Z);
    if (lltS.info() != Eigen::Success || lltZ.info() != Eigen::Success) return false;
    MatX L1 = lltS.matrixL();
    MatX L2 = lltZ.matrixL();
    Eigen::JacobiSVD<MatX> svd(L2.transpose() * L1, Eigen::ComputeFullU | Eigen::ComputeFullV);
    VecX sig = svd.singularValues();
    if (sig[sig.size() - 1] <= 0) return false;
    auto& ps = sc.psds[k];
    VecX sqrt_sig = sig.cwiseSqrt();
    ps.r = L1 * svd.matrixV() * sqrt_sig.cwiseInverse().asDiagonal();
    MatX L1inv = L1.triangularView<Eigen::Lower>().solve(MatX::Identity(b.n, b.n));
    ps.rinv = sqrt_sig.asDiagonal() * svd.matrixV().transpose() * L1inv;
    MatX Lam = MatX::Zero(b.n, b.n);
    Lam.diagonal() = sig;
    sc.lambda.segment(b.offset, b.dim) = svec(Lam);
  }
  return true;
}

enum class WOp { W, WT, Winv, WinvT };

VecX apply_W(const Scaling& sc, const ConeLayout& cone, const VecX& u, WOp op) {
  VecX out(cone.m);
  if (op == WOp::W || op == WOp::WT) {
    out.head(cone.l) = u.head(cone.l).cwiseProduct(sc.w_nn);
  } else {
    out.head(cone.l) = u.head(cone.l).cwiseQuotient(sc.w_nn);
  }
  for (size_t k = 0; k < cone.socs.size(); ++k) {
    const auto& q = cone.socs[k];
    const MatX& M = (op == WOp::W || op == WOp::WT) ? sc.socs[k].W : sc.socs[k].Winv;
    out.segment(q.offset, q.dim) = M * u.segment(q.offset, q.dim);
  }
  for (size_t k = 0; k < cone.psds.size(); ++k) {
    const auto& b = cone.psds[k];
    const MatX& r = sc.psds[k].r;
    const MatX& ri = sc.psds[k].rinv;
    MatX U = smat(u.segment(b.offset, b.dim), b.n);
    MatX V;
    switch (op) {
      case WOp::W: V = r.transpose() * U * r; break;
      case WOp::WT: V = r * U * r.transpose(); break;
      case WOp::Winv: V = ri.transpose() * U * ri; break;
      case WOp::WinvT: V = ri * U * ri.transpose(); break;
    }
    out.segment(b.offset, b.dim) = svec(0.5 * (V + V.transpose()));
  }
  return out;
}

/// Solve lambda o x = u for x (lambda is diagonal on the PSD parts).
VecX jordan_div_lambda(const Scaling& sc, const ConeLayout& cone, const VecX& u) {
  VecX out(cone.m);
  out.head(cone.l) = u.head(cone.l).cwiseQuotient(sc.lambda.head(cone.l));
  for (const auto& q : cone.socs) {
    VecX lam = sc.lambda.segment(q.offset, q.dim);
    VecX uu = u.segment(q.offset, q.dim);
    double l0 = lam[0];
    auto l1 = lam.tail(q.dim - 1);
    double det = l0 * l0 - l1.squaredNorm();
    double x0 = (l0 * uu[0] - l1.dot(uu.tail(q.dim - 1))) / det;
    out[q.offset] = x0;
    out.segment(q.offset + 1, q.dim - 1) = (uu.tail(q.dim - 1) - x0 * l1) / l0;
  }
  for (const auto& b : cone.psds) {
    VecX lam(b.n);
    for (int i = 0; i < b.n; ++i) lam[i] = sc.lambda[b.offset + svec_index(b.n, i, i)];
    MatX U = smat(u.segment(b.offset, b.dim), b.n);
    MatX X(b.n, b.n);
    for (int i = 0; i < b.n; ++i)
      for (int j = 0; j < b.n; ++j) X(i, j) = 2.0 * U(i, j) / (lam[i] + lam[j]);
    out.segment(b.offset, b.dim) = svec(X);
  }
  return out;
}

/// Max alpha keeping lambda + alpha d inside the cone.
double max_step(const Scaling& sc, const ConeLayout& cone, const VecX& d) {
  double alpha = kInf;
  for (int i = 0; i < cone.l; ++i) {
    if (d[i] < 0) alpha = std::min(alpha, -sc.lambda[i] / d[i]);
  }
  for (const auto& q : cone.socs) {
    VecX lam = sc.lambda.segment(q.offset, q.dim);
    VecX dd = d.segment(q.offset, q.dim);
    double a2 = dd[0] * dd[0] - dd.tail(q.dim - 1).squaredNorm();
    double a1 = 2.0 * (lam[0] * dd[0] - lam.tail(q.dim - 1).dot(dd.tail(q.dim - 1)));
    double a0 = lam[0] * lam[0] - lam.tail(q.dim - 1).squaredNorm();
    double root = kInf;
    if (std::abs(a2) < 1e-300) {
      if (a1 < 0) root = -a0 / a1;
    } else {
      double disc = a1 * a1 - 4.0 * a2 * a0;
      if (disc >= 0) {
        double sq = std::sqrt(disc);
        for (double r : {(-a1 - sq) / (2 * a2), (-a1 + sq) / (2 * a2)}) {
          if (r > 0) root = std::min(root, r);
        }
      }
    }
    alpha = std::min(alpha, root);
  }
  for (const auto& b : cone.psds) {
    VecX lam(b.n);
    for (int i = 0; i < b.n; ++i) lam[i] = sc.lambda[b.offset + svec_index(b.n, i, i)];
    MatX D = smat(d.segment(b.offset, b.dim), b.n);
    MatX M(b.n, b.n);
    for (int i = 0; i < b.n; ++i)
      for (int j = 0; j < b.n; ++j) M(i, j) = D(i, j) / std::sqrt(lam[i] * lam[j]);
    Eigen::SelfAdjointEigenSolver<MatX> es(M, Eigen::EigenvaluesOnly);
    double mu = es.eigenvalues()[0];
    if (mu < 0) alpha = std::min(alpha, -1.0 / mu);
  }
  return alpha;
}

// ------------------------ products with G -----------------------------------

VecX apply_G(const StdForm& f, const VecX& x) {
  VecX out(f.cone.m);
  if (f.cone.l > 0) out.head(f.cone.l) = f.Gl * x;
  for (size_t k = 0; k < f.cone.socs.size(); ++k) {
    out.segment(f.cone.socs[k].offset, f.cone.socs[k].dim) = f.Gq[k] * x;
  }
  for (const auto& b : f.cone.psds) {
    out.segment(b.offset, b.dim) = -x.segment(b.xoffset, b.dim);
  }
  return out;
}

VecX apply_GT(const StdForm& f, const VecX& z) {
  VecX out = VecX::Zero(f.n);
  if (f.cone.l > 0) out = f.Gl.transpose() * z.head(f.cone.l);
  for (size_t k = 0; k < f.cone.socs.size(); ++k) {
    out.noalias() += f.Gq[k].transpose() * z.segment(f.cone.socs[k].offset, f.cone.socs[k].dim);
  }
  for (const auto& b : f.cone.psds) {
    out.segment(b.xoffset, b.dim) -= z.segment(b.offset, b.dim);
  }
  return out;
}

VecX cone_h(const StdForm& f) {
  VecX h = VecX::Zero(f.cone.m);
  h.head(f.cone.l) = f.hl;
  for (size_t k = 0; k < f.cone.socs.size(); ++k) {
    h.segment(f.cone.socs[k].offset, f.cone.socs[k].dim) = f.hq[k];
  }
  return h;
}

// ------------------------ KKT factorization ---------------------------------

/// Reduced KKT system for the current NT scaling:
///   [ G'(W'W)^{-1}G   A' ] [ux]   [bx + G'(W'W)^{-1}bz]
///   [ A               0  ] [uy] = [by]
/// then uz = (W'W)^{-1}(G ux - bz). The (1,1) block is positive definite
/// because every x slot is covered by a PSD membership row or a SOC row.
struct Kkt {
  const StdForm* f = nullptr;
  const Scaling* sc = nullptr;
  Eigen::LLT<MatX> cholN;
  Eigen::LLT<MatX> cholS;

  VecX apply_WW_inv(const VecX& u) const {
    return apply_W(*sc, f->cone, apply_W(*sc, f->cone, u, WOp::WinvT), WOp::Winv);
  }
  VecX apply_WW(const VecX& u) const {
    return apply_W(*sc, f->cone, apply_W(*sc, f->cone, u, WOp::W), WOp::WT);
  }

  bool factor(const StdForm& form, const Scaling& scaling) {
    f = &form;
    sc = &scaling;
    const int n = f->n;
    MatX N = MatX::Zero(n, n);
    for (size_t k = 0; k < f->cone.psds.size(); ++k) {
      const auto& b = f->cone.psds[k];
      MatX Si = sc->psds[k].rinv.transpose() * sc->psds[k].rinv;
      MatX M(b.dim, b.dim);
      VecX ek = VecX::Zero(b.dim);
      for (int c = 0; c < b.dim; ++c) {
        ek[c] = 1.0;
        M.col(c) = svec(Si * smat(ek, b.n) * Si);
        ek[c] = 0.0;
      }
      N.block(b.xoffset, b.xoffset, b.dim, b.dim) += 0.5 * (M + M.transpose());
    }
    for (int r = 0; r < f->cone.l; ++r) {
      double scale = 1.0 / (sc->w_nn[r] * sc->w_nn[r]);
      for (SpMatR::InnerIterator it(f->GlR, r); it; ++it) {
        for (SpMatR::InnerIterator jt(f->GlR, r); jt; ++jt) {
          N(it.col(), jt.col()) += scale * it.value() * jt.value();
        }
      }
    }
    for (size_t k = 0; k < f->cone.socs.size(); ++k) {
      MatX H = sc->socs[k].Winv * f->Gq[k];
      N.noalias() += H.transpose() * H;
    }

    double jitter = 0.0;
    for (int attempt = 0; attempt < 4; ++attempt) {
      cholN.compute(jitter == 0.0 ? N : MatX(N + jitter * MatX::Identity(n, n)));
      if (cholN.info() == Eigen::Success) break;
      jitter = jitter == 0.0 ? 1e-12 * (1.0 + N.trace() / n) : jitter * 100.0;
    }
    if (cholN.info() != Eigen::Success) return false;

    if (f->p > 0) {
      MatX At = MatX(f->A.transpose());
      MatX K = cholN.matrixL().solve(At);
      MatX S = K.transpose() * K;
      jitter = 0.0;
      for (int attempt = 0; attempt < 4; ++attempt) {
        cholS.compute(jitter == 0.0 ? S : MatX(S + jitter * MatX::Identity(f->p, f->p)));
        if (cholS.info() == Eigen::Success) break;
        jitter = jitter == 0.0 ? 1e-12 * (1.0 + S.trace() / f->p) : jitter * 100.0;
      }
      if (cholS.info() != Eigen::Success) return false;
    }
    return true;
  }

  void solve_once(const VecX& bx, const VecX& by, const VecX& bz, VecX& ux, VecX& uy,
                  VecX& uz) const {
    VecX rhs = bx + apply_GT(*f, apply_WW_inv(bz));
    if (f->p > 0) {
      VecX t = cholN.solve(rhs);
      uy = cholS.solve(f->A * t - by);
      ux = cholN.solve(rhs - f->A.transpose() * uy);
    } else {
      uy.resize(0);
      ux = cholN.solve(rhs);
    }
    uz = apply_WW_inv(apply_G(*f, ux) - bz);
  }

  void solve3(const VecX& bx, const VecX& by, const VecX& bz, VecX& ux, VecX& uy,
              VecX& uz) const {
    solve_once(bx, by, bz, ux, uy, uz);
    double scale = 1.0 + bx.lpNorm<Eigen::Infinity>() + bz.lpNorm<Eigen::Infinity>() +
                   (f->p > 0 ? by.lpNorm<Eigen::Infinity>() : 0.0);
    for (int round = 0; round < 3; ++round) {
      VecX r1 = bx - apply_GT(*f, uz);
      if (f->p > 0) r1 -= f->A.transpose() * uy;
      VecX r2 = f->p > 0 ? VecX(by - f->A * ux) : VecX();
      VecX r3 = bz - (apply_G(*f, ux) - apply_WW(uz));
      double rn = r1.lpNorm<Eigen::Infinity>() + r3.lpNorm<Eigen::Infinity>() +
                  (f->p > 0 ? r2.lpNorm<Eigen::Infinity>() : 0.0);
      if (!(rn > 1e-13 * scale) || !std::isfinite(rn)) break;
      VecX cx, cy, cz;
      solve_once(r1, r2, r3, cx, cy, cz);
      ux += cx;
      if (f->p > 0) uy += cy;
      uz += cz;
    }
  }
};

// ------------------------ homogeneous embedding -----------------------------

struct IpmResult {
  SolveStatus status = SolveStatus::NumericalFailure;
  VecX x, y, z, s;
  int iterations = 0;
  double pres = kInf, dres = kInf, gap = kInf;
  bool certificate = false;
};

IpmResult ipm_solve(const StdForm& f, const SolveSettings& st) {
  IpmResult out;
  const int n = f.n, p = f.p, m = f.cone.m;
  const VecX h = cone_h(f);
  const VecX e = cone_identity(f.cone);
  const double normb = std::max(1.0, f.b.norm());
  const double normh = std::max(1.0, h.norm());
  const double normc = std::max(1.0, f.c.norm());

  Scaling sc = identity_scaling(f.cone);
  Kkt kkt;
  if (!kkt.factor(f, sc)) return out;

  VecX x, y, z, s, tmpx, tmpz;
  kkt.solve3(VecX::Zero(n), f.b, h, x, y, tmpz);
  s = -tmpz;
  {
    double me = cone_mineig(f.cone, s);
    if (me < 1e-8 * std::max(1.0, s.norm())) s += (1.0 - me) * e;
  }
  kkt.solve3(-f.c, VecX::Zero(p), VecX::Zero(m), tmpx, y, z);
  {
    double me = cone_mineig(f.cone, z);
    if (me < 1e-8 * std::max(1.0, z.norm())) z += (1.0 - me) * e;
  }
  double tau = 1.0, kappa = 1.0;
  const double degree = f.cone.degree + 1;
  double mu = (s.dot(z) + tau * kappa) / degree;

  // best normalized iterate seen, returned on unproductive exits
  double best_metric = kInf;
  VecX bx_ = x, by_ = y, bz_ = z, bs_ = s;
  double btau_ = tau;
  auto consider_best = [&](double pres, double dres, double gap, double relgap) {
    double m = std::max({pres, dres, std::min(gap, relgap)});
    if (m < best_metric) {
      best_metric = m;
      bx_ = x; by_ = y; bz_ = z; bs_ = s; btau_ = tau;
    }
  };
  auto finish_best = [&](IpmResult& r, SolveStatus stat) {
    r.x = bx_ / btau_;
    r.y = by_ / btau_;
    r.z = bz_ / btau_;
    r.s = bs_ / btau_;
    // the best snapshot may already satisfy the tolerances
    VecX rx = apply_GT(f, r.z) + f.c;
    if (p > 0) rx += f.A.transpose() * r.y;
    double pres = std::max(p > 0 ? (f.A * r.x - f.b).norm() / normb : 0.0,
                           (apply_G(f, r.x) + r.s - h).norm() / normh);
    double dres = rx.norm() / normc;
    double gap = r.s.dot(r.z);
    double pcost = f.c.dot(r.x);
    double dcost = -((p > 0 ? f.b.dot(r.y) : 0.0) + h.dot(r.z));
    double relgap = kInf;
    if (pcost < 0) relgap = gap / (-pcost);
    else if (dcost > 0) relgap = gap / dcost;
    if (pres <= st.tol && dres <= st.tol &&
        (gap <= st.tol_gap_abs || relgap <= st.tol_gap_rel)) {
      stat = SolveStatus::Optimal;
      r.pres = pres;
      r.dres = dres;
      r.gap = gap;
    }
    r.status = stat;
  };

  int small_steps = 0;
  for (int iter = 0;; ++iter) {
    // the embedding is homogeneous of degree one: renormalize when tau drifts
    if (tau < 1e-2 || tau > 1e2) {
      double g = 1.0 / tau;
      x *= g; y *= g; z *= g; s *= g; kappa *= g; tau = 1.0;
      mu = (s.dot(z) + tau * kappa) / degree;
    }
    VecX rx = apply_GT(f, z) + f.c * tau;
    if (p > 0) rx += f.A.transpose() * y;
    VecX ry = p > 0 ? VecX(f.A * x - f.b * tau) : VecX();
    VecX rz = apply_G(f, x) + s - h * tau;
    double cx = f.c.dot(x), by = p > 0 ? f.b.dot(y) : 0.0, hz = h.dot(z);
    double rtau = kappa + cx + by + hz;

    double pcost = cx / tau;
    double dcost = -(by + hz) / tau;
    double gap = s.dot(z) / (tau * tau);
    double relgap = kInf;
    if (pcost < 0) relgap = gap / (-pcost);
    else if (dcost > 0) relgap = gap / dcost;
    double pres = std::max(p > 0 ? ry.norm() / normb : 0.0, rz.norm() / normh) / tau;
    double dres = rx.norm() / normc / tau;

    out.iterations = iter;
    out.pres = std::min(out.pres, pres);
    out.dres = std::min(out.dres, dres);
    out.gap = std::min(out.gap, gap);
    consider_best(pres, dres, gap, relgap);

    if (st.verbosity > 1) {
      fprintf(stderr,
              "iter %3d  pcost % .6e  dcost % .6e  gap %.2e  pres %.2e  dres %.2e  "
              "tau %.2e  kappa %.2e\n",
              iter, pcost, dcost, gap, pres, dres, tau, kappa);
    }

    if (pres <= st.tol && dres <= st.tol &&
        (gap <= st.tol_gap_abs || relgap <= st.tol_gap_rel)) {
      out.status = SolveStatus::Optimal;
      out.x = x / tau;
      out.y = y / tau;
      out.z = z / tau;
      out.s = s / tau;
      return out;
    }
    if (by + hz < 0) {
      double denom = -(by + hz);
      VecX hres = apply_GT(f, z);
      if (p > 0) hres += f.A.transpose() * y;
      if (hres.norm() / normc / denom <= st.tol) {
        out.status = SolveStatus::Infeasible;
        out.y = y / denom;
        out.z = z / denom;
        out.certificate = true;
        return out;
      }
    }
    if (cx < 0) {
      // dual infeasibility: the primal is unbounded below; reported as a
      // numerical failure since the relaxed sets here are bounded.
      double v1 = p > 0 ? (f.A * x).norm() / normb : 0.0;
      double v2 = (apply_G(f, x) + s).norm() / normh;
      if (std::max(v1, v2) / (-cx) <= st.tol) {
        out.status = SolveStatus::NumericalFailure;
        return out;
      }
    }
    if (iter >= st.max_iterations) {
      finish_best(out, SolveStatus::IterationLimit);
      return out;
    }

    if (!compute_scaling(f.cone, s, z, sc) || !kkt.factor(f, sc)) {
      finish_best(out, SolveStatus::NumericalFailure);
      return out;
    }
    if (st.verbosity > 2) {
      double e1 = (apply_W(sc, f.cone, z, WOp::W) - sc.lambda).norm();
      double e2 = (apply_W(sc, f.cone, s, WOp::WinvT) - sc.lambda).norm();
      fprintf(stderr, "    scaling check |Wz-lam|=%.2e |W^-T s-lam|=%.2e\n", e1, e2);
    }
    VecX x1, y1, z1;
    kkt.solve3(-f.c, f.b, h, x1, y1, z1);
    double denomD = f.c.dot(x1) + (p > 0 ? f.b.dot(y1) : 0.0) + h.dot(z1) - kappa / tau;
    if (!std::isfinite(denomD) || denomD == 0.0) {
      finish_best(out, SolveStatus::NumericalFailure);
      return out;
    }

    auto direction = [&](const VecX& bx, const VecX& by_, const VecX& bz, double btau,
                         const VecX& bs_tilde, double bkappa, VecX& dx, VecX& dy, VecX& dz,
                         VecX& ds, double& dtau, double& dkappa) {
      VecX xh, yh, zh;
      VecX bz_adj = bz - apply_W(sc, f.cone, bs_tilde, WOp::WT);
      kkt.solve3(bx, by_, bz_adj, xh, yh, zh);
      double num = btau - bkappa / tau -
                   (f.c.dot(xh) + (p > 0 ? f.b.dot(yh) : 0.0) + h.dot(zh));
      dtau = num / denomD;
      dx = xh + dtau * x1;
      if (p > 0) dy = yh + dtau * y1;
      dz = zh + dtau * z1;
      ds = apply_W(sc, f.cone, bs_tilde - apply_W(sc, f.cone, dz, WOp::W), WOp::WT);
      dkappa = (bkappa - kappa * dtau) / tau;
    };

    VecX dx, dy, dz, ds;
    double dtau, dkappa;
    direction(-rx, -ry, -rz, -rtau, -sc.lambda, -tau * kappa, dx, dy, dz, ds, dtau, dkappa);

    VecX dsl = apply_W(sc, f.cone, ds, WOp::WinvT);
    VecX dzl = apply_W(sc, f.cone, dz, WOp::W);
    double alpha = std::min(max_step(sc, f.cone, dsl), max_step(sc, f.cone, dzl));
    if (dtau < 0) alpha = std::min(alpha, -tau / dtau);
    if (dkappa < 0) alpha = std::min(alpha, -kappa / dkappa);
    alpha = std::min(alpha, 1.0);
    double gap_aff = (s + alpha * ds).dot(z + alpha * dz) +
                     (tau + alpha * dtau) * (kappa + alpha * dkappa);
    double sigma =
        std::clamp(std::pow(std::max(0.0, gap_aff) / (mu * degree), 3), 0.0, 1.0 - 1e-8);

    VecX corr = jordan_mul(f.cone, dsl, dzl);
    VecX target = -jordan_mul(f.cone, sc.lambda, sc.lambda) - corr + sigma * mu * e;
    VecX bs_tilde = jordan_div_lambda(sc, f.cone, target);
    double bkappa = -(tau * kappa + dtau * dkappa - sigma * mu);
    double rs = 1.0 - sigma;
    direction(-rs * rx, p > 0 ? VecX(-rs * ry) : VecX(), -rs * rz, -rs * rtau, bs_tilde, bkappa,
              dx, dy, dz, ds, dtau, dkappa);

    dsl = apply_W(sc, f.cone, ds, WOp::WinvT);
    dzl = apply_W(sc, f.cone, dz, WOp::W);
    double amax = std::min(max_step(sc, f.cone, dsl), max_step(sc, f.cone, dzl));
    if (dtau < 0) amax = std::min(amax, -tau / dtau);
    if (dkappa < 0) amax = std::min(amax, -kappa / dkappa);
    double step = std::min(1.0, 0.99 * amax);
    if (!(step > 1e-10) || !std::isfinite(step)) {
      finish_best(out, SolveStatus::NumericalFailure);
      return out;
    }
    small_steps = step < 1e-5 ? small_steps + 1 : 0;
    if (small_steps >= 4) {
      finish_best(out, SolveStatus::NumericalFailure);
      return out;
    }

    x += step * dx;
    if (p > 0) y += step * dy;
    z += step * dz;
    s += step * ds;
    tau += step * dtau;
    kappa += step * dkappa;
    mu = (s.dot(z) + tau * kappa) / degree;
  }
}

// ------------------------ program translation -------------------------------

struct Translated {
  StdForm form;
  bool epigraph = false;  // quadratic objective went through a SOC epigraph
  std::vector<int> kept_eq;
  bool presolve_infeasible = false;
};

Translated build_std_form(const ConicProgram& prog, double tol) {
  prog.validate();
  Translated tr;
  StdForm& f = tr.form;
  const int nv = prog.num_vars();
  tr.epigraph = prog.objective_kind() == ConicProgram::ObjectiveKind::Quadratic;
  f.n = nv + (tr.epigraph ? 1 : 0);

  f.c = VecX::Zero(f.n);
  if (tr.epigraph) {
    f.c[nv] = 1.0;
  } else if (prog.objective_kind() == ConicProgram::ObjectiveKind::Linear) {
    f.c.head(nv) = prog.linear_cost();
  }

  // equality rows, with dependent rows dropped (and inconsistency detected)
  std::vector<Trip> atrips;
  std::vector<double> bvals;
  {
    const auto& rows = prog.eq_rows();
    const int praw = static_cast<int>(rows.size());
    MatX Ad = MatX::Zero(praw, f.n);
    VecX bd(praw);
    for (int r = 0; r < praw; ++r) {
      for (const auto& [i, cval] : rows[r].terms) Ad(r, i) += cval;
      bd[r] = -rows[r].constant;
    }
    if (praw > 0) {
      // consistency: least-squares residual doubles as a Farkas certificate
      Eigen::ColPivHouseholderQR<MatX> lsq(Ad);
      VecX x0 = lsq.solve(bd);
      if ((Ad * x0 - bd).lpNorm<Eigen::Infinity>() > tol * (1.0 + bd.lpNorm<Eigen::Infinity>())) {
        tr.presolve_infeasible = true;
        return tr;
      }
      Eigen::ColPivHouseholderQR<MatX> qr(Ad.transpose());
      int rank = static_cast<int>(qr.rank());
      const auto& perm = qr.colsPermutation();
      for (int k = 0; k < rank; ++k) tr.kept_eq.push_back(perm.indices()[k]);
      std::sort(tr.kept_eq.begin(), tr.kept_eq.end());
    }
    f.p = static_cast<int>(tr.kept_eq.size());
    for (int r = 0; r < f.p; ++r) {
      for (const auto& [i, cval] : rows[tr.kept_eq[r]].terms) atrips.emplace_back(r, i, cval);
      bvals.push_back(-rows[tr.kept_eq[r]].constant);
    }
  }
  f.A.resize(f.p, f.n);
  f.A.setFromTriplets(atrips.begin(), atrips.end());
  f.b = Eigen::Map<VecX>(bvals.data(), f.p);

  // nonneg rows
  {
    const auto& rows = prog.ineq_rows();
    f.cone.l = static_cast<int>(rows.size());
    std::vector<Trip> gtrips;
    f.hl.resize(f.cone.l);
    for (int r = 0; r < f.cone.l; ++r) {
      for (const auto& [i, cval] : rows[r].terms) gtrips.emplace_back(r, i, cval);
      f.hl[r] = -rows[r].constant;
    }
    f.Gl.resize(f.cone.l, f.n);
    f.Gl.setFromTriplets(gtrips.begin(), gtrips.end());
    f.GlR = f.Gl;
  }
  int offset = f.cone.l;
  f.cone.degree = f.cone.l;

  // quadratic objective: t >= ||Fx - g||^2 as a second-order cone
  if (tr.epigraph) {
    const auto& res = prog.residuals();
    int dim = static_cast<int>(res.size()) + 2;
    MatX Gq = MatX::Zero(dim, f.n);
    VecX hq = VecX::Zero(dim);
    Gq(0, nv) = -1.0;
    hq[0] = 1.0;
    for (size_t r = 0; r < res.size(); ++r) {
      for (const auto& [i, cval] : res[r].terms) Gq(1 + r, i) = -2.0 * cval;
      hq[1 + r] = 2.0 * res[r].constant;  // -2 g_r with g_r = -constant
    }
    Gq(dim - 1, nv) = 1.0;
    hq[dim - 1] = 1.0;
    f.Gq.push_back(std::move(Gq));
    f.hq.push_back(std::move(hq));
    f.cone.socs.push_back({offset, dim});
    offset += dim;
    f.cone.degree += 1;
  }

  for (const auto& blk : prog.blocks()) {
    f.cone.psds.push_back({offset, blk.n, blk.dim, blk.offset});
    offset += blk.dim;
    f.cone.degree += blk.n;
  }
  f.cone.m = offset;
  return tr;
}

class HsdeBackend final : public ConicBackend {
 public:
  SolverResult solve(const ConicProgram& prog, const SolveSettings& st) override {
    auto t0 = std::chrono::steady_clock::now();
    SolverResult res;
    Translated tr = build_std_form(prog, st.tol);
    if (tr.presolve_infeasible) {
      res.status = SolveStatus::Infeasible;
      res.has_dual_certificate = true;  // least-squares residual is Farkas evidence
      res.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      return res;
    }
    IpmResult ipm = ipm_solve(tr.form, st);
    res.status = ipm.status;
    res.iterations = ipm.iterations;
    res.primal_residual = ipm.pres;
    res.dual_residual = ipm.dres;
    res.duality_gap = ipm.gap;
    res.has_dual_certificate = ipm.certificate;
    if (ipm.x.size() > 0) {
      res.x = ipm.x.head(prog.num_vars());
      for (int b = 0; b < static_cast<int>(prog.blocks().size()); ++b) {
        res.block_values.push_back(prog.block_value(res.x, b));
      }
      res.objective = prog.objective_value(res.x);
      res.internal_objective = res.objective;
      if (tr.epigraph) {
        // the epigraph variable carries the squared residual
        res.internal_objective = ipm.x[prog.num_vars()] + prog.objective_offset();
      }
    }
    res.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
  }
};

}  // namespace

std::unique_ptr<ConicBackend> make_default_backend() { return std::make_unique<HsdeBackend>(); }

SolverResult solve(const ConicProgram& prog, const SolveSettings& settings) {
  HsdeBackend backend;
  return backend.solve(prog, settings);
}

}  // namespace sdrik
