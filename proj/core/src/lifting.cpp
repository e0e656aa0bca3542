#include "sdrik/lifting.hpp"

#include <cmath>

#include "sdrik/errors.hpp"

namespace sdrik {

Mat7 lift_rotation(const Mat3& R) {
  require_rotation(R, "lift_rotation");
  Eigen::Matrix<double, 7, 1> v;
  v << R.col(0), R.col(1), 1.0;
  return v * v.transpose();
}

double rotation_structure_residual(const Mat7& Y) {
  double r = 0.0;
  r = std::max(r, std::abs(Y.block<3, 3>(0, 0).trace() - 1.0));
  r = std::max(r, std::abs(Y.block<3, 3>(3, 3).trace() - 1.0));
  r = std::max(r, std::abs(Y.block<3, 3>(0, 3).trace()));
  r = std::max(r, std::abs(Y(6, 6) - 1.0));
  return r;
}

Mat3 recover_rotation(const Mat7& Y) {
  double res = rotation_structure_residual(Y);
  if (res > kTolLin) {
    throw StateError("recover_rotation: structure rows violated by " + std::to_string(res));
  }
  Mat3 R;
  R.col(0) = Y.block<3, 1>(0, 6);
  R.col(1) = Y.block<3, 1>(3, 6);
  R.col(2) << Y(1, 5) - Y(2, 4), Y(2, 3) - Y(0, 5), Y(0, 4) - Y(1, 3);
  return R;
}

Mat8 lift_prismatic(const Mat3& R, double tau) {
  Vec3 y = R.col(2);
  if (std::abs(y.norm() - 1.0) > kTolLin) {
    throw ModelError("lift_prismatic: third column of R is not unit length");
  }
  if (tau < 0.0 || tau > 1.0) {
    throw ModelError("lift_prismatic: tau outside [0,1]");
  }
  Eigen::Matrix<double, 8, 1> w;
  double st = std::sqrt(tau), su = std::sqrt(1.0 - tau);
  w << st * y, su * y, st, su;
  return w * w.transpose();
}

double prismatic_structure_residual(const Mat8& Y) {
  double r = 0.0;
  r = std::max(r, std::abs(Y.trace() - 2.0));                              // item 1
  r = std::max(r, std::abs(Y.block<3, 3>(0, 0).trace() - Y(6, 6)));        // item 2
  r = std::max(r, std::abs(Y.block<3, 3>(3, 3).trace() - Y(7, 7)));
  r = std::max(r, (Y.block<3, 1>(3, 6) - Y.block<3, 1>(0, 7)).cwiseAbs().maxCoeff());  // item 3
  r = std::max(r, std::abs(Y.block<3, 3>(0, 3).trace() - Y(6, 7)));        // item 4
  r = std::max(r, std::max(-Y(6, 6), Y(6, 6) - 1.0));                      // item 5
  r = std::max(r, -Y(6, 7));                                               // item 6
  return r;
}

double recover_tau(const Mat8& Ytau) {
  double t = Ytau(6, 6);
  if (t < -kTolLin || t > 1.0 + kTolLin) {
    throw StateError("recover_tau: entry (7,7) = " + std::to_string(t) + " outside [0,1]");
  }
  return std::min(1.0, std::max(0.0, t));
}

Mat4 lift_quaternion(const Mat3& R) {
  require_rotation(R, "lift_quaternion");
  Vec4 q = quaternion_from_rotation(R);
  return q * q.transpose();
}

Mat3 rotation_from_quaternion_lift(const Mat4& Q) {
  if (std::abs(Q.trace() - 1.0) > kTolLin) {
    throw StateError("rotation_from_quaternion_lift: trace(Q) != 1");
  }
  Mat3 R;
  R << 1 - 2 * (Q(2, 2) + Q(3, 3)), 2 * (Q(1, 2) - Q(3, 0)), 2 * (Q(1, 3) + Q(2, 0)),
      2 * (Q(1, 2) + Q(3, 0)), 1 - 2 * (Q(1, 1) + Q(3, 3)), 2 * (Q(2, 3) - Q(1, 0)),
      2 * (Q(1, 3) - Q(2, 0)), 2 * (Q(2, 3) + Q(1, 0)), 1 - 2 * (Q(1, 1) + Q(2, 2));
  return R;
}

double rank_gap(const MatX& M) {
  Eigen::SelfAdjointEigenSolver<MatX> es(M, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();  // ascending
  return std::max(0.0, ev[ev.size() - 2]);
}

std::pair<double, VecX> eig_top(const MatX& M) {
  Eigen::SelfAdjointEigenSolver<MatX> es(M);
  int last = static_cast<int>(M.rows()) - 1;
  return {es.eigenvalues()[last], es.eigenvectors().col(last)};
}

double LiftedState::distance(const LiftedState& other) const {
  double sq = 0.0;
  for (const auto& [k, Y] : rotations) sq += (Y - other.rotations.at(k)).squaredNorm();
  for (const auto& [k, Y] : prismatics) sq += (Y - other.prismatics.at(k)).squaredNorm();
  return std::sqrt(sq);
}

}  // namespace sdrik
