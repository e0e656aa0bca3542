#pragma once

#include <map>

#include "sdrik/geometry.hpp"

namespace sdrik {

/// Smallest eigenvalue may be this far below zero and still count as PSD.
inline constexpr double kTolPsd = 1e-9;
/// Tolerance on the linear structure relations of lifted blocks.
inline constexpr double kTolLin = 1e-8;

using Mat7 = Eigen::Matrix<double, 7, 7>;
using Mat8 = Eigen::Matrix<double, 8, 8>;
using Mat4 = Eigen::Matrix<double, 4, 4>;

// A rotation R lifts to Y = v v^T with v = (col1(R), col2(R), 1), a 7x7 PSD
// matrix of trace 3. A prismatic pair (R, tau) lifts to Y_tau = w w^T with
// w = (sqrt(tau) y, sqrt(1-tau) y, sqrt(tau), sqrt(1-tau)), y the third
// column of R, an 8x8 PSD matrix of trace 2. A quaternion q lifts to
// Q = q q^T, 4x4 PSD of trace 1. Dropping the rank-1 condition on these
// blocks makes every kinematic constraint linear.

Mat7 lift_rotation(const Mat3& R);

/// Columns 1-2 read from the last column of Y, column 3 from the cross
/// product entries of the top-left block. Total on the relaxed set: the
/// result is in SO(3) exactly when rank(Y) = 1. Throws StateError when the
/// structure rows are violated beyond kTolLin.
Mat3 recover_rotation(const Mat7& Y);

Mat8 lift_prismatic(const Mat3& R, double tau);

/// Entry (7,7) of Y_tau; clamped to [0,1] only when within kTolLin of the
/// bounds, out-of-range values throw StateError.
double recover_tau(const Mat8& Ytau);

Mat4 lift_quaternion(const Mat3& R);

/// The linear quaternion-to-rotation expression evaluated on the entries of
/// Q; in SO(3) exactly when rank(Q) = 1.
Mat3 rotation_from_quaternion_lift(const Mat4& Q);

/// Second-largest eigenvalue, the rank-1 certificate residual.
double rank_gap(const MatX& M);

/// Largest eigenvalue and a unit eigenvector for it.
std::pair<double, VecX> eig_top(const MatX& M);

/// Max violation of the rotation-lift structure rows (block traces and the
/// (7,7) pin).
double rotation_structure_residual(const Mat7& Y);

/// Max violation of items 1-6 of the prismatic-lift relations.
double prismatic_structure_residual(const Mat8& Ytau);

enum class LiftMode { Rotation, Quaternion };

/// Per-vertex lifted blocks; rotation blocks keyed by link, prismatic blocks
/// keyed by prismatic edge.
struct LiftedState {
  LiftMode mode = LiftMode::Rotation;
  std::map<int, MatX> rotations;
  std::map<int, MatX> prismatics;

  /// Root of the summed squared Frobenius distance between the blocks of two
  /// states (mixed block sizes).
  double distance(const LiftedState& other) const;
};

}  // namespace sdrik
