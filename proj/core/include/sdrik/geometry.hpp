#pragma once

#include <Eigen/Dense>

#include "sdrik/rng.hpp"

namespace sdrik {

using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using MatX = Eigen::MatrixXd;
using VecX = Eigen::VectorXd;

/// Tolerance for validating user-supplied rotation matrices.
inline constexpr double kTolSo3 = 1e-8;

/// True when R has orthonormal columns and det +1 within tol.
bool is_rotation(const Mat3& R, double tol = kTolSo3);

/// Throws ModelError naming `what` if R is not a rotation within tol.
void require_rotation(const Mat3& R, const char* what, double tol = kTolSo3);

Mat3 rot_x(double a);
Mat3 rot_y(double a);
Mat3 rot_z(double a);

/// R_z(alpha) * R_y(beta) * R_x(gamma).
Mat3 rot_zyx(double alpha, double beta, double gamma);

/// Unit quaternion (w,x,y,z) of R, taking the branch with the largest
/// component first to avoid cancellation near half turns. Sign convention:
/// the largest-magnitude component is positive.
Vec4 quaternion_from_rotation(const Mat3& R);

Mat3 rotation_from_quaternion(const Vec4& q);

/// Haar-uniform random rotation (normalized Gaussian quaternion).
Mat3 random_rotation(Rng& rng);

/// Special-orthogonal polar factor: the closest matrix in SO(3) in Frobenius
/// norm, with the determinant sign corrected. Throws StateError when M is
/// too close to singular for the projection to be well defined.
Mat3 project_to_so3(const Mat3& M);

/// Rigid transform from a body frame to the world frame.
struct Pose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Pose() = default;
  Pose(const Mat3& R, const Vec3& T) : rotation(R), translation(T) {}

  Pose compose(const Pose& other) const {
    return Pose(rotation * other.rotation, translation + rotation * other.translation);
  }
  Pose inverse() const {
    return Pose(rotation.transpose(), -(rotation.transpose() * translation));
  }
};

}  // namespace sdrik
