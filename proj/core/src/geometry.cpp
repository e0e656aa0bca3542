#include "sdrik/geometry.hpp"

#include <cmath>

#include "sdrik/errors.hpp"

namespace sdrik {

bool is_rotation(const Mat3& R, double tol) {
  Mat3 gram = R.transpose() * R;
  if ((gram - Mat3::Identity()).cwiseAbs().maxCoeff() > tol) return false;
  return std::abs(R.determinant() - 1.0) <= tol * 10.0;
}

void require_rotation(const Mat3& R, const char* what, double tol) {
  if (!is_rotation(R, tol)) {
    throw ModelError(std::string(what) + ": not a rotation matrix (orthonormality or det(+1) violated)");
  }
}

Mat3 rot_x(double a) {
  Mat3 R;
  R << 1, 0, 0, 0, std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a);
  return R;
}

Mat3 rot_y(double a) {
  Mat3 R;
  R << std::cos(a), 0, std::sin(a), 0, 1, 0, -std::sin(a), 0, std::cos(a);
  return R;
}

Mat3 rot_z(double a) {
  Mat3 R;
  R << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
  return R;
}

Mat3 rot_zyx(double alpha, double beta, double gamma) {
  return rot_z(alpha) * rot_y(beta) * rot_x(gamma);
}

Vec4 quaternion_from_rotation(const Mat3& R) {
  // Branch on the largest of (w, x, y, z) magnitudes via the trace tests.
  double t = R.trace();
  Vec4 q;
  if (t > R(0, 0) && t > R(1, 1) && t > R(2, 2)) {
    double r = std::sqrt(1.0 + t);
    double s = 0.5 / r;
    q << 0.5 * r, (R(2, 1) - R(1, 2)) * s, (R(0, 2) - R(2, 0)) * s, (R(1, 0) - R(0, 1)) * s;
  } else if (R(0, 0) >= R(1, 1) && R(0, 0) >= R(2, 2)) {
    double r = std::sqrt(1.0 + R(0, 0) - R(1, 1) - R(2, 2));
    double s = 0.5 / r;
    q << (R(2, 1) - R(1, 2)) * s, 0.5 * r, (R(0, 1) + R(1, 0)) * s, (R(0, 2) + R(2, 0)) * s;
  } else if (R(1, 1) >= R(2, 2)) {
    double r = std::sqrt(1.0 - R(0, 0) + R(1, 1) - R(2, 2));
    double s = 0.5 / r;
    q << (R(0, 2) - R(2, 0)) * s, (R(0, 1) + R(1, 0)) * s, 0.5 * r, (R(1, 2) + R(2, 1)) * s;
  } else {
    double r = std::sqrt(1.0 - R(0, 0) - R(1, 1) + R(2, 2));
    double s = 0.5 / r;
    q << (R(1, 0) - R(0, 1)) * s, (R(0, 2) + R(2, 0)) * s, (R(1, 2) + R(2, 1)) * s, 0.5 * r;
  }
  q.normalize();
  int imax = 0;
  q.cwiseAbs().maxCoeff(&imax);
  if (q[imax] < 0) q = -q;
  return q;
}

Mat3 rotation_from_quaternion(const Vec4& q) {
  double w = q[0], x = q[1], y = q[2], z = q[3];
  Mat3 R;
  R << 1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w),
      2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w),
      2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y);
  return R;
}

Mat3 random_rotation(Rng& rng) {
  Vec4 q;
  for (int i = 0; i < 4; ++i) q[i] = rng.normal();
  q.normalize();
  return rotation_from_quaternion(q);
}

Mat3 project_to_so3(const Mat3& M) {
  Eigen::JacobiSVD<Mat3> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.singularValues()(1) < 1e-12) {
    throw StateError("project_to_so3: input is rank deficient, projection ill-defined");
  }
  Mat3 U = svd.matrixU();
  Mat3 V = svd.matrixV();
  double d = (U * V.transpose()).determinant();
  Mat3 S = Mat3::Identity();
  S(2, 2) = d < 0 ? -1.0 : 1.0;
  return U * S * V.transpose();
}

}  // namespace sdrik
