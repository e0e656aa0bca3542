#pragma once

#include <cmath>

#include <Eigen/Dense>

namespace sdrik {

// Symmetric vectorization: column-major lower triangle with sqrt(2)-scaled
// off-diagonals, so that svec(A).dot(svec(B)) equals the Frobenius inner
// product <A, B>.

inline constexpr int svec_dim(int n) { return n * (n + 1) / 2; }

/// Slot of entry (i,j), i >= j, in the svec of an n x n symmetric matrix.
inline int svec_index(int n, int i, int j) {
  if (i < j) std::swap(i, j);
  return j * n - j * (j - 1) / 2 + (i - j);
}

/// Coefficient multiplier turning "c times entry (i,j) of M" into a
/// coefficient on svec slot (i,j).
inline double svec_entry_coeff(int i, int j) { return i == j ? 1.0 : M_SQRT1_2; }

inline Eigen::VectorXd svec(const Eigen::MatrixXd& M) {
  const int n = static_cast<int>(M.rows());
  Eigen::VectorXd v(svec_dim(n));
  int k = 0;
  for (int j = 0; j < n; ++j) {
    v[k++] = M(j, j);
    for (int i = j + 1; i < n; ++i) v[k++] = M_SQRT2 * 0.5 * (M(i, j) + M(j, i));
  }
  return v;
}

inline Eigen::MatrixXd smat(const Eigen::VectorXd& v, int n) {
  Eigen::MatrixXd M(n, n);
  int k = 0;
  for (int j = 0; j < n; ++j) {
    M(j, j) = v[k++];
    for (int i = j + 1; i < n; ++i) {
      M(i, j) = M(j, i) = M_SQRT1_2 * v[k++];
    }
  }
  return M;
}

}  // namespace sdrik
