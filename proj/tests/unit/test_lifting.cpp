#include <doctest.h>

#include "sdrik/errors.hpp"
#include "sdrik/lifting.hpp"
#include "sdrik/sym.hpp"

using namespace sdrik;

TEST_CASE("identity rotation lift") {
  Mat7 Y = lift_rotation(Mat3::Identity());
  Eigen::Matrix<double, 7, 1> v;
  v << 1, 0, 0, 0, 1, 0, 1;
  CHECK((Y - v * v.transpose()).norm() < 1e-15);
  auto [l1, v1] = eig_top(Y);
  CHECK(l1 == doctest::Approx(3.0));
  CHECK(rank_gap(Y) < 1e-12);
}

TEST_CASE("quarter turn lift vector") {
  Mat7 Y = lift_rotation(rot_z(M_PI / 2));
  Eigen::Matrix<double, 7, 1> v;
  v << 0, 1, 0, -1, 0, 0, 1;
  CHECK((Y - v * v.transpose()).norm() < 1e-12);
}

TEST_CASE("rotation lift round trip") {
  Rng rng(23);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    Mat3 R = random_rotation(rng);
    worst = std::max(worst, (recover_rotation(lift_rotation(R)) - R).norm());
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("recover_rotation is total on averaged lifts") {
  Rng rng(29);
  Mat3 Ra = random_rotation(rng), Rb = random_rotation(rng);
  Mat7 Y = 0.5 * (lift_rotation(Ra) + lift_rotation(Rb));
  Mat3 R = recover_rotation(Y);  // structure rows still hold on the average
  Vec3 y1 = 0.5 * (Ra.col(0) + Rb.col(0));
  Vec3 y2 = 0.5 * (Ra.col(1) + Rb.col(1));
  CHECK((R.col(0) - y1).norm() < 1e-14);
  CHECK((R.col(1) - y2).norm() < 1e-14);
  // the third column is generally NOT the cross product of recovered columns
  Vec3 avg_cross = 0.5 * (Ra.col(2) + Rb.col(2));
  CHECK((R.col(2) - avg_cross).norm() < 1e-14);  // it is the averaged cross entries
  CHECK(rank_gap(Y) > 1e-3);                     // flagged by the rank gap
  // corrupted state
  Mat7 bad = Y;
  bad(6, 6) = 2.0;
  CHECK_THROWS_AS(recover_rotation(bad), StateError);
}

TEST_CASE("prismatic lift structure") {
  SUBCASE("full extension") {
    Mat8 Y = lift_prismatic(Mat3::Identity(), 1.0);
    CHECK(Y(6, 6) == doctest::Approx(1.0));
    CHECK((Y.block<3, 1>(0, 6) - Vec3(0, 0, 1)).norm() < 1e-15);
  }
  SUBCASE("zero extension") {
    Mat8 Y = lift_prismatic(Mat3::Identity(), 0.0);
    CHECK(Y.block<3, 1>(0, 6).norm() < 1e-15);
    CHECK(Y(6, 6) == doctest::Approx(0.0));
  }
  SUBCASE("all seven relations hold on random lifts") {
    Rng rng(31);
    for (int i = 0; i < 200; ++i) {
      Mat3 R = random_rotation(rng);
      double tau = rng.uniform();
      Mat8 Y = lift_prismatic(R, tau);
      CHECK(prismatic_structure_residual(Y) < 1e-12);
      // item 7 against the rotation lift of the same R
      Mat7 Yr = lift_rotation(R);
      Vec3 cross(Yr(1, 5) - Yr(2, 4), Yr(2, 3) - Yr(0, 5), Yr(0, 4) - Yr(1, 3));
      Vec3 item7 = Y.block<3, 1>(0, 6) + Y.block<3, 1>(3, 7);
      CHECK((item7 - cross).norm() < 1e-12);
      // trace identity: tau + (1-tau) + tau||y||^2 + (1-tau)||y||^2 = 2
      CHECK(Y.trace() == doctest::Approx(2.0).epsilon(1e-14));
      CHECK(recover_tau(Y) == doctest::Approx(tau).epsilon(1e-12));
    }
  }
  SUBCASE("tau domain") {
    CHECK_THROWS_AS(lift_prismatic(Mat3::Identity(), 1.2), ModelError);
    Mat8 Y = lift_prismatic(Mat3::Identity(), 1.0);
    Mat8 nudged = Y;
    nudged(6, 6) = 1.0 + 1e-12;
    CHECK(recover_tau(nudged) == 1.0);
    nudged(6, 6) = 1.01;
    CHECK_THROWS_AS(recover_tau(nudged), StateError);
  }
}

TEST_CASE("appendix decomposition of rank-1 constrained 8x8 matrices") {
  // every rank-1 PSD matrix satisfying items 1-6 factors as
  // (+-sqrt(t) y, +-sqrt(1-t) y, +-sqrt(t), +-sqrt(1-t)) with matching signs
  // on the last two entries
  Rng rng(37);
  int checked = 0;
  for (int i = 0; i < 1000; ++i) {
    Mat3 R = random_rotation(rng);
    double t = rng.uniform();
    double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
    Eigen::Matrix<double, 8, 1> w;
    w << std::sqrt(t) * R.col(2), std::sqrt(1 - t) * R.col(2), std::sqrt(t), std::sqrt(1 - t);
    w *= sign;  // the construction is sign-symmetric
    Mat8 Y = w * w.transpose();
    REQUIRE(prismatic_structure_residual(Y) < 1e-12);

    // factor Y and pattern-match
    auto [l1, v1] = eig_top(Y);
    Eigen::Matrix<double, 8, 1> u = std::sqrt(l1) * v1;
    CHECK((Y - u * u.transpose()).norm() < 1e-9);
    double rt = u[6], ru = u[7];
    // both tails carry the same sign
    CHECK(rt * ru >= -1e-12);
    CHECK(rt * rt == doctest::Approx(t).epsilon(1e-9));
    Vec3 y1 = u.head<3>(), y2 = u.segment<3>(3);
    // both vector parts are multiples of the same unit vector
    CHECK((rt * y2 - ru * y1).norm() < 1e-9);
    // |y| = 1 scaled by the respective coefficients
    CHECK(y1.norm() == doctest::Approx(std::abs(rt)).epsilon(1e-9));
    CHECK(y2.norm() == doctest::Approx(std::abs(ru)).epsilon(1e-9));
    ++checked;
  }
  CHECK(checked == 1000);
}

TEST_CASE("quaternion lift") {
  CHECK((lift_quaternion(Mat3::Identity()) - Mat4(Vec4(1, 0, 0, 0).asDiagonal())).norm() <
        1e-15);
  CHECK((lift_quaternion(rot_x(M_PI)) - Mat4(Vec4(0, 1, 0, 0).asDiagonal())).norm() < 1e-12);

  SUBCASE("round trip") {
    Rng rng(41);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      Mat3 R = random_rotation(rng);
      worst = std::max(worst, (rotation_from_quaternion_lift(lift_quaternion(R)) - R).norm());
    }
    CHECK(worst < 1e-12);
  }
  SUBCASE("pure z quaternion gives a half turn") {
    Mat4 Q = Vec4(0, 0, 0, 1).asDiagonal();
    Mat3 R = rotation_from_quaternion_lift(Q);
    CHECK((R - rot_z(M_PI)).norm() < 1e-14);
  }
  SUBCASE("rank-2 lift maps off the manifold") {
    Mat4 Q = Vec4(0.5, 0.5, 0, 0).asDiagonal();
    Mat3 R = rotation_from_quaternion_lift(Q);
    CHECK(std::abs(R.determinant() - 1.0) > 1e-3);  // detected by so3 distance
  }
}

TEST_CASE("rank gap") {
  CHECK(rank_gap(MatX(Vec3(2, 1, 0).asDiagonal())) == doctest::Approx(1.0));
  Rng rng(43);
  for (int i = 0; i < 50; ++i) {
    VecX v(7);
    for (int k = 0; k < 7; ++k) v[k] = rng.normal();
    v.normalize();
    MatX M = v * v.transpose();
    CHECK(rank_gap(M) < 1e-12);
    double eps = 1e-4;
    MatX P = M + eps * MatX::Identity(7, 7);
    double gap = rank_gap(P);
    CHECK(gap >= eps * (1 - 1e-9));
    CHECK(gap <= eps * (1 + 1e-9));
  }
}

TEST_CASE("eig_top matches the dense eigensolver") {
  Rng rng(47);
  for (int i = 0; i < 100; ++i) {
    MatX A(7, 7);
    for (int r = 0; r < 7; ++r)
      for (int c = 0; c < 7; ++c) A(r, c) = rng.normal();
    MatX S = 0.5 * (A + A.transpose());
    auto [l1, v1] = eig_top(S);
    Eigen::SelfAdjointEigenSolver<MatX> es(S);
    CHECK(l1 == doctest::Approx(es.eigenvalues()[6]));
    CHECK((S * v1 - l1 * v1).norm() <= 1e-10 * S.norm() + 1e-12);
    CHECK(v1.norm() == doctest::Approx(1.0));
  }
}

TEST_CASE("svec pairing matches the frobenius inner product") {
  Rng rng(53);
  MatX A(5, 5), B(5, 5);
  for (int r = 0; r < 5; ++r)
    for (int c = 0; c < 5; ++c) {
      A(r, c) = rng.normal();
      B(r, c) = rng.normal();
    }
  MatX As = 0.5 * (A + A.transpose()), Bs = 0.5 * (B + B.transpose());
  CHECK(svec(As).dot(svec(Bs)) == doctest::Approx((As * Bs).trace()));
  CHECK((smat(svec(As), 5) - As).norm() < 1e-14);
}
