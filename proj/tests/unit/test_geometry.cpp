#include <doctest.h>

#include "sdrik/errors.hpp"
#include "sdrik/geometry.hpp"

using namespace sdrik;

TEST_CASE("rotation constructors and validation") {
  CHECK(is_rotation(Mat3::Identity()));
  CHECK(is_rotation(rot_z(0.7) * rot_x(-1.2)));
  Mat3 M = 2.0 * Mat3::Identity();
  CHECK(!is_rotation(M));
  CHECK_THROWS_AS(require_rotation(M, "test"), ModelError);
  Mat3 refl = Mat3::Identity();
  refl(2, 2) = -1.0;  // det -1
  CHECK(!is_rotation(refl));
}

TEST_CASE("quaternion round trip, including near half turns") {
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    Mat3 R = random_rotation(rng);
    CHECK((rotation_from_quaternion(quaternion_from_rotation(R)) - R).norm() < 1e-12);
  }
  for (double a : {M_PI, M_PI - 1e-9, -M_PI + 1e-9}) {
    for (auto R : {rot_x(a), rot_y(a), rot_z(a)}) {
      CHECK((rotation_from_quaternion(quaternion_from_rotation(R)) - R).norm() < 1e-7);
    }
  }
}

TEST_CASE("sign ambiguity does not change the recovered rotation") {
  Rng rng(5);
  Mat3 R = random_rotation(rng);
  Vec4 q = quaternion_from_rotation(R);
  CHECK((rotation_from_quaternion(q) - rotation_from_quaternion(Vec4(-q))).norm() < 1e-14);
}

TEST_CASE("so3 projection") {
  CHECK((project_to_so3(Mat3::Identity()) - Mat3::Identity()).norm() < 1e-14);
  // scaling case: P(2I) = I
  CHECK((project_to_so3(2.0 * Mat3::Identity()) - Mat3::Identity()).norm() < 1e-12);
  Rng rng(9);
  for (int i = 0; i < 50; ++i) {
    Mat3 R = random_rotation(rng);
    CHECK((project_to_so3(R) - R).norm() < 1e-12);
    // perturbed matrices project back to SO(3)
    Mat3 noisy = R;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) noisy(r, c) += 0.05 * rng.normal();
    Mat3 P = project_to_so3(noisy);
    CHECK(is_rotation(P, 1e-9));
  }
  Mat3 neg = -Mat3::Identity();  // det -1, projection must have det +1
  CHECK(project_to_so3(neg).determinant() == doctest::Approx(1.0));
}

TEST_CASE("rng determinism") {
  Rng a(42), b(42);
  for (int i = 0; i < 10; ++i) CHECK(a.uniform() == b.uniform());
  Rng c(42);
  double first = c.uniform();
  CHECK(first >= 0.0);
  CHECK(first < 1.0);
}

TEST_CASE("pose composition") {
  Pose a(rot_z(0.5), Vec3(1, 2, 3));
  Pose b(rot_x(-0.3), Vec3(0.5, 0, -1));
  Pose ab = a.compose(b);
  CHECK((ab.rotation - a.rotation * b.rotation).norm() < 1e-14);
  Pose round = a.compose(a.inverse());
  CHECK((round.rotation - Mat3::Identity()).norm() < 1e-14);
  CHECK(round.translation.norm() < 1e-14);
}
