#include "dominion/cone.hpp"
#include "dominion/error.hpp"
#include "test_util.hpp"

#include <doctest.h>

using namespace dominion;

namespace {

SymMatrix example_cone() {
  Matrix P = Matrix::Zero(3, 3);
  P << -5.1987, 3.6260, 0, 3.6260, 6.1987, 0, 0, 0, 1;
  return SymMatrix(P);
}

}  // namespace

TEST_CASE("make_cone records rank and negative subspace") {
  const MatrixConeSpec cone = make_cone(example_cone());
  CHECK(cone.rank_k() == 1);
  CHECK(cone.n() == 3);
  REQUIRE(cone.negative_subspace().cols() == 1);
  const Vector u = cone.negative_subspace().col(0);
  CHECK(u.norm() == doctest::Approx(1.0));
  CHECK(quad_form(cone.P(), u) == doctest::Approx(-6.254484265286285).epsilon(1e-12));
  CHECK(cone_locate(cone, u) == ConeLocation::Interior);

  CHECK_THROWS_AS(make_cone(SymMatrix::diagonal({1.0, 0.0})), Error);
  CHECK(make_cone(SymMatrix::identity(2)).rank_k() == 0);
}

TEST_CASE("quad form against an explicit product") {
  std::mt19937_64 rng(3);
  const SymMatrix P(testutil::random_symmetric(rng, 4));
  const Vector v = testutil::random_matrix(rng, 4, 1);
  CHECK(quad_form(P, v) == doctest::Approx((v.transpose() * P.matrix() * v)(0, 0)).epsilon(1e-14));
  CHECK_THROWS_AS(quad_form(P, Vector::Ones(3)), Error);
}

TEST_CASE("classification is symmetric, scale invariant and includes zero on the boundary") {
  const MatrixConeSpec cone = make_cone(example_cone());
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    const Vector v = testutil::random_matrix(rng, 3, 1, 2.0);
    const ConeLocation loc = cone_locate(cone, v);
    CHECK(cone_locate(cone, -v) == loc);
    CHECK(cone_locate(cone, 7.5 * v) == loc);
    CHECK(cone_locate(cone, 1e-3 * v) == loc);
  }
  CHECK(cone_locate(cone, Vector::Zero(3)) == ConeLocation::Boundary);
}

TEST_CASE("boundary band") {
  // P = diag(-1, 1): v = (1, 1) is exactly on the boundary.
  const MatrixConeSpec cone = make_cone(SymMatrix::diagonal({-1.0, 1.0}));
  Vector v(2);
  v << 1.0, 1.0;
  CHECK(cone_locate(cone, v) == ConeLocation::Boundary);
  v << 1.0, 1.0 + 1e-12;
  CHECK(cone_locate(cone, v) == ConeLocation::Boundary);
  v << 1.0, 1.0 + 1e-6;
  CHECK(cone_locate(cone, v) == ConeLocation::Outside);
  CHECK(cone_locate(cone, v, 1e-3) == ConeLocation::Boundary);
  v << 1.0, 0.5;
  CHECK(cone_locate(cone, v) == ConeLocation::Interior);
  CHECK(to_string(ConeLocation::Outside) == "outside");
}

TEST_CASE("negative eigenvectors lie in the cone, positive ones do not") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const SymMatrix P(testutil::random_symmetric(rng, 5, 2.0));
    const SymEigen e = sym_eigen(P);
    const MatrixConeSpec cone = make_cone(P);
    for (Eigen::Index j = 0; j < e.values.size(); ++j) {
      const ConeLocation loc = cone_locate(cone, e.vectors.col(j));
      CHECK(loc == (e.values[j] < 0 ? ConeLocation::Interior : ConeLocation::Outside));
    }
    // Any combination of negative eigenvectors stays in the cone.
    const Matrix& N = cone.negative_subspace();
    if (N.cols() > 0) {
      const Vector w = N * testutil::random_matrix(rng, N.cols(), 1);
      CHECK(cone_locate(cone, w) == ConeLocation::Interior);
    }
  }
}
