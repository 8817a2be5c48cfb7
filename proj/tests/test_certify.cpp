#include "dominion/certify.hpp"
#include "dominion/dynamics.hpp"
#include "dominion/error.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>

using namespace dominion;

namespace {

Matrix m2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

// Largest eigenvalue of a symmetric 2x2 by the quadratic formula.
double max_eig2(const Matrix& s) {
  return 0.5 * (s(0, 0) + s(1, 1)) + std::hypot(0.5 * (s(0, 0) - s(1, 1)), s(0, 1));
}

const Matrix kPr = m2(-5.1987, 3.6260, 3.6260, 6.1987);

}  // namespace

TEST_CASE("example slow vertices: margins match the closed form") {
  const SymMatrix P(kPr);
  for (double v : {-5.0, 2.0}) {
    const Matrix A = m2(0, 1, v, -5);
    const Matrix S = kPr * A + A.transpose() * kPr + 4.0 * kPr + 0.01 * Matrix::Identity(2, 2);
    const double margin = nsd_margin(lmi_residual(P, A, 2.0, 0.01));
    CHECK(margin == doctest::Approx(max_eig2(S)).epsilon(1e-12));
    CHECK(margin <= 1e-9);
  }
  CHECK(nsd_margin(lmi_residual(P, m2(0, 1, -5, -5), 2.0, 0.01)) ==
        doctest::Approx(-1.424577674869046).epsilon(1e-11));
  CHECK(nsd_margin(lmi_residual(P, m2(0, 1, 2, -5), 2.0, 0.01)) ==
        doctest::Approx(-5.752859983388166).epsilon(1e-11));
  // Outside the hull the condition breaks.
  CHECK(nsd_margin(lmi_residual(P, m2(0, 1, 3, -5), 2.0, 0.01)) ==
        doctest::Approx(3.801757846494043).epsilon(1e-11));
}

TEST_CASE("example certificate is feasible with fast margin exactly zero") {
  const SPDominanceCertificate cert = nonlinear_spring_certificate();
  const MatrixPolytope slow({m2(0, 1, -5, -5), m2(0, 1, 2, -5)});
  const MatrixPolytope fast({Matrix::Constant(1, 1, -1.0)});
  const SPCertResult r = certify_sp(cert, slow, fast);
  CHECK(r.feasible());
  CHECK(r.slow.worst_vertex == 0);
  CHECK(r.slow.margins.size() == 2);
  CHECK(std::abs(r.fast.worst_margin) <= 1e-12);
  CHECK(cert.block_sigma() == doctest::Approx(0.005));
}

TEST_CASE("residual is affine in A and sigma") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const SymMatrix P(testutil::random_symmetric(rng, 3));
    const Matrix A1 = testutil::random_matrix(rng, 3, 3);
    const Matrix A2 = testutil::random_matrix(rng, 3, 3);
    const double t = 0.3;
    const Matrix mix = lmi_residual(P, t * A1 + (1 - t) * A2, 0.7, 0.2).matrix();
    const Matrix lin =
        t * lmi_residual(P, A1, 0.7, 0.2).matrix() + (1 - t) * lmi_residual(P, A2, 0.7, 0.2).matrix();
    CHECK((mix - lin).norm() <= 1e-12);
    // Raising sigma shifts every eigenvalue by the same amount.
    const double m0 = nsd_margin(lmi_residual(P, A1, 0.7, 0.2));
    const double m1 = nsd_margin(lmi_residual(P, A1, 0.7, 1.2));
    CHECK(m1 - m0 == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("sigma_r = 10 makes the example infeasible by exactly 9.99") {
  const SPDominanceCertificate base = nonlinear_spring_certificate();
  const SPDominanceCertificate big(base.P_r(), base.P_f(), 2.0, 0.5, 10.0, 1.0, 1);
  const MatrixPolytope slow({m2(0, 1, -5, -5), m2(0, 1, 2, -5)});
  const MatrixPolytope fast({Matrix::Constant(1, 1, -1.0)});
  const SPCertResult a = certify_sp(base, slow, fast);
  const SPCertResult b = certify_sp(big, slow, fast);
  CHECK_FALSE(b.feasible());
  CHECK(b.slow.worst_margin - a.slow.worst_margin == doctest::Approx(9.99).epsilon(1e-12));
}

TEST_CASE("certificate validation") {
  const SymMatrix P_r(kPr);
  const SymMatrix one = SymMatrix::identity(1);
  CHECK_NOTHROW(SPDominanceCertificate(P_r, one, 2, 0.5, 0.01, 1, 1));
  CHECK_THROWS_AS(SPDominanceCertificate(P_r, one, 2, 0.5, 0.01, 1, 0), Error);  // wrong p
  CHECK_THROWS_AS(SPDominanceCertificate(P_r, one, 2, 0.5, 0.0, 1, 1), Error);   // sigma <= 0
  CHECK_THROWS_AS(SPDominanceCertificate(P_r, one, -1, 0.5, 0.01, 1, 1), Error); // lambda < 0
  CHECK_THROWS_AS(SPDominanceCertificate(P_r, SymMatrix::diagonal({-1.0}), 2, 0.5, 0.01, 1, 1), Error);
  const SPDominanceCertificate c(P_r, one, 2, 0.5, 0.01, 1, 1);
  CHECK(inertia(c.full_cone_matrix()) == Inertia{1, 0, 2});
}

TEST_CASE("polytope validation and dimension checks") {
  CHECK_THROWS_AS(MatrixPolytope({}), Error);
  CHECK_THROWS_AS(MatrixPolytope({Matrix::Zero(2, 2), Matrix::Zero(3, 3)}), Error);
  CHECK_THROWS_AS(lmi_residual(SymMatrix(kPr), Matrix::Zero(3, 3), 1, 1), Error);
}

TEST_CASE("block conditions reduce to the base conditions when B = C = 0") {
  const SPDominanceCertificate cert = nonlinear_spring_certificate();
  const Matrix A = m2(0, 1, -5, -5);
  const Matrix B = Matrix::Zero(2, 1);
  const Matrix L = Matrix::Zero(1, 2);
  const Matrix D = Matrix::Constant(1, 1, -1.0);
  const SPCertResult r = block_conditions(cert, A, B, L, D, 0.01);
  // slow: same residual with sigma 0.005 instead of 0.01
  CHECK(r.slow.worst_margin ==
        doctest::Approx(nsd_margin(lmi_residual(cert.P_r(), A, 2.0, 0.005))).epsilon(1e-12));
  // fast: 2 (-1/0.01) + 2*2 + 0.005
  CHECK(r.fast.worst_margin == doctest::Approx(-200.0 + 4.0 + 0.005));
  CHECK_THROWS_AS(block_conditions(cert, A, B, L, D, 0.0), Error);
}

TEST_CASE("experimental 2x2 search finds a certificate for the example polytope") {
  const MatrixPolytope slow({m2(0, 1, -5, -5), m2(0, 1, 2, -5)});
  const CandidateSearchResult r = search_2x2_candidate(slow, 2.0, 0.01);
  CHECK(inertia(r.P) == Inertia{1, 0, 1});
  CHECK(r.result.feasible);
}
