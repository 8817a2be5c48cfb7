#include "dominion/decouple.hpp"
#include "dominion/dynamics.hpp"
#include "dominion/error.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>

using namespace dominion;

namespace {

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix k(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) k.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return k;
}

Matrix unvec(const Vector& v, Eigen::Index r, Eigen::Index c) { return Eigen::Map<const Matrix>(v.data(), r, c); }

// H solves the linear equation H (D + eps L B) - eps (A - B L) H = B once L is
// known; vec(X Y) identities turn it into one dense solve.
Matrix h_oracle(const Matrix& A, const Matrix& B, const Matrix& L, const Matrix& D, double eps) {
  const Eigen::Index nr = A.rows();
  const Eigen::Index nf = D.rows();
  const Matrix K = kron((D + eps * L * B).transpose(), Matrix::Identity(nr, nr)) -
                   eps * kron(Matrix::Identity(nf, nf), A - B * L);
  const Vector b = Eigen::Map<const Vector>(B.data(), B.size());
  return unvec(K.fullPivLu().solve(b), nr, nf);
}

std::vector<std::complex<double>> sorted_eigs(const Matrix& m) {
  Eigen::VectorXcd ev = Eigen::EigenSolver<Matrix>(m, false).eigenvalues();
  std::vector<std::complex<double>> v(ev.data(), ev.data() + ev.size());
  std::sort(v.begin(), v.end(), [](auto a, auto b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  return v;
}

}  // namespace

TEST_CASE("scalar system matches the quadratic root") {
  const ChangSolution s = solve_chang_lti(scalar(0), scalar(1), scalar(1), scalar(-1), 0.1);
  const double L = (1.0 - std::sqrt(1.4)) / 0.2;
  CHECK(std::abs(s.L(0, 0) - L) <= 1e-10);
  CHECK(std::abs(s.L(0, 0) + 0.916079783099616) <= 1e-10);
  // -H - 1 + 0.2 L H = 0
  CHECK(std::abs(s.H(0, 0) - 1.0 / (0.2 * L - 1.0)) <= 1e-10);
}

TEST_CASE("reduced model") {
  Matrix A(2, 2), B(2, 1), C(1, 2);
  A << 0, 1, -5, 0;
  B << 0, -5;
  C << 0, 1;
  const ReducedModel r = reduced_model(A, B, C, scalar(-1));
  Matrix A0(2, 2);
  A0 << 0, 1, -5, -5;
  CHECK((r.A0 - A0).norm() <= 1e-15);
  CHECK((r.L0 - Matrix(C * -1.0)).norm() <= 1e-15);
  CHECK_THROWS_AS(reduced_model(A, B, C, scalar(0.0)), Error);
  CHECK_THROWS_AS(reduced_model(A, B, C, Matrix::Zero(2, 2)), Error);
}

TEST_CASE("B = 0: L solves a linear Sylvester equation; H vanishes") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::Index nr = 1 + trial % 3;
    const Eigen::Index nf = 1 + (trial / 3) % 3;
    const Matrix A = testutil::random_matrix(rng, nr, nr);
    const Matrix B = Matrix::Zero(nr, nf);
    const Matrix C = testutil::random_matrix(rng, nf, nr);
    const Matrix D = testutil::random_stable(rng, nf);
    const double eps = 0.05;
    // D L - eps L A = C  <=>  (I kron D - eps A^T kron I) vec L = vec C
    const Matrix K = kron(Matrix::Identity(nr, nr), D) - eps * kron(A.transpose(), Matrix::Identity(nf, nf));
    const Vector c = Eigen::Map<const Vector>(C.data(), C.size());
    const Matrix L_ref = unvec(K.fullPivLu().solve(c), nf, nr);
    const ChangSolution s = solve_chang_lti(A, B, C, D, eps);
    CHECK((s.L - L_ref).norm() <= 1e-10 * std::max(1.0, L_ref.norm()));
    CHECK(s.H.norm() <= 1e-14);
  }
}

TEST_CASE("random systems: exact decoupling at eps = 0.01") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index nr = 1 + trial % 4;
    const Eigen::Index nf = 1 + (trial / 4) % 3;
    const Matrix A = testutil::random_matrix(rng, nr, nr);
    const Matrix B = testutil::random_matrix(rng, nr, nf);
    const Matrix C = testutil::random_matrix(rng, nf, nr);
    const Matrix D = testutil::random_stable(rng, nf);
    const double eps = 0.01;
    const ChangDecoupling dec = build_decoupling(A, B, C, D, eps);
    CHECK(std::abs(dec.det_T_inv - 1.0) <= 1e-9);
    CHECK(std::abs(dec.T_inv.determinant() - 1.0) <= 1e-9);
    CHECK(dec.offdiag_residual <= 1e-8);
    CHECK(dec.inverse_residual <= 1e-9);
    CHECK((dec.T * dec.T_inv - Matrix::Identity(nr + nf, nr + nf)).norm() <= 1e-9);
    // H against the linear-equation oracle given L.
    CHECK((dec.H - h_oracle(A, B, dec.L, D, eps)).norm() <= 1e-9 * std::max(1.0, dec.H.norm()));
    // Similarity: spectrum of the full matrix is the union of the two blocks.
    const Matrix M = full_system_matrix(A, B, C, D, eps);
    auto full = sorted_eigs(M);
    const Matrix blocks = blkdiag(dec.slow_block, dec.fast_block);
    auto split = sorted_eigs(blocks);
    REQUIRE(full.size() == split.size());
    for (std::size_t k = 0; k < full.size(); ++k)
      CHECK(std::abs(full[k] - split[k]) <= 1e-8 * std::max(1.0, std::abs(full[k])));
    // Explicit transformed matrix is block diagonal.
    const Matrix Tm = dec.T_inv * M * dec.T;
    CHECK(Tm.topRightCorner(nr, nf).norm() <= 1e-8);
    CHECK(Tm.bottomLeftCorner(nf, nr).norm() <= 1e-8);
  }
}

TEST_CASE("L_eps - L_0 is O(eps)") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix A = testutil::random_matrix(rng, 2, 2);
    const Matrix B = testutil::random_matrix(rng, 2, 2);
    const Matrix C = testutil::random_matrix(rng, 2, 2);
    const Matrix D = testutil::random_stable(rng, 2);
    const ReducedModel red = reduced_model(A, B, C, D);
    // First-order term: L = L0 + eps D^-1 L0 A0 + O(eps^2).
    const double first_order = (D.inverse() * red.L0 * red.A0).norm();
    std::vector<double> ratios;
    for (double eps : {1e-2, 1e-3, 1e-4}) {
      const ChangSolution s = solve_chang_lti(A, B, C, D, eps);
      ratios.push_back((s.L - red.L0).norm() / eps);
    }
    const double hi = *std::max_element(ratios.begin(), ratios.end());
    CHECK(hi <= 2.0 * first_order + 1e-6);
    CHECK(ratios[2] == doctest::Approx(first_order).epsilon(1e-2));
  }
}

TEST_CASE("fixed point failure is reported") {
  // Large eps makes the iteration diverge.
  CHECK_THROWS_AS(solve_chang_lti(scalar(0), scalar(1), scalar(1), scalar(-1), 10.0), Error);
  try {
    solve_chang_lti(scalar(0), scalar(1), scalar(1), scalar(-1), 10.0);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoConvergence);
  }
  CHECK_THROWS_AS(solve_chang_lti(scalar(0), scalar(1), scalar(1), scalar(-1), 0.0), Error);
}

TEST_CASE("B = C = 0 gives identity T") {
  Matrix A(2, 2);
  A << -1, 0.5, 0, -2;
  const ChangDecoupling dec = build_decoupling(A, Matrix::Zero(2, 1), Matrix::Zero(1, 2), scalar(-1), 0.1);
  CHECK((dec.T - Matrix::Identity(3, 3)).norm() == 0.0);
  CHECK((dec.T_inv - Matrix::Identity(3, 3)).norm() == 0.0);
}

TEST_CASE("epsilon search") {
  const SPDominanceCertificate cert = nonlinear_spring_certificate();
  Matrix Alo(2, 2), Ahi(2, 2), B(2, 1), C(1, 2);
  Alo << 0, 1, -5, 0;
  Ahi << 0, 1, 2, 0;
  B << 0, -5;
  C << 0, 1;
  const MatrixPolytope Ap({Alo, Ahi});
  const MatrixPolytope Dp({scalar(-1)});

  SUBCASE("example certifies eps >= 0.01") {
    const EpsilonStarResult r = epsilon_star(Ap, B, C, Dp, cert);
    CHECK(r.eps_hat >= 0.01);
    CHECK_FALSE(r.hit_eps_max);
    CHECK(r.violations == 0);
    CHECK(r.verification.size() == 16);
    CHECK(r.at_eps_hat.feasible);
    // Bisection oracle: just above eps_hat the check fails.
    CHECK_FALSE(check_block_conditions(Ap, B, C, Dp, cert, r.eps_hat * 1.01).feasible);
    CHECK(check_block_conditions(Ap, B, C, Dp, cert, 0.01).feasible);
  }
  SUBCASE("decoupled system reaches eps_max") {
    // With B = C = 0 the slow block is A itself, so use the reduced-model vertices.
    Matrix A0lo = Alo, A0hi = Ahi;
    A0lo(1, 1) = A0hi(1, 1) = -5.0;
    // The fast block is held to rate lambda_r = 2, so D = -1 would only pass
    // up to eps = 1/2.0025; D = -5 passes at eps_max = 1.
    const EpsilonStarResult r = epsilon_star(MatrixPolytope({A0lo, A0hi}), Matrix::Zero(2, 1),
                                             Matrix::Zero(1, 2), MatrixPolytope({scalar(-5)}), cert);
    CHECK(r.hit_eps_max);
    CHECK(r.eps_hat == 1.0);
    const EpsilonStarResult slow_fast = epsilon_star(MatrixPolytope({A0lo, A0hi}), Matrix::Zero(2, 1),
                                                     Matrix::Zero(1, 2), Dp, cert);
    CHECK(slow_fast.eps_hat == doctest::Approx(1.0 / 2.0025).epsilon(1e-9));
  }
  SUBCASE("unstable fast block fails at the floor") {
    try {
      epsilon_star(Ap, B, C, MatrixPolytope({scalar(1.0)}), cert);
      FAIL("expected InfeasibleAtFloor");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InfeasibleAtFloor);
    }
  }
  SUBCASE("coupling bound makes the fast check more conservative") {
    EpsilonStarOptions opt;
    opt.coupling_bound = 50.0;
    const EpsilonStarResult plain = epsilon_star(Ap, B, C, Dp, cert);
    const EpsilonStarResult bounded = epsilon_star(Ap, B, C, Dp, cert, opt);
    CHECK(bounded.eps_hat <= plain.eps_hat);
  }
}
