#pragma once

#include "dominion/certify.hpp"
#include "dominion/linalg.hpp"

#include <optional>
#include <vector>

namespace dominion {

/// eps -> 0 limit of the slow/fast split: L0 = D^-1 C, H0 = B D^-1, A0 = A - B L0.
struct ReducedModel {
  Matrix L0;
  Matrix H0;
  Matrix A0;
  double d_rcond = 0.0;  // reciprocal condition number of D
};

inline constexpr double kSingularDThreshold = 1e-12;

/// Throws SingularD when rcond(D) < 1e-12.
ReducedModel reduced_model(const Matrix& A, const Matrix& B, const Matrix& C, const Matrix& D);

struct ChangOptions {
  double tol = 1e-12;  // update size, relative to max(1, max |entry|)
  int max_iter = 200;
  int divergence_window = 5;
};

struct ChangSolution {
  Matrix L;
  Matrix H;
  int iterations_L = 0;
  int iterations_H = 0;
  double residual_L = 0.0;  // ||D L - C - eps L (A - B L)||_F
  double residual_H = 0.0;  // ||H D - B + eps H L B - eps (A - B L) H||_F
};

/// Fixed-point solution of the time-invariant decoupling equations
///   D L - C - eps L (A - B L) = 0
///   H D - B + eps H L B - eps (A - B L) H = 0
/// started from (L0, H0). Throws NoConvergence when the iteration stalls or
/// diverges, which signals that eps is too large.
ChangSolution solve_chang_lti(const Matrix& A, const Matrix& B, const Matrix& C, const Matrix& D,
                              double eps, const ChangOptions& options = {});

struct ChangDecoupling {
  double eps = 0.0;
  Matrix L;
  Matrix H;
  Matrix T;
  Matrix T_inv;
  Matrix slow_block;  // A - B L
  Matrix fast_block;  // D / eps + L B
  double residual_L = 0.0;
  double residual_H = 0.0;
  double det_T_inv = 0.0;
  double inverse_residual = 0.0;    // ||T T_inv - I||_F
  double offdiag_residual = 0.0;    // off-diagonal blocks of T_inv M T, Frobenius
};

/// Full system matrix [[A, B], [C/eps, D/eps]] in (x, z) coordinates.
Matrix full_system_matrix(const Matrix& A, const Matrix& B, const Matrix& C, const Matrix& D, double eps);

ChangDecoupling build_decoupling(const Matrix& A, const Matrix& B, const Matrix& C, const Matrix& D,
                                 double eps, const ChangOptions& options = {});

struct EpsilonStarOptions {
  double eps_max = 1.0;
  double eps_floor = 1e-12;
  int bisection_steps = 60;
  int verification_points = 16;
  double verification_decades = 6.0;
  /// Bound on ||L_eps B|| for systems whose coupling varies in time; when set,
  /// the fast block uses the bound instead of the computed L_eps B.
  std::optional<double> coupling_bound;
  ChangOptions chang;
};

struct EpsilonCheck {
  double eps = 0.0;
  bool feasible = false;
  double slow_margin = 0.0;  // worst over vertex pairs; +inf when the Chang solve failed
  double fast_margin = 0.0;
};

struct EpsilonStarResult {
  double eps_hat = 0.0;
  bool hit_eps_max = false;
  EpsilonCheck at_eps_hat;
  std::vector<EpsilonCheck> verification;  // log-spaced points at and below eps_hat
  int violations = 0;                      // verification points that were infeasible
};

/// Block conditions at every (A vertex, D vertex) pair for one eps.
EpsilonCheck check_block_conditions(const MatrixPolytope& A_polytope, const Matrix& B, const Matrix& C,
                                    const MatrixPolytope& D_polytope, const SPDominanceCertificate& cert,
                                    double eps, const EpsilonStarOptions& options = {});

/// Bisection over (0, eps_max] for the largest eps at which the block
/// conditions hold at every vertex pair. Throws InfeasibleAtFloor when they
/// fail even at eps_floor.
EpsilonStarResult epsilon_star(const MatrixPolytope& A_polytope, const Matrix& B, const Matrix& C,
                               const MatrixPolytope& D_polytope, const SPDominanceCertificate& cert,
                               const EpsilonStarOptions& options = {});

}  // namespace dominion
