#include "dominion/decouple.hpp"

#include "dominion/error.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace dominion {

namespace {

void check_blocks(const Matrix& A, const Matrix& B, const Matrix& C, const Matrix& D) {
  const Eigen::Index nr = A.rows();
  const Eigen::Index nf = D.rows();
  if (A.cols() != nr || D.cols() != nf || B.rows() != nr || B.cols() != nf || C.rows() != nf ||
      C.cols() != nr) {
    throw Error(ErrorCode::DimensionMismatch,
                "blocks must be A: nr x nr, B: nr x nf, C: nf x nr, D: nf x nf");
  }
}

// Generic fixed-point loop shared by the L and H equations.
template <typename Step>
Matrix fixed_point(Matrix x, Step step, const ChangOptions& opt, const char* name, int& iterations) {
  double prev_update = std::numeric_limits<double>::infinity();
  int growth = 0;
  for (int k = 1; k <= opt.max_iter; ++k) {
    Matrix next = step(x);
    if (!next.allFinite() || next.cwiseAbs().maxCoeff() > 1e12) {
      throw Error(ErrorCode::NoConvergence, std::string(name) + " iterate blew up at iteration " +
                                                std::to_string(k));
    }
    const double update = (next - x).cwiseAbs().maxCoeff();
    x = std::move(next);
    iterations = k;
    if (update <= opt.tol * std::max(1.0, x.cwiseAbs().maxCoeff())) return x;
    growth = update > prev_update ? growth + 1 : 0;
    if (growth >= opt.divergence_window) {
      throw Error(ErrorCode::NoConvergence, std::string(name) + " update grew for " +
                                                std::to_string(opt.divergence_window) +
                                                " consecutive iterations");
    }
    prev_update = update;
  }
  throw Error(ErrorCode::NoConvergence,
              std::string(name) + " did not converge in " + std::to_string(opt.max_iter) + " iterations");
}

}  // namespace

ReducedModel reduced_model(const Matrix& A, const Matrix& B, const Matrix& C, const Matrix& D) {
  check_blocks(A, B, C, D);
  ReducedModel r;
  r.d_rcond = reciprocal_condition(D);
  if (r.d_rcond < kSingularDThreshold) {
    throw Error(ErrorCode::SingularD, "D is numerically singular (rcond " + std::to_string(r.d_rcond) + ")");
  }
  Eigen::PartialPivLU<Matrix> lu(D);
  r.L0 = lu.solve(C);
  r.H0 = Eigen::PartialPivLU<Matrix>(D.transpose()).solve(B.transpose()).transpose();
  r.A0 = A - B * r.L0;
  return r;
}

ChangSolution solve_chang_lti(const Matrix& A, const Matrix& B, const Matrix& C, const Matrix& D,
                              double eps, const ChangOptions& options) {
  if (!(eps > 0.0)) throw Error(ErrorCode::NonpositiveEps, "eps must be positive");
  const ReducedModel red = reduced_model(A, B, C, D);
  Eigen::PartialPivLU<Matrix> lu(D);
  Eigen::PartialPivLU<Matrix> lu_t(D.transpose());

  ChangSolution sol;
  sol.L = fixed_point(
      red.L0, [&](const Matrix& L) -> Matrix { return lu.solve(C + eps * L * (A - B * L)); }, options,
      "L", sol.iterations_L);

  const Matrix slow = A - B * sol.L;
  const Matrix LB = sol.L * B;
  // H D = B - eps H L B + eps (A - B L) H
  sol.H = fixed_point(
      red.H0,
      [&](const Matrix& H) -> Matrix {
        const Matrix rhs = B - eps * H * LB + eps * slow * H;
        return lu_t.solve(rhs.transpose()).transpose();
      },
      options, "H", sol.iterations_H);

  sol.residual_L = (D * sol.L - C - eps * sol.L * slow).norm();
  sol.residual_H = (sol.H * D - B + eps * sol.H * LB - eps * slow * sol.H).norm();
  const double tol_L = 1e-10 * std::max(1.0, C.norm());
  const double tol_H = 1e-10 * std::max(1.0, B.norm());
  if (sol.residual_L > tol_L || sol.residual_H > tol_H) {
    throw Error(ErrorCode::NoConvergence, "decoupling residuals too large (L: " +
                                              std::to_string(sol.residual_L) +
                                              ", H: " + std::to_string(sol.residual_H) + ")");
  }
  return sol;
}

Matrix full_system_matrix(const Matrix& A, const Matrix& B, const Matrix& C, const Matrix& D, double eps) {
  check_blocks(A, B, C, D);
  const Eigen::Index nr = A.rows();
  const Eigen::Index nf = D.rows();
  Matrix m(nr + nf, nr + nf);
  m << A, B, C / eps, D / eps;
  return m;
}

ChangDecoupling build_decoupling(const Matrix& A, const Matrix& B, const Matrix& C, const Matrix& D,
                                 double eps, const ChangOptions& options) {
  ChangSolution sol = solve_chang_lti(A, B, C, D, eps, options);
  const Eigen::Index nr = A.rows();
  const Eigen::Index nf = D.rows();
  const Matrix Ir = Matrix::Identity(nr, nr);
  const Matrix If = Matrix::Identity(nf, nf);

  ChangDecoupling dec;
  dec.eps = eps;
  dec.L = std::move(sol.L);
  dec.H = std::move(sol.H);
  dec.residual_L = sol.residual_L;
  dec.residual_H = sol.residual_H;

  dec.T.resize(nr + nf, nr + nf);
  dec.T << Ir, eps * dec.H, -dec.L, If - eps * dec.L * dec.H;
  dec.T_inv.resize(nr + nf, nr + nf);
  dec.T_inv << Ir - eps * dec.H * dec.L, -eps * dec.H, dec.L, If;

  dec.slow_block = A - B * dec.L;
  dec.fast_block = D / eps + dec.L * B;

  dec.det_T_inv = dec.T_inv.determinant();
  dec.inverse_residual = (dec.T * dec.T_inv - Matrix::Identity(nr + nf, nr + nf)).norm();
  const Matrix transformed = dec.T_inv * full_system_matrix(A, B, C, D, eps) * dec.T;
  dec.offdiag_residual = std::hypot(transformed.topRightCorner(nr, nf).norm(),
                                    transformed.bottomLeftCorner(nf, nr).norm());
  return dec;
}

EpsilonCheck check_block_conditions(const MatrixPolytope& A_polytope, const Matrix& B, const Matrix& C,
                                    const MatrixPolytope& D_polytope, const SPDominanceCertificate& cert,
                                    double eps, const EpsilonStarOptions& options) {
  EpsilonCheck check;
  check.eps = eps;
  check.slow_margin = -std::numeric_limits<double>::infinity();
  check.fast_margin = -std::numeric_limits<double>::infinity();
  check.feasible = true;
  for (const Matrix& A : A_polytope.vertices()) {
    for (const Matrix& D : D_polytope.vertices()) {
      Matrix L;
      try {
        L = solve_chang_lti(A, B, C, D, eps, options.chang).L;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NoConvergence) throw;
        check.feasible = false;
        check.slow_margin = std::numeric_limits<double>::infinity();
        check.fast_margin = std::numeric_limits<double>::infinity();
        return check;
      }
      const SPCertResult r = block_conditions(cert, A, B, L, D, eps, options.coupling_bound);
      check.slow_margin = std::max(check.slow_margin, r.slow.worst_margin);
      check.fast_margin = std::max(check.fast_margin, r.fast.worst_margin);
      check.feasible = check.feasible && r.feasible();
    }
  }
  return check;
}

EpsilonStarResult epsilon_star(const MatrixPolytope& A_polytope, const Matrix& B, const Matrix& C,
                               const MatrixPolytope& D_polytope, const SPDominanceCertificate& cert,
                               const EpsilonStarOptions& options) {
  if (!(options.eps_floor > 0.0) || !(options.eps_max > options.eps_floor))
    throw Error(ErrorCode::InvalidArgument, "need 0 < eps_floor < eps_max");

  auto check = [&](double eps) {
    return check_block_conditions(A_polytope, B, C, D_polytope, cert, eps, options);
  };

  EpsilonStarResult out;
  EpsilonCheck at_floor = check(options.eps_floor);
  if (!at_floor.feasible) {
    throw Error(ErrorCode::InfeasibleAtFloor,
                "block conditions fail at eps = " + std::to_string(options.eps_floor) +
                    " (slow margin " + std::to_string(at_floor.slow_margin) + ", fast margin " +
                    std::to_string(at_floor.fast_margin) + ")");
  }

  EpsilonCheck at_max = check(options.eps_max);
  if (at_max.feasible) {
    out.eps_hat = options.eps_max;
    out.hit_eps_max = true;
    out.at_eps_hat = at_max;
  } else {
    double lo = options.eps_floor;
    double hi = options.eps_max;
    EpsilonCheck best = at_floor;
    for (int k = 0; k < options.bisection_steps; ++k) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      EpsilonCheck c = check(mid);
      if (c.feasible) {
        lo = mid;
        best = c;
      } else {
        hi = mid;
      }
    }
    out.eps_hat = lo;
    out.at_eps_hat = best;
  }

  const int npts = options.verification_points;
  for (int k = 0; k < npts; ++k) {
    const double frac = npts > 1 ? static_cast<double>(k) / (npts - 1) : 0.0;
    const double eps = std::max(options.eps_floor,
                                out.eps_hat * std::pow(10.0, -options.verification_decades * frac));
    EpsilonCheck c = check(eps);
    if (!c.feasible) ++out.violations;
    out.verification.push_back(c);
  }
  return out;
}

}  // namespace dominion
