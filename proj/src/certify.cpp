#include "dominion/certify.hpp"

#include "dominion/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace dominion {

SPDominanceCertificate::SPDominanceCertificate(SymMatrix P_r, SymMatrix P_f, double lambda_r,
                                               double lambda_f, double sigma_r, double sigma_f, int p)
    : p_r_(std::move(P_r)),
      p_f_(std::move(P_f)),
      lambda_r_(lambda_r),
      lambda_f_(lambda_f),
      sigma_r_(sigma_r),
      sigma_f_(sigma_f),
      p_(p) {
  if (!(lambda_r_ >= 0.0) || !(lambda_f_ >= 0.0))
    throw Error(ErrorCode::InvalidArgument, "rates lambda_r, lambda_f must be nonnegative");
  if (!(sigma_r_ > 0.0) || !(sigma_f_ > 0.0))
    throw Error(ErrorCode::InvalidArgument, "margins sigma_r, sigma_f must be positive");
  const Inertia in_r = inertia(p_r_);
  const Inertia want_r{p_, 0, static_cast<int>(p_r_.n()) - p_};
  if (in_r != want_r) {
    throw Error(ErrorCode::InvalidArgument,
                "P_r has inertia (" + std::to_string(in_r.neg) + "," + std::to_string(in_r.zero) + "," +
                    std::to_string(in_r.pos) + "), expected (" + std::to_string(want_r.neg) + ",0," +
                    std::to_string(want_r.pos) + ")");
  }
  const Inertia in_f = inertia(p_f_);
  if (in_f.neg != 0 || in_f.zero != 0)
    throw Error(ErrorCode::InvalidArgument, "P_f must be positive definite");
}

SymMatrix SPDominanceCertificate::full_cone_matrix() const {
  return SymMatrix(blkdiag(p_r_.matrix(), p_f_.matrix()));
}

double SPDominanceCertificate::block_sigma() const { return 0.5 * std::min(sigma_r_, sigma_f_); }

MatrixPolytope::MatrixPolytope(std::vector<Matrix> vertices) : vertices_(std::move(vertices)) {
  if (vertices_.empty()) throw Error(ErrorCode::InvalidArgument, "polytope needs at least one vertex");
  const Eigen::Index n = vertices_.front().rows();
  for (const Matrix& v : vertices_) {
    if (v.rows() != n || v.cols() != n)
      throw Error(ErrorCode::DimensionMismatch, "polytope vertices must all be " + std::to_string(n) +
                                                    "x" + std::to_string(n));
  }
}

SymMatrix lmi_residual(const SymMatrix& P, const Matrix& A, double lambda, double sigma) {
  if (A.rows() != P.n() || A.cols() != P.n()) {
    throw Error(ErrorCode::DimensionMismatch, "residual: P is " + std::to_string(P.n()) + "x" +
                                                  std::to_string(P.n()) + ", A is " +
                                                  std::to_string(A.rows()) + "x" + std::to_string(A.cols()));
  }
  const Matrix& p = P.matrix();
  const Eigen::Index n = P.n();
  return SymMatrix(p * A + A.transpose() * p + 2.0 * lambda * p + sigma * Matrix::Identity(n, n));
}

CertResult certify_polytope(const SymMatrix& P, const MatrixPolytope& polytope, double lambda,
                            double sigma) {
  CertResult r;
  r.margins.reserve(polytope.size());
  for (std::size_t i = 0; i < polytope.size(); ++i) {
    const double m = nsd_margin(lmi_residual(P, polytope[i], lambda, sigma));
    r.margins.push_back(m);
    if (i == 0 || m > r.worst_margin) {
      r.worst_margin = m;
      r.worst_vertex = i;
    }
  }
  r.feasible = r.worst_margin <= 0.0;
  return r;
}

SPCertResult certify_sp(const SPDominanceCertificate& cert, const MatrixPolytope& slow,
                        const MatrixPolytope& fast) {
  return {certify_polytope(cert.P_r(), slow, cert.lambda_r(), cert.sigma_r()),
          certify_polytope(cert.P_f(), fast, cert.lambda_f(), cert.sigma_f())};
}

SPCertResult block_conditions(const SPDominanceCertificate& cert, const Matrix& A, const Matrix& B,
                              const Matrix& L_eps, const Matrix& D, double eps,
                              std::optional<double> coupling_bound) {
  if (!(eps > 0.0)) throw Error(ErrorCode::NonpositiveEps, "eps must be positive");
  const Eigen::Index nr = cert.n_r();
  const Eigen::Index nf = cert.n_f();
  if (A.rows() != nr || A.cols() != nr || B.rows() != nr || B.cols() != nf || L_eps.rows() != nf ||
      L_eps.cols() != nr || D.rows() != nf || D.cols() != nf) {
    throw Error(ErrorCode::DimensionMismatch, "block conditions: inconsistent block sizes");
  }
  const double sigma = cert.block_sigma();
  const double lambda = cert.lambda_r();

  const Matrix slow_block = A - B * L_eps;
  SPCertResult out;
  out.slow = certify_polytope(cert.P_r(), MatrixPolytope({slow_block}), lambda, sigma);

  if (coupling_bound) {
    if (*coupling_bound < 0.0) throw Error(ErrorCode::InvalidArgument, "coupling bound must be nonnegative");
    const double pf_norm = sym_eigvals(cert.P_f()).cwiseAbs().maxCoeff();
    const double extra = 2.0 * pf_norm * *coupling_bound;
    const Matrix fast_block = D / eps;
    out.fast = certify_polytope(cert.P_f(), MatrixPolytope({fast_block}), lambda, sigma + extra);
  } else {
    const Matrix fast_block = D / eps + L_eps * B;
    out.fast = certify_polytope(cert.P_f(), MatrixPolytope({fast_block}), lambda, sigma);
  }
  return out;
}

CandidateSearchResult search_2x2_candidate(const MatrixPolytope& polytope, double lambda, double sigma,
                                           int grid) {
  if (polytope.n() != 2) throw Error(ErrorCode::DimensionMismatch, "candidate search is 2x2 only");
  if (grid < 2) throw Error(ErrorCode::InvalidArgument, "grid must be at least 2");

  std::optional<CandidateSearchResult> best;
  for (int it = 0; it < grid; ++it) {
    const double theta = std::numbers::pi * it / grid;
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    Matrix rot(2, 2);
    rot << c, -s, s, c;
    for (int ia = 0; ia < grid; ++ia) {
      const double a = std::pow(10.0, -2.0 + 4.0 * ia / (grid - 1));
      Matrix d = Matrix::Zero(2, 2);
      d(0, 0) = -a;
      d(1, 1) = 1.0 / a;
      const Matrix shape = rot * d * rot.transpose();
      for (int ic = 0; ic < grid; ++ic) {
        const double scale = std::pow(10.0, -2.0 + 4.0 * ic / (grid - 1));
        SymMatrix P(scale * shape);
        CertResult r = certify_polytope(P, polytope, lambda, sigma);
        if (!best || r.worst_margin < best->result.worst_margin) best = CandidateSearchResult{P, std::move(r)};
      }
    }
  }
  return *best;
}

}  // namespace dominion
