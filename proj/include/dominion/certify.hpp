#pragma once

#include "dominion/linalg.hpp"

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

namespace dominion {

/// Slow/fast dominance certificate: P_r with inertia (p, 0, n_r - p), P_f
/// positive definite, rates lambda >= 0 and margins sigma > 0.
class SPDominanceCertificate {
 public:
  /// Throws InvalidArgument when any invariant fails.
  SPDominanceCertificate(SymMatrix P_r, SymMatrix P_f, double lambda_r, double lambda_f,
                         double sigma_r, double sigma_f, int p);

  const SymMatrix& P_r() const { return p_r_; }
  const SymMatrix& P_f() const { return p_f_; }
  double lambda_r() const { return lambda_r_; }
  double lambda_f() const { return lambda_f_; }
  double sigma_r() const { return sigma_r_; }
  double sigma_f() const { return sigma_f_; }
  int p() const { return p_; }
  Eigen::Index n_r() const { return p_r_.n(); }
  Eigen::Index n_f() const { return p_f_.n(); }

  /// Block diagonal cone matrix diag(P_r, P_f) for the full state.
  SymMatrix full_cone_matrix() const;

  /// Common margin (1/2) min(sigma_r, sigma_f) used by the block conditions.
  double block_sigma() const;

 private:
  SymMatrix p_r_;
  SymMatrix p_f_;
  double lambda_r_;
  double lambda_f_;
  double sigma_r_;
  double sigma_f_;
  int p_;
};

/// Vertex list of a matrix polytope. Vertices need not be symmetric.
class MatrixPolytope {
 public:
  explicit MatrixPolytope(std::vector<Matrix> vertices);

  const std::vector<Matrix>& vertices() const { return vertices_; }
  std::size_t size() const { return vertices_.size(); }
  Eigen::Index n() const { return vertices_.front().rows(); }
  const Matrix& operator[](std::size_t i) const { return vertices_[i]; }

 private:
  std::vector<Matrix> vertices_;
};

struct CertResult {
  bool feasible = false;
  double worst_margin = 0.0;
  std::size_t worst_vertex = 0;
  std::vector<double> margins;  // one per vertex
};

/// Margins within this distance above zero are reported as slack, not failure
/// of the check itself.
inline constexpr double kSlackReport = 1e-9;

/// P A + A^T P + 2 lambda P + sigma I. The dominance condition holds iff this
/// is negative semidefinite.
SymMatrix lmi_residual(const SymMatrix& P, const Matrix& A, double lambda, double sigma);

/// The residual is affine in A, so vertex feasibility certifies the hull.
CertResult certify_polytope(const SymMatrix& P, const MatrixPolytope& polytope, double lambda,
                            double sigma);

struct SPCertResult {
  CertResult slow;
  CertResult fast;
  bool feasible() const { return slow.feasible && fast.feasible; }
};

/// Reduced-model condition on `slow` (A_0 values) with (P_r, lambda_r, sigma_r)
/// and boundary-layer condition on `fast` (D values) with (P_f, lambda_f, sigma_f).
SPCertResult certify_sp(const SPDominanceCertificate& cert, const MatrixPolytope& slow,
                        const MatrixPolytope& fast);

/// Block conditions of the decoupled system at a given eps:
///   slow: P_r (A - B L) + (.)^T + 2 lambda_r P_r + sigma I
///   fast: P_f (D/eps + L B) + (.)^T + 2 lambda_r P_f + sigma I
/// with sigma = (1/2) min(sigma_r, sigma_f). When `coupling_bound` is set the
/// fast residual replaces L B by the worst case of any matrix with spectral
/// norm at most the bound.
SPCertResult block_conditions(const SPDominanceCertificate& cert, const Matrix& A, const Matrix& B,
                              const Matrix& L_eps, const Matrix& D, double eps,
                              std::optional<double> coupling_bound = std::nullopt);

/// Experimental: coarse grid search over 2x2 indefinite P = c R(theta)
/// diag(-a, 1/a) R(theta)^T for a matrix minimizing the worst polytope margin.
struct CandidateSearchResult {
  SymMatrix P;
  CertResult result;
};
CandidateSearchResult search_2x2_candidate(const MatrixPolytope& polytope, double lambda, double sigma,
                                           int grid = 48);

}  // namespace dominion
