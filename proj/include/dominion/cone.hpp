#pragma once

#include "dominion/linalg.hpp"

#include <string_view>

namespace dominion {

/// Quadratic cone {v : v^T P v <= 0} with P nonsingular. rank_k is the number
/// of negative eigenvalues of P; rank_k == 0 (P positive definite) is admitted
/// and describes the degenerate cone {0}.
class MatrixConeSpec {
 public:
  const SymMatrix& P() const { return p_; }
  int rank_k() const { return rank_k_; }
  Eigen::Index n() const { return p_.n(); }

  /// Orthonormal basis of the span of P's negative eigenvectors (n x rank_k).
  const Matrix& negative_subspace() const { return negative_subspace_; }

 private:
  friend MatrixConeSpec make_cone(const SymMatrix& P);
  MatrixConeSpec(SymMatrix p, int rank_k, Matrix neg)
      : p_(std::move(p)), rank_k_(rank_k), negative_subspace_(std::move(neg)) {}

  SymMatrix p_;
  int rank_k_;
  Matrix negative_subspace_;
};

enum class ConeLocation { Interior, Boundary, Outside };

std::string_view to_string(ConeLocation loc);

/// Throws SingularP if P has an eigenvalue inside the default zero tolerance.
MatrixConeSpec make_cone(const SymMatrix& P);

double quad_form(const SymMatrix& P, const Vector& v);

inline constexpr double kDefaultConeTol = 1e-9;

/// Interior if v^T P v < -tol |v|^2, Boundary if |v^T P v| <= tol |v|^2,
/// Outside otherwise. The zero vector is Boundary.
ConeLocation cone_locate(const MatrixConeSpec& cone, const Vector& v, double tol = kDefaultConeTol);

}  // namespace dominion
