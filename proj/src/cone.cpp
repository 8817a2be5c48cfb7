#include "dominion/cone.hpp"

#include "dominion/error.hpp"

namespace dominion {

std::string_view to_string(ConeLocation loc) {
  switch (loc) {
    case ConeLocation::Interior: return "interior";
    case ConeLocation::Boundary: return "boundary";
    case ConeLocation::Outside: return "outside";
  }
  return "unknown";
}

MatrixConeSpec make_cone(const SymMatrix& P) {
  const SymEigen eig = sym_eigen(P);
  const Inertia in = inertia(P, default_zero_tol(eig.values));
  if (in.zero > 0) {
    throw Error(ErrorCode::SingularP,
                "cone matrix has " + std::to_string(in.zero) + " zero eigenvalue(s); cone is degenerate");
  }
  // Eigenvalues are ascending, so the negative ones lead.
  Matrix neg = eig.vectors.leftCols(in.neg);
  return MatrixConeSpec(P, in.neg, std::move(neg));
}

double quad_form(const SymMatrix& P, const Vector& v) {
  if (v.size() != P.n()) {
    throw Error(ErrorCode::DimensionMismatch, "vector of size " + std::to_string(v.size()) +
                                                  " against matrix of size " + std::to_string(P.n()));
  }
  const Matrix& m = P.matrix();
  double q = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    for (Eigen::Index j = 0; j < v.size(); ++j) q += v[i] * m(i, j) * v[j];
  return q;
}

ConeLocation cone_locate(const MatrixConeSpec& cone, const Vector& v, double tol) {
  if (tol < 0.0) throw Error(ErrorCode::InvalidArgument, "cone tolerance must be nonnegative");
  const double q = quad_form(cone.P(), v);
  const double band = tol * v.squaredNorm();
  if (v.squaredNorm() == 0.0) return ConeLocation::Boundary;
  if (q < -band) return ConeLocation::Interior;
  if (q <= band) return ConeLocation::Boundary;
  return ConeLocation::Outside;
}

}  // namespace dominion
