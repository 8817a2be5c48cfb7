#pragma once

#include <Eigen/Dense>

#include <vector>

namespace dominion {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Dense real symmetric matrix. The input is symmetrized as (M + M^T)/2 on
/// construction; the relative asymmetry of the input is kept for reporting.
class SymMatrix {
 public:
  static constexpr double kAsymmetryWarning = 1e-8;

  explicit SymMatrix(const Matrix& m);

  static SymMatrix identity(Eigen::Index n);
  static SymMatrix diagonal(const std::vector<double>& d);

  Eigen::Index n() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

  /// ||M - M^T||_F / ||M||_F of the matrix this was built from.
  double input_asymmetry() const { return asymmetry_; }
  bool asymmetry_warning() const { return asymmetry_ > kAsymmetryWarning; }

 private:
  Matrix m_;
  double asymmetry_ = 0.0;
};

struct Inertia {
  int neg = 0;
  int zero = 0;
  int pos = 0;

  int n() const { return neg + zero + pos; }
  friend bool operator==(const Inertia&, const Inertia&) = default;
};

struct SymEigen {
  Vector values;   // ascending
  Matrix vectors;  // column j pairs with values[j]
};

/// Cyclic Jacobi eigen-decomposition; eigenvalues ascending.
SymEigen sym_eigen(const SymMatrix& s);

Vector sym_eigvals(const SymMatrix& s);

/// Default zero tolerance used by inertia(): 1e-9 * max(1, spectral radius).
double default_zero_tol(const Vector& eigenvalues);

Inertia inertia(const SymMatrix& s);
Inertia inertia(const SymMatrix& s, double zero_tol);

/// Largest eigenvalue. S is negative semidefinite iff the result is <= 0.
double nsd_margin(const SymMatrix& s);

Matrix blkdiag(const Matrix& a, const Matrix& b);

/// 1 / (||M||_1 ||M^-1||_1) via a full-pivot LU; 0 for singular input.
double reciprocal_condition(const Matrix& m);

}  // namespace dominion
