#include "dominion/linalg.hpp"

#include "dominion/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dominion {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::SingularP: return "SingularP";
    case ErrorCode::SingularD: return "SingularD";
    case ErrorCode::SingularDz: return "SingularDz";
    case ErrorCode::NonpositiveEps: return "NonpositiveEps";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::InfeasibleAtFloor: return "InfeasibleAtFloor";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::EvalError: return "EvalError";
    case ErrorCode::NotScalarParameterized: return "NotScalarParameterized";
    case ErrorCode::NewtonFailure: return "NewtonFailure";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::SamplingExhausted: return "SamplingExhausted";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

SymMatrix::SymMatrix(const Matrix& m) {
  if (m.rows() != m.cols() || m.rows() < 1) {
    throw Error(ErrorCode::DimensionMismatch, "symmetric matrix must be square and nonempty");
  }
  const double norm = m.norm();
  asymmetry_ = norm > 0.0 ? (m - m.transpose()).norm() / norm : 0.0;
  m_ = 0.5 * (m + m.transpose());
}

SymMatrix SymMatrix::identity(Eigen::Index n) { return SymMatrix(Matrix::Identity(n, n)); }

SymMatrix SymMatrix::diagonal(const std::vector<double>& d) {
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(d.size()), static_cast<Eigen::Index>(d.size()));
  for (std::size_t i = 0; i < d.size(); ++i) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = d[i];
  return SymMatrix(m);
}

namespace {

double off_diagonal_norm(const Matrix& a) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

}  // namespace

SymEigen sym_eigen(const SymMatrix& s) {
  constexpr int kMaxSweeps = 100;
  constexpr double kRelTol = 1e-14;

  const Eigen::Index n = s.n();
  Matrix a = s.matrix();
  Matrix v = Matrix::Identity(n, n);
  const double scale = a.norm();

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    if (off_diagonal_norm(a) <= kRelTol * scale) break;
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        // Rotation angle zeroing a(p,q): t = sgn(theta) / (|theta| + sqrt(theta^2 + 1)).
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::hypot(theta, 1.0));
        const double c = 1.0 / std::hypot(t, 1.0);
        const double sn = t * c;

        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(k, q) = sn * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - sn * aqk;
          a(q, k) = sn * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - sn * vkq;
          v(k, q) = sn * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return a(i, i) < a(j, j); });

  SymEigen out{Vector(n), Matrix(n, n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values[k] = a(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(k)]);
    out.vectors.col(k) = v.col(order[static_cast<std::size_t>(k)]);
  }
  return out;
}

Vector sym_eigvals(const SymMatrix& s) { return sym_eigen(s).values; }

double default_zero_tol(const Vector& eigenvalues) {
  return 1e-9 * std::max(1.0, eigenvalues.cwiseAbs().maxCoeff());
}

Inertia inertia(const SymMatrix& s) {
  const Vector ev = sym_eigvals(s);
  return inertia(s, default_zero_tol(ev));
}

Inertia inertia(const SymMatrix& s, double zero_tol) {
  if (zero_tol < 0.0) throw Error(ErrorCode::InvalidArgument, "zero_tol must be nonnegative");
  Inertia in;
  for (double ev : sym_eigvals(s)) {
    if (ev < -zero_tol)
      ++in.neg;
    else if (ev > zero_tol)
      ++in.pos;
    else
      ++in.zero;
  }
  return in;
}

double nsd_margin(const SymMatrix& s) {
  const Vector ev = sym_eigvals(s);
  return ev[ev.size() - 1];
}

Matrix blkdiag(const Matrix& a, const Matrix& b) {
  Matrix m = Matrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  m.topLeftCorner(a.rows(), a.cols()) = a;
  m.bottomRightCorner(b.rows(), b.cols()) = b;
  return m;
}

double reciprocal_condition(const Matrix& m) {
  if (m.rows() != m.cols()) throw Error(ErrorCode::DimensionMismatch, "condition of non-square matrix");
  Eigen::FullPivLU<Matrix> lu(m);
  if (!lu.isInvertible()) return 0.0;
  const double norm = m.cwiseAbs().colwise().sum().maxCoeff();
  const double inv_norm = lu.inverse().cwiseAbs().colwise().sum().maxCoeff();
  if (norm == 0.0 || !std::isfinite(inv_norm)) return 0.0;
  return 1.0 / (norm * inv_norm);
}

}  // namespace dominion
