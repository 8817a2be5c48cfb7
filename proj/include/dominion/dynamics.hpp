#pragma once

#include "dominion/certify.hpp"
#include "dominion/expr.hpp"
#include "dominion/linalg.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace dominion {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
  bool contains(double v) const { return v >= lo && v <= hi; }
};

/// Jacobian blocks A = df/dx, B = df/dz, C = dg/dx, D = dg/dz.
struct JacobianBlocks {
  Matrix A;
  Matrix B;
  Matrix C;
  Matrix D;
};

/// x' = f(x, z), eps z' = g(x, z) with f, g given as expressions over
/// x1..x{n_r}, z1..z{n_f}. Named parameters are folded in at construction.
class NonlinearSPSystem {
 public:
  NonlinearSPSystem(int n_r, int n_f, const std::vector<std::string>& f, const std::vector<std::string>& g,
                    double eps, std::vector<Interval> omega, const std::map<std::string, double>& parameters = {});
  NonlinearSPSystem(int n_r, int n_f, std::vector<Expr> f, std::vector<Expr> g, double eps,
                    std::vector<Interval> omega);

  int n_r() const { return n_r_; }
  int n_f() const { return n_f_; }
  int n() const { return n_r_ + n_f_; }
  double eps() const { return eps_; }
  const std::vector<Interval>& omega() const { return omega_; }
  const std::vector<std::string>& variable_names() const { return names_; }
  const std::vector<Expr>& f() const { return f_; }
  const std::vector<Expr>& g() const { return g_; }

  /// Symbolic Jacobian of the stacked map (f, g): rows f then g, columns x then z.
  const Expr& jacobian_expr(int row, int col) const { return jac_[static_cast<std::size_t>(row * n() + col)]; }

  /// Non-fatal findings at construction, e.g. f(0,0) != 0.
  const std::vector<std::string>& warnings() const { return warnings_; }

  NonlinearSPSystem with_eps(double eps) const;

  bool inside_omega(const Vector& state) const;

  /// (f(s), g(s)) without the 1/eps scaling.
  void eval_fg(const Vector& state, Vector& out) const;
  /// [[A, B], [C, D]] at the state, without the 1/eps scaling.
  Matrix eval_jacobian(const Vector& state) const;

 private:
  void init();

  int n_r_;
  int n_f_;
  double eps_;
  std::vector<Interval> omega_;
  std::vector<std::string> names_;
  std::vector<Expr> f_;
  std::vector<Expr> g_;
  std::vector<Expr> jac_;
  std::vector<CompiledExpr> fg_code_;
  std::vector<CompiledExpr> jac_code_;
  std::vector<std::string> warnings_;
};

/// x' = A x + B z, eps z' = C x + D z. A and D may carry extra vertices for
/// certification; simulation always uses the nominal A and D.
struct LinearSPSystem {
  Matrix A;
  Matrix B;
  Matrix C;
  Matrix D;
  double eps = 1.0;
  std::vector<Matrix> A_vertices;  // empty: {A}
  std::vector<Matrix> D_vertices;  // empty: {D}
  std::vector<Interval> omega;     // empty: [-1, 1] per state

  int n_r() const { return static_cast<int>(A.rows()); }
  int n_f() const { return static_cast<int>(D.rows()); }
  int n() const { return n_r() + n_f(); }

  /// Throws DimensionMismatch on inconsistent blocks.
  void validate() const;
  MatrixPolytope A_polytope() const;
  MatrixPolytope D_polytope() const;
  std::vector<Interval> state_box() const;
};

JacobianBlocks jacobians(const NonlinearSPSystem& sys, const Vector& state);

/// Selects one entry of a Jacobian block (0-based).
struct JacobianEntry {
  char block = 'A';
  int row = 0;
  int col = 0;
};

struct ScalarHull {
  MatrixPolytope a0;  // reduced-model matrices A0 = A - B D^-1 C at the bound vertices
  MatrixPolytope a;   // full A block at the bound vertices
  Matrix B;
  Matrix C;
  Matrix D;
  std::optional<JacobianEntry> entry;  // empty when every Jacobian entry is constant
  std::string entry_expr;
  double lo = 0.0;
  double hi = 0.0;
  bool sampled = false;  // bounds from grid sampling (heuristic, not proven)
};

/// Two-vertex hull when exactly one Jacobian entry (in block A) depends on the
/// state; single vertex when none does. `bounds` overrides grid sampling of
/// the entry over omega with `grid_n` points per variable it depends on.
ScalarHull scalar_hull(const NonlinearSPSystem& sys, std::optional<JacobianEntry> entry = std::nullopt,
                       std::optional<Interval> bounds = std::nullopt, int grid_n = 1000);

struct ManifoldPoint {
  Vector h;      // z on the slow manifold, g(x, h) = 0
  Matrix slope;  // dh/dx = -[dg/dz]^-1 dg/dx at (x, h)
  int iterations = 0;
};

/// Damped Newton for g(x, z) = 0 in z from `z_guess` (zero by default).
ManifoldPoint reduced_manifold_slope(const NonlinearSPSystem& sys, const Vector& x,
                                     std::optional<Vector> z_guess = std::nullopt);

struct JacobianBoundsReport {
  int samples = 0;
  double max_entry = 0.0;       // max |d(f,g)/d(x,z)| over the grid
  double max_derivative = 0.0;  // max |second partials| over the grid
  bool finite = true;
};

/// Grid check (grid_n points per axis over omega) that the Jacobians and their
/// derivatives stay bounded. A sample-based report, not a proof.
JacobianBoundsReport check_jacobian_bounds(const NonlinearSPSystem& sys, int grid_n = 9);

/// Evaluates one Jacobian entry expression on a grid; returns [min, max].
Interval sample_entry_range(const NonlinearSPSystem& sys, const Expr& entry, int grid_n);

/// The mechanical system with nonlinear spring v(x) = 7 tanh(x) - 5 x:
///   x1' = x2, x2' = v(x1) - 5 z, eps z' = x2 - z, on omega = [-3, 3]^3.
NonlinearSPSystem nonlinear_spring_system(double eps = 0.01);

/// Certificate for nonlinear_spring_system: P_r = [[-5.1987, 3.626], [3.626, 6.1987]],
/// P_f = 1, lambda_r = 2, lambda_f = 1/2, sigma_r = 0.01, sigma_f = 1, p = 1.
SPDominanceCertificate nonlinear_spring_certificate();

/// Jacobian bounds of the spring nonlinearity, v'(x) in [-5, 2].
inline constexpr Interval kSpringSlopeBounds{-5.0, 2.0};

std::vector<Vector> nonlinear_spring_initial_conditions();

}  // namespace dominion
