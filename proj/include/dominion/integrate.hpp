#pragma once

#include "dominion/dynamics.hpp"
#include "dominion/linalg.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace dominion {

/// Right-hand side of x' = f, eps z' = g in stacked state s = (x, z).
/// `fg` and `jacobian` are unscaled; rhs() applies the 1/eps on the fast rows.
struct VectorField {
  int n_r = 0;
  int n_f = 0;
  double eps = 1.0;
  std::function<void(const Vector&, Vector&)> fg;
  std::function<Matrix(const Vector&)> jacobian;

  int n() const { return n_r + n_f; }
  void rhs(const Vector& s, Vector& out) const;
  Matrix rhs_jacobian(const Vector& s) const;
};

VectorField make_field(const NonlinearSPSystem& sys);
VectorField make_field(const LinearSPSystem& sys);
/// Plain ODE s' = F(s) (no fast part).
VectorField make_ode(int n, std::function<void(const Vector&, Vector&)> rhs,
                     std::function<Matrix(const Vector&)> jacobian = {});

struct Trajectory {
  std::vector<double> times;
  std::vector<Vector> states;
  double eps = 0.0;
  double step = 0.0;
  std::string method = "rk4";

  std::size_t size() const { return times.size(); }
  const Vector& final_state() const { return states.back(); }
};

struct VariationalTrajectory {
  Trajectory base;
  std::vector<Vector> delta_states;
};

inline constexpr double kBlowUpNorm = 1e12;

/// min(1e-3, eps/20).
double default_step(double eps);

/// Fixed-step classical RK4 over [t0, t1]; samples at t0 + k h plus t1.
/// Throws NonFinite when the state norm exceeds 1e12 or turns non-finite.
Trajectory integrate(const VectorField& field, const Vector& s0, double t0, double t1,
                     std::optional<double> h = std::nullopt);

/// Advances s from t0 to t1 with the same stepper without storing samples.
Vector advance(const VectorField& field, Vector s, double t0, double t1, double h);

/// Integrates the state together with the variation delta' = J(s) delta,
/// J the Jacobian of the (scaled) right-hand side along the state.
VariationalTrajectory integrate_variational(const VectorField& field, const Vector& s0, const Vector& delta0,
                                            double t0, double t1, std::optional<double> h = std::nullopt);

struct EquilibriumSearch {
  double merge_radius = 1e-6;
  double residual_tol = 1e-10;
  int max_newton = 100;
  int max_halvings = 30;
};

/// Damped Newton on (f, g) = 0 from every node of a grid_n^n seed grid over
/// the box; returns deduplicated roots inside the box, sorted lexicographically.
std::vector<Vector> find_equilibria(const VectorField& field, const std::vector<Interval>& box, int grid_n,
                                    const EquilibriumSearch& options = {});

inline constexpr double kDefaultConvergenceTol = 1e-3;

/// Index of the equilibrium within tol of the final state, provided the state
/// also moved less than tol over the final quarter of the time span.
std::optional<std::size_t> detect_convergence(const Trajectory& traj, const std::vector<Vector>& equilibria,
                                              double tol = kDefaultConvergenceTol);

/// Largest distance of any final-quarter sample from the final state.
double final_quarter_variation(const Trajectory& traj);

/// CSV with header t,x1..,z1.., 17 significant digits, decimated to at most
/// `max_rows` data rows (the final sample is always kept).
void write_csv(std::ostream& out, const Trajectory& traj, int n_r, int n_f, std::size_t max_rows = 100000);

}  // namespace dominion
