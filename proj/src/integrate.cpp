#include "dominion/integrate.hpp"

#include "dominion/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace dominion {

void VectorField::rhs(const Vector& s, Vector& out) const {
  fg(s, out);
  if (n_f > 0) out.tail(n_f) /= eps;
}

Matrix VectorField::rhs_jacobian(const Vector& s) const {
  if (!jacobian) throw Error(ErrorCode::InvalidArgument, "vector field has no Jacobian");
  Matrix J = jacobian(s);
  if (n_f > 0) J.bottomRows(n_f) /= eps;
  return J;
}

VectorField make_field(const NonlinearSPSystem& sys) {
  auto shared = std::make_shared<const NonlinearSPSystem>(sys);
  VectorField f;
  f.n_r = sys.n_r();
  f.n_f = sys.n_f();
  f.eps = sys.eps();
  f.fg = [shared](const Vector& s, Vector& out) { shared->eval_fg(s, out); };
  f.jacobian = [shared](const Vector& s) { return shared->eval_jacobian(s); };
  return f;
}

VectorField make_field(const LinearSPSystem& sys) {
  sys.validate();
  const int nr = sys.n_r();
  const int nf = sys.n_f();
  Matrix M(nr + nf, nr + nf);
  M << sys.A, sys.B, sys.C, sys.D;
  VectorField f;
  f.n_r = nr;
  f.n_f = nf;
  f.eps = sys.eps;
  f.fg = [M](const Vector& s, Vector& out) { out.noalias() = M * s; };
  f.jacobian = [M](const Vector&) { return M; };
  return f;
}

VectorField make_ode(int n, std::function<void(const Vector&, Vector&)> rhs,
                     std::function<Matrix(const Vector&)> jacobian) {
  VectorField f;
  f.n_r = n;
  f.n_f = 0;
  f.fg = std::move(rhs);
  f.jacobian = std::move(jacobian);
  return f;
}

double default_step(double eps) { return std::min(1e-3, eps / 20.0); }

namespace {

// One classical RK4 step for a generic right-hand side.
template <typename Rhs>
struct Rk4 {
  Rhs rhs;
  Vector k1, k2, k3, k4, tmp;

  explicit Rk4(Rhs r, Eigen::Index n) : rhs(std::move(r)), k1(n), k2(n), k3(n), k4(n), tmp(n) {}

  void step(Vector& s, double h) {
    rhs(s, k1);
    tmp = s + 0.5 * h * k1;
    rhs(tmp, k2);
    tmp = s + 0.5 * h * k2;
    rhs(tmp, k3);
    tmp = s + h * k3;
    rhs(tmp, k4);
    s += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
};

void check_finite(const Vector& s, double t) {
  if (!s.allFinite() || s.norm() > kBlowUpNorm) {
    throw Error(ErrorCode::NonFinite, "state norm exceeded 1e12 or became non-finite at t = " + std::to_string(t));
  }
}

void check_span(double t0, double t1, double h) {
  if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "step size must be positive");
  if (!(t1 >= t0)) throw Error(ErrorCode::InvalidArgument, "need t1 >= t0");
}

// Drives `stepper` over [t0, t1] calling `sample(t, s)` after each step.
template <typename Stepper, typename Sample>
void march(Stepper& stepper, Vector& s, double t0, double t1, double h, Sample sample) {
  const double span = t1 - t0;
  const auto full_steps = static_cast<long long>(std::floor(span / h * (1.0 + 1e-12)));
  for (long long k = 1; k <= full_steps; ++k) {
    stepper.step(s, h);
    const double t = t0 + static_cast<double>(k) * h;
    check_finite(s, t);
    sample(std::min(t, t1), s);
  }
  const double last = t0 + static_cast<double>(full_steps) * h;
  const double rest = t1 - last;
  if (rest > 1e-12 * std::max(1.0, std::abs(t1))) {
    stepper.step(s, rest);
    check_finite(s, t1);
    sample(t1, s);
  }
}

}  // namespace

Trajectory integrate(const VectorField& field, const Vector& s0, double t0, double t1, std::optional<double> h) {
  const double step = h.value_or(default_step(field.eps));
  check_span(t0, t1, step);
  if (s0.size() != field.n()) throw Error(ErrorCode::DimensionMismatch, "initial state size");

  Trajectory traj;
  traj.eps = field.eps;
  traj.step = step;
  traj.times.push_back(t0);
  traj.states.push_back(s0);

  auto rhs = [&field](const Vector& s, Vector& out) { field.rhs(s, out); };
  Rk4 stepper(rhs, s0.size());
  Vector s = s0;
  check_finite(s, t0);
  march(stepper, s, t0, t1, step, [&](double t, const Vector& state) {
    traj.times.push_back(t);
    traj.states.push_back(state);
  });
  return traj;
}

Vector advance(const VectorField& field, Vector s, double t0, double t1, double h) {
  check_span(t0, t1, h);
  auto rhs = [&field](const Vector& x, Vector& out) { field.rhs(x, out); };
  Rk4 stepper(rhs, s.size());
  march(stepper, s, t0, t1, h, [](double, const Vector&) {});
  return s;
}

VariationalTrajectory integrate_variational(const VectorField& field, const Vector& s0, const Vector& delta0,
                                            double t0, double t1, std::optional<double> h) {
  const double step = h.value_or(default_step(field.eps));
  check_span(t0, t1, step);
  const Eigen::Index n = field.n();
  if (s0.size() != n || delta0.size() != n) throw Error(ErrorCode::DimensionMismatch, "initial state size");

  auto rhs = [&field, n](const Vector& y, Vector& out) {
    const Vector s = y.head(n);
    Vector ds(n);
    field.rhs(s, ds);
    out.head(n) = ds;
    out.tail(n).noalias() = field.rhs_jacobian(s) * y.tail(n);
  };

  VariationalTrajectory out;
  out.base.eps = field.eps;
  out.base.step = step;
  out.base.method = "rk4-variational";
  out.base.times.push_back(t0);
  out.base.states.push_back(s0);
  out.delta_states.push_back(delta0);

  Vector y(2 * n);
  y << s0, delta0;
  Rk4 stepper(rhs, 2 * n);
  march(stepper, y, t0, t1, step, [&](double t, const Vector& state) {
    out.base.times.push_back(t);
    out.base.states.push_back(state.head(n));
    out.delta_states.push_back(state.tail(n));
  });
  return out;
}

std::vector<Vector> find_equilibria(const VectorField& field, const std::vector<Interval>& box, int grid_n,
                                    const EquilibriumSearch& opt) {
  if (grid_n < 2) throw Error(ErrorCode::InvalidArgument, "grid_n must be at least 2");
  const int n = field.n();
  if (static_cast<int>(box.size()) != n) throw Error(ErrorCode::DimensionMismatch, "search box size");
  if (!field.jacobian) throw Error(ErrorCode::InvalidArgument, "equilibrium search needs a Jacobian");

  Vector F(n);
  auto residual = [&](const Vector& s) {
    field.fg(s, F);
    return F.allFinite() ? F.norm() : std::numeric_limits<double>::infinity();
  };

  auto newton = [&](Vector s) -> std::optional<Vector> {
    double res = residual(s);
    for (int it = 0; it < opt.max_newton; ++it) {
      if (res <= 1e-14) break;
      const Matrix J = field.jacobian(s);
      Eigen::FullPivLU<Matrix> lu(J);
      if (!lu.isInvertible()) return std::nullopt;
      field.fg(s, F);
      const Vector step = lu.solve(F);
      double t = 1.0;
      bool improved = false;
      for (int k = 0; k <= opt.max_halvings; ++k, t *= 0.5) {
        Vector trial = s - t * step;
        const double r = residual(trial);
        if (r < res) {
          s = std::move(trial);
          res = r;
          improved = true;
          break;
        }
      }
      if (!improved) break;
    }
    if (res <= opt.residual_tol) return s;
    return std::nullopt;
  };

  std::vector<Vector> roots;
  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  Vector seed(n);
  for (;;) {
    for (int i = 0; i < n; ++i) {
      const Interval& iv = box[static_cast<std::size_t>(i)];
      seed[i] = iv.lo + iv.width() * idx[static_cast<std::size_t>(i)] / (grid_n - 1);
    }
    if (auto root = newton(seed)) {
      bool inside = true;
      for (int i = 0; i < n; ++i) {
        const Interval& iv = box[static_cast<std::size_t>(i)];
        const double slack = 1e-9 * std::max(1.0, iv.width());
        inside = inside && (*root)[i] >= iv.lo - slack && (*root)[i] <= iv.hi + slack;
      }
      const bool duplicate = std::any_of(roots.begin(), roots.end(), [&](const Vector& r) {
        return (r - *root).norm() <= opt.merge_radius;
      });
      if (inside && !duplicate) roots.push_back(*root);
    }
    int k = 0;
    while (k < n && ++idx[static_cast<std::size_t>(k)] == grid_n) idx[static_cast<std::size_t>(k++)] = 0;
    if (k == n) break;
  }
  for (Vector& r : roots)
    for (Eigen::Index i = 0; i < r.size(); ++i)
      if (r[i] == 0.0) r[i] = 0.0;  // drop negative zeros
  std::sort(roots.begin(), roots.end(), [](const Vector& a, const Vector& b) {
    return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
  });
  return roots;
}

double final_quarter_variation(const Trajectory& traj) {
  if (traj.size() == 0) return 0.0;
  const double t0 = traj.times.front();
  const double t1 = traj.times.back();
  const double start = t0 + 0.75 * (t1 - t0);
  const Vector& last = traj.final_state();
  double worst = 0.0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    if (traj.times[i] < start) continue;
    worst = std::max(worst, (traj.states[i] - last).norm());
  }
  return worst;
}

std::optional<std::size_t> detect_convergence(const Trajectory& traj, const std::vector<Vector>& equilibria,
                                              double tol) {
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "convergence tolerance must be positive");
  if (traj.size() == 0 || equilibria.empty()) return std::nullopt;
  if (final_quarter_variation(traj) >= tol) return std::nullopt;
  const Vector& last = traj.final_state();
  std::optional<std::size_t> best;
  double best_dist = tol;
  for (std::size_t i = 0; i < equilibria.size(); ++i) {
    const double d = (equilibria[i] - last).norm();
    if (d < best_dist) {
      best = i;
      best_dist = d;
    }
  }
  return best;
}

void write_csv(std::ostream& out, const Trajectory& traj, int n_r, int n_f, std::size_t max_rows) {
  out << 't';
  for (int i = 1; i <= n_r; ++i) out << ",x" << i;
  for (int i = 1; i <= n_f; ++i) out << ",z" << i;
  out << '\n';
  const std::size_t n = traj.size();
  // The final sample is forced in, so leave room for it.
  const std::size_t budget = max_rows > 1 ? max_rows - 1 : 1;
  const std::size_t stride = max_rows == 0 ? 1 : std::max<std::size_t>(1, (n + budget - 1) / budget);
  char buf[32];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf;
  };
  for (std::size_t i = 0; i < n; ++i) {
    if (i % stride != 0 && i + 1 != n) continue;
    put(traj.times[i]);
    for (Eigen::Index k = 0; k < traj.states[i].size(); ++k) {
      out << ',';
      put(traj.states[i][k]);
    }
    out << '\n';
  }
}

}  // namespace dominion
