#include "dominion/dynamics.hpp"

#include "dominion/decouple.hpp"
#include "dominion/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace dominion {

namespace {

std::vector<std::string> state_names(int n_r, int n_f) {
  std::vector<std::string> names;
  for (int i = 1; i <= n_r; ++i) names.push_back("x" + std::to_string(i));
  for (int i = 1; i <= n_f; ++i) names.push_back("z" + std::to_string(i));
  return names;
}

std::vector<Expr> parse_all(const std::vector<std::string>& texts, const std::map<std::string, double>& params) {
  std::vector<Expr> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(substitute(parse_expr(t), params));
  return out;
}

// Calls `visit` on every point of a tensor grid with `grid_n` points per
// axis. Degenerate intervals contribute a single point.
template <typename Visit>
void for_each_grid_point(const std::vector<Interval>& box, int grid_n, Visit visit) {
  const std::size_t d = box.size();
  std::vector<int> idx(d, 0);
  std::vector<int> count(d);
  for (std::size_t i = 0; i < d; ++i) count[i] = box[i].width() > 0.0 ? grid_n : 1;
  Vector point(static_cast<Eigen::Index>(d));
  for (;;) {
    for (std::size_t i = 0; i < d; ++i) {
      point[static_cast<Eigen::Index>(i)] =
          count[i] == 1 ? box[i].lo : box[i].lo + box[i].width() * idx[i] / (count[i] - 1);
    }
    visit(point);
    std::size_t k = 0;
    while (k < d && ++idx[k] == count[k]) idx[k++] = 0;
    if (k == d) return;
  }
}

}  // namespace

NonlinearSPSystem::NonlinearSPSystem(int n_r, int n_f, const std::vector<std::string>& f,
                                     const std::vector<std::string>& g, double eps, std::vector<Interval> omega,
                                     const std::map<std::string, double>& parameters)
    : NonlinearSPSystem(n_r, n_f, parse_all(f, parameters), parse_all(g, parameters), eps, std::move(omega)) {}

NonlinearSPSystem::NonlinearSPSystem(int n_r, int n_f, std::vector<Expr> f, std::vector<Expr> g, double eps,
                                     std::vector<Interval> omega)
    : n_r_(n_r), n_f_(n_f), eps_(eps), omega_(std::move(omega)), f_(std::move(f)), g_(std::move(g)) {
  init();
}

void NonlinearSPSystem::init() {
  if (n_r_ < 1 || n_f_ < 1) throw Error(ErrorCode::InvalidArgument, "need n_r >= 1 and n_f >= 1");
  if (!(eps_ > 0.0)) throw Error(ErrorCode::NonpositiveEps, "eps must be positive");
  if (static_cast<int>(f_.size()) != n_r_ || static_cast<int>(g_.size()) != n_f_) {
    throw Error(ErrorCode::DimensionMismatch, "expected " + std::to_string(n_r_) + " f and " +
                                                  std::to_string(n_f_) + " g expressions");
  }
  if (static_cast<int>(omega_.size()) != n()) {
    throw Error(ErrorCode::DimensionMismatch, "omega needs one interval per state variable");
  }
  for (const Interval& iv : omega_) {
    if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi) || iv.lo > iv.hi)
      throw Error(ErrorCode::InvalidArgument, "omega intervals must be finite and nonempty");
  }
  names_ = state_names(n_r_, n_f_);
  const std::set<std::string> declared(names_.begin(), names_.end());

  std::vector<Expr> fg = f_;
  fg.insert(fg.end(), g_.begin(), g_.end());
  for (const Expr& e : fg) {
    for (const auto& v : variables(e)) {
      if (!declared.count(v)) throw Error(ErrorCode::InvalidArgument, "undeclared variable '" + v + "'");
    }
  }

  fg_code_.clear();
  jac_.clear();
  jac_code_.clear();
  for (const Expr& e : fg) {
    fg_code_.emplace_back(e, names_);
    for (const auto& v : names_) {
      jac_.push_back(diff_expr(e, v));
      jac_code_.emplace_back(jac_.back(), names_);
    }
  }

  warnings_.clear();
  Vector origin = Vector::Zero(n());
  Vector val(n());
  try {
    eval_fg(origin, val);
    if (val.cwiseAbs().maxCoeff() > 1e-12)
      warnings_.push_back("f(0,0) or g(0,0) is nonzero; the origin is not an equilibrium");
  } catch (const Error& e) {
    warnings_.push_back(std::string("could not evaluate at the origin: ") + e.what());
  }
}

NonlinearSPSystem NonlinearSPSystem::with_eps(double eps) const {
  return NonlinearSPSystem(n_r_, n_f_, f_, g_, eps, omega_);
}

bool NonlinearSPSystem::inside_omega(const Vector& state) const {
  for (int i = 0; i < n(); ++i)
    if (!omega_[static_cast<std::size_t>(i)].contains(state[i])) return false;
  return true;
}

void NonlinearSPSystem::eval_fg(const Vector& state, Vector& out) const {
  const std::span<const double> s(state.data(), static_cast<std::size_t>(state.size()));
  for (std::size_t i = 0; i < fg_code_.size(); ++i) out[static_cast<Eigen::Index>(i)] = fg_code_[i](s);
}

Matrix NonlinearSPSystem::eval_jacobian(const Vector& state) const {
  const std::span<const double> s(state.data(), static_cast<std::size_t>(state.size()));
  const int m = n();
  Matrix J(m, m);
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < m; ++c) J(r, c) = jac_code_[static_cast<std::size_t>(r * m + c)](s);
  return J;
}

void LinearSPSystem::validate() const {
  const Eigen::Index nr = A.rows();
  const Eigen::Index nf = D.rows();
  if (nr < 1 || nf < 1 || A.cols() != nr || D.cols() != nf || B.rows() != nr || B.cols() != nf ||
      C.rows() != nf || C.cols() != nr) {
    throw Error(ErrorCode::DimensionMismatch, "linear system blocks have inconsistent sizes");
  }
  if (!(eps > 0.0)) throw Error(ErrorCode::NonpositiveEps, "eps must be positive");
  for (const Matrix& v : A_vertices)
    if (v.rows() != nr || v.cols() != nr) throw Error(ErrorCode::DimensionMismatch, "A vertex size");
  for (const Matrix& v : D_vertices)
    if (v.rows() != nf || v.cols() != nf) throw Error(ErrorCode::DimensionMismatch, "D vertex size");
  if (!omega.empty() && static_cast<int>(omega.size()) != n())
    throw Error(ErrorCode::DimensionMismatch, "omega needs one interval per state variable");
}

MatrixPolytope LinearSPSystem::A_polytope() const {
  return MatrixPolytope(A_vertices.empty() ? std::vector<Matrix>{A} : A_vertices);
}

MatrixPolytope LinearSPSystem::D_polytope() const {
  return MatrixPolytope(D_vertices.empty() ? std::vector<Matrix>{D} : D_vertices);
}

std::vector<Interval> LinearSPSystem::state_box() const {
  return omega.empty() ? std::vector<Interval>(static_cast<std::size_t>(n()), Interval{-1.0, 1.0}) : omega;
}

JacobianBlocks jacobians(const NonlinearSPSystem& sys, const Vector& state) {
  if (state.size() != sys.n()) throw Error(ErrorCode::DimensionMismatch, "state size");
  const Matrix J = sys.eval_jacobian(state);
  const int nr = sys.n_r();
  const int nf = sys.n_f();
  return {J.topLeftCorner(nr, nr), J.topRightCorner(nr, nf), J.bottomLeftCorner(nf, nr),
          J.bottomRightCorner(nf, nf)};
}

Interval sample_entry_range(const NonlinearSPSystem& sys, const Expr& entry, int grid_n) {
  if (grid_n < 2) throw Error(ErrorCode::InvalidArgument, "grid_n must be at least 2");
  const auto vars = variables(entry);
  std::vector<std::string> order(vars.begin(), vars.end());
  std::vector<Interval> box;
  for (const auto& v : order) {
    const auto& names = sys.variable_names();
    const auto it = std::find(names.begin(), names.end(), v);
    box.push_back(sys.omega()[static_cast<std::size_t>(it - names.begin())]);
  }
  const CompiledExpr code(entry, order);
  Interval range{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for_each_grid_point(box, grid_n, [&](const Vector& p) {
    const double v = code(std::span<const double>(p.data(), static_cast<std::size_t>(p.size())));
    range.lo = std::min(range.lo, v);
    range.hi = std::max(range.hi, v);
  });
  return range;
}

ScalarHull scalar_hull(const NonlinearSPSystem& sys, std::optional<JacobianEntry> entry,
                       std::optional<Interval> bounds, int grid_n) {
  const int nr = sys.n_r();
  const int n = sys.n();

  std::vector<JacobianEntry> varying;
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      if (is_state_free(sys.jacobian_expr(r, c))) continue;
      const char block = r < nr ? (c < nr ? 'A' : 'B') : (c < nr ? 'C' : 'D');
      varying.push_back({block, r < nr ? r : r - nr, c < nr ? c : c - nr});
    }
  }
  if (varying.size() > 1) {
    throw Error(ErrorCode::NotScalarParameterized,
                std::to_string(varying.size()) + " Jacobian entries depend on the state");
  }
  if (varying.size() == 1) {
    const JacobianEntry& v = varying.front();
    if (v.block != 'A') {
      throw Error(ErrorCode::NotScalarParameterized,
                  std::string("the state-dependent entry is in block ") + v.block + ", expected A");
    }
    if (entry && (entry->block != v.block || entry->row != v.row || entry->col != v.col)) {
      throw Error(ErrorCode::NotScalarParameterized,
                  "selected entry is constant; the state-dependent entry is A(" + std::to_string(v.row + 1) +
                      "," + std::to_string(v.col + 1) + ")");
    }
  }

  // Every other entry is state free; evaluate the blocks at the origin.
  const JacobianBlocks J = jacobians(sys, Vector::Zero(n));
  const ReducedModel red = reduced_model(J.A, J.B, J.C, J.D);

  ScalarHull hull{MatrixPolytope({red.A0}), MatrixPolytope({J.A}), J.B, J.C, J.D, std::nullopt, "", 0.0, 0.0,
                  false};
  if (varying.empty()) return hull;

  const JacobianEntry v = varying.front();
  const Expr& e = sys.jacobian_expr(v.row, v.col);
  hull.entry = v;
  hull.entry_expr = to_string(e);
  Interval range;
  if (bounds) {
    if (!(bounds->lo <= bounds->hi)) throw Error(ErrorCode::InvalidArgument, "hull bounds need lo <= hi");
    range = *bounds;
  } else {
    range = sample_entry_range(sys, e, grid_n);
    hull.sampled = true;
  }
  hull.lo = range.lo;
  hull.hi = range.hi;

  std::vector<Matrix> a_vertices;
  std::vector<Matrix> a0_vertices;
  for (double value : {range.lo, range.hi}) {
    Matrix A = J.A;
    A(v.row, v.col) = value;
    a0_vertices.push_back(A - J.B * red.L0);
    a_vertices.push_back(std::move(A));
  }
  hull.a0 = MatrixPolytope(std::move(a0_vertices));
  hull.a = MatrixPolytope(std::move(a_vertices));
  return hull;
}

ManifoldPoint reduced_manifold_slope(const NonlinearSPSystem& sys, const Vector& x, std::optional<Vector> z_guess) {
  constexpr double kTol = 1e-12;
  constexpr int kMaxIter = 100;
  constexpr int kMaxHalvings = 30;

  const int nr = sys.n_r();
  const int nf = sys.n_f();
  if (x.size() != nr) throw Error(ErrorCode::DimensionMismatch, "x has the wrong size");
  Vector state(sys.n());
  state.head(nr) = x;
  state.tail(nf) = z_guess ? *z_guess : Vector::Zero(nf);
  if (state.tail(nf).size() != nf) throw Error(ErrorCode::DimensionMismatch, "z guess has the wrong size");

  Vector fg(sys.n());
  auto g_norm = [&](const Vector& s) {
    sys.eval_fg(s, fg);
    return fg.tail(nf).norm();
  };

  ManifoldPoint out;
  double res = g_norm(state);
  for (int it = 0; it < kMaxIter && res > kTol; ++it) {
    sys.eval_fg(state, fg);
    const Vector g = fg.tail(nf);
    const Matrix Dz = sys.eval_jacobian(state).bottomRightCorner(nf, nf);
    if (reciprocal_condition(Dz) < kSingularDThreshold)
      throw Error(ErrorCode::SingularDz, "dg/dz singular during manifold solve");
    const Vector step = Dz.partialPivLu().solve(g);
    double t = 1.0;
    bool improved = false;
    for (int k = 0; k <= kMaxHalvings; ++k, t *= 0.5) {
      Vector trial = state;
      trial.tail(nf) -= t * step;
      const double r = g_norm(trial);
      if (std::isfinite(r) && r < res) {
        state = std::move(trial);
        res = r;
        improved = true;
        break;
      }
    }
    out.iterations = it + 1;
    if (!improved) break;
  }
  if (!(res <= kTol)) {
    throw Error(ErrorCode::NewtonFailure, "no root of g(x, .) = 0 found (residual " + std::to_string(res) + ")");
  }
  const Matrix J = sys.eval_jacobian(state);
  const Matrix Dz = J.bottomRightCorner(nf, nf);
  if (reciprocal_condition(Dz) < kSingularDThreshold)
    throw Error(ErrorCode::SingularDz, "dg/dz singular on the slow manifold");
  out.h = state.tail(nf);
  out.slope = -Dz.partialPivLu().solve(J.bottomLeftCorner(nf, nr));
  return out;
}

JacobianBoundsReport check_jacobian_bounds(const NonlinearSPSystem& sys, int grid_n) {
  if (grid_n < 2) throw Error(ErrorCode::InvalidArgument, "grid_n must be at least 2");
  const int n = sys.n();
  const auto& names = sys.variable_names();
  std::vector<CompiledExpr> second;
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c)
      for (const auto& v : names) second.emplace_back(diff_expr(sys.jacobian_expr(r, c), v), names);

  JacobianBoundsReport rep;
  for_each_grid_point(sys.omega(), grid_n, [&](const Vector& p) {
    ++rep.samples;
    const Matrix J = sys.eval_jacobian(p);
    rep.finite = rep.finite && J.allFinite();
    rep.max_entry = std::max(rep.max_entry, J.cwiseAbs().maxCoeff());
    const std::span<const double> s(p.data(), static_cast<std::size_t>(p.size()));
    for (const auto& code : second) {
      const double d = code(s);
      rep.finite = rep.finite && std::isfinite(d);
      rep.max_derivative = std::max(rep.max_derivative, std::abs(d));
    }
  });
  return rep;
}

NonlinearSPSystem nonlinear_spring_system(double eps) {
  return NonlinearSPSystem(2, 1, {"x2", "7*tanh(x1) - 5*x1 - 5*z1"}, {"x2 - z1"}, eps,
                           {{-3.0, 3.0}, {-3.0, 3.0}, {-3.0, 3.0}});
}

SPDominanceCertificate nonlinear_spring_certificate() {
  Matrix pr(2, 2);
  pr << -5.1987, 3.6260, 3.6260, 6.1987;
  return SPDominanceCertificate(SymMatrix(pr), SymMatrix::identity(1), 2.0, 0.5, 0.01, 1.0, 1);
}

std::vector<Vector> nonlinear_spring_initial_conditions() {
  auto v = [](double a, double b, double c) {
    Vector s(3);
    s << a, b, c;
    return s;
  };
  return {v(1.0, 1.0, 1.0), v(-1.0, 2.0, 1.0), v(-0.5, -2.0, 1.0), v(-2.0, -0.5, 1.0), v(0.25, 0.5, -1.0)};
}

}  // namespace dominion
