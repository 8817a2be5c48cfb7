#include "dominion/dynamics.hpp"
#include "dominion/error.hpp"
#include "dominion/integrate.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace dominion;

namespace {

VectorField exponential(double rate) {
  return make_ode(
      1, [rate](const Vector& s, Vector& out) { out = rate * s; },
      [rate](const Vector&) { return Matrix::Constant(1, 1, rate); });
}

VectorField harmonic() {
  Matrix M(2, 2);
  M << 0, 1, -1, 0;
  return make_ode(
      2, [M](const Vector& s, Vector& out) { out = M * s; }, [M](const Vector&) { return M; });
}

// Root of 7 tanh(x) = 5 x on (0.5, 3) by bisection.
double spring_root() {
  double lo = 0.5, hi = 3.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (7 * std::tanh(mid) - 5 * mid > 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("RK4 is fourth order on the scalar exponential") {
  const VectorField f = exponential(-1.0);
  const Vector s0 = Vector::Ones(1);
  auto err = [&](double h) { return std::abs(integrate(f, s0, 0.0, 1.0, h).final_state()[0] - std::exp(-1.0)); };
  const double ratio = err(0.1) / err(0.05);
  CHECK(ratio >= 14.0);
  CHECK(ratio <= 18.0);
}

TEST_CASE("harmonic oscillator conserves energy") {
  Vector s0(2);
  s0 << 1.0, 0.0;
  const Trajectory t = integrate(harmonic(), s0, 0.0, 10.0, 1e-3);
  for (std::size_t i = 0; i < t.size(); i += 500) CHECK(std::abs(t.states[i].squaredNorm() - 1.0) <= 1e-10);
  CHECK(std::abs(t.final_state()[0] - std::cos(10.0)) <= 1e-10);
  CHECK(std::abs(t.final_state()[1] + std::sin(10.0)) <= 1e-10);
}

TEST_CASE("sampling grid and final partial step") {
  const Trajectory t = integrate(exponential(-1.0), Vector::Ones(1), 0.0, 0.0105, 1e-3);
  CHECK(t.times.front() == 0.0);
  CHECK(t.times.back() == 0.0105);
  CHECK(t.size() == 12);  // t0, 10 full steps, one partial
  CHECK(std::abs(t.final_state()[0] - std::exp(-0.0105)) <= 1e-14);
  const Vector a = advance(exponential(-1.0), Vector::Ones(1), 0.0, 0.0105, 1e-3);
  CHECK(a[0] == t.final_state()[0]);
  CHECK_THROWS_AS(integrate(exponential(-1.0), Vector::Ones(1), 0.0, 1.0, 0.0), Error);
  CHECK_THROWS_AS(integrate(exponential(-1.0), Vector::Ones(2), 0.0, 1.0, 0.1), Error);
}

TEST_CASE("blow-up is reported") {
  const VectorField f = make_ode(1, [](const Vector& s, Vector& out) { out = s.cwiseProduct(s); });
  try {
    integrate(f, Vector::Ones(1), 0.0, 2.0, 1e-3);
    FAIL("expected NonFinite");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonFinite);
  }
}

TEST_CASE("default step") {
  CHECK(default_step(0.01) == doctest::Approx(5e-4));
  CHECK(default_step(1.0) == 1e-3);
}

TEST_CASE("fast rows are scaled by 1/eps") {
  const NonlinearSPSystem sys = nonlinear_spring_system(0.01);
  const VectorField f = make_field(sys);
  Vector s(3), out(3);
  s << 0.0, 1.0, 0.0;
  f.rhs(s, out);
  CHECK(out[2] == doctest::Approx(100.0));
  CHECK(f.rhs_jacobian(s)(2, 2) == doctest::Approx(-100.0));
}

TEST_CASE("linear variational equation is the difference of two trajectories") {
  LinearSPSystem sys;
  sys.A.resize(2, 2);
  sys.A << -1, 2, -0.5, -0.3;
  sys.B.resize(2, 1);
  sys.B << 0.5, 1;
  sys.C.resize(1, 2);
  sys.C << 1, -1;
  sys.D = Matrix::Constant(1, 1, -2.0);
  sys.eps = 0.1;
  const VectorField f = make_field(sys);
  Vector s0(3), d0(3);
  s0 << 1, -1, 0.5;
  d0 << 0.2, 0.1, -0.3;
  const VariationalTrajectory v = integrate_variational(f, s0, d0, 0.0, 3.0, 1e-3);
  const Trajectory a = integrate(f, s0 + d0, 0.0, 3.0, 1e-3);
  const Trajectory b = integrate(f, s0, 0.0, 3.0, 1e-3);
  REQUIRE(v.delta_states.size() == a.size());
  for (std::size_t i = 0; i < a.size(); i += 100) {
    CHECK((v.delta_states[i] - (a.states[i] - b.states[i])).norm() <= 1e-12);
    CHECK((v.base.states[i] - b.states[i]).norm() <= 1e-12);
  }
}

TEST_CASE("nonlinear variational equation against finite differences") {
  const VectorField f = make_field(nonlinear_spring_system(0.01));
  Vector s0(3), d0(3);
  s0 << 1, 1, 1;
  d0 << 1, -0.5, 0.3;
  const double tau = 1e-6;
  const double h = default_step(0.01);
  const VariationalTrajectory v = integrate_variational(f, s0, d0, 0.0, 5.0, h);
  const Trajectory a = integrate(f, s0 + tau * d0, 0.0, 5.0, h);
  const Trajectory b = integrate(f, s0, 0.0, 5.0, h);
  double worst = 0.0;
  for (std::size_t i = 1; i < a.size(); ++i) {
    const Vector fd = (a.states[i] - b.states[i]) / tau;
    worst = std::max(worst, (fd - v.delta_states[i]).norm() / std::max(1e-12, v.delta_states[i].norm()));
  }
  CHECK(worst <= 1e-3);
}

TEST_CASE("equilibria of the spring example") {
  const NonlinearSPSystem sys = nonlinear_spring_system(0.01);
  const std::vector<Vector> eq = find_equilibria(make_field(sys), sys.omega(), 5);
  REQUIRE(eq.size() == 3);
  const double x_star = spring_root();
  CHECK(std::abs(x_star - 1.1403399436975007) <= 1e-12);
  CHECK(std::abs(eq[0][0] + x_star) <= 1e-8);
  CHECK(eq[1].norm() == 0.0);
  CHECK(std::abs(eq[2][0] - x_star) <= 1e-8);
  for (const Vector& e : eq) {
    CHECK(std::abs(e[1]) <= 1e-12);
    CHECK(std::abs(e[2]) <= 1e-12);
  }
  CHECK_THROWS_AS(find_equilibria(make_field(sys), sys.omega(), 1), Error);
}

TEST_CASE("convergence detection") {
  const VectorField f = exponential(-2.0);
  const std::vector<Vector> origin{Vector::Zero(1)};
  CHECK(detect_convergence(integrate(f, Vector::Ones(1), 0.0, 10.0, 1e-3), origin) == std::optional<std::size_t>(0));
  // Still moving at t = 1.
  CHECK_FALSE(detect_convergence(integrate(f, Vector::Ones(1), 0.0, 1.0, 1e-3), origin).has_value());
  Vector s0(2);
  s0 << 1.0, 0.0;
  const Trajectory osc = integrate(harmonic(), s0, 0.0, 20.0, 1e-3);
  CHECK(final_quarter_variation(osc) == doctest::Approx(2.0).epsilon(1e-3));
  CHECK_FALSE(detect_convergence(osc, {Vector::Zero(2)}).has_value());
  CHECK_THROWS_AS(detect_convergence(osc, {Vector::Zero(2)}, 0.0), Error);
}

TEST_CASE("CSV output") {
  const Trajectory t = integrate(make_field(nonlinear_spring_system(0.01)), Vector::Ones(3), 0.0, 1.0, 1e-3);
  std::ostringstream full;
  write_csv(full, t, 2, 1);
  std::istringstream in(full.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,x1,x2,z1");
  std::size_t rows = 0;
  std::string last;
  while (std::getline(in, line)) {
    ++rows;
    last = line;
  }
  CHECK(rows == t.size());
  CHECK(last.rfind("1,", 0) == 0);

  std::ostringstream small;
  write_csv(small, t, 2, 1, 100);
  std::istringstream in2(small.str());
  std::getline(in2, line);
  rows = 0;
  while (std::getline(in2, line)) {
    ++rows;
    last = line;
  }
  CHECK(rows <= 100);
  CHECK(rows >= 90);
  CHECK(last.rfind("1,", 0) == 0);
  // Round trip of the printed value.
  CHECK(std::stod(last.substr(last.rfind(',') + 1)) == t.final_state()[2]);
}
