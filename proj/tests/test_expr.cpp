#include "dominion/error.hpp"
#include "dominion/expr.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace dominion;

namespace {

// Random expression tree over x1, x2 with bounded depth.
Expr random_expr(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 10);
  std::uniform_real_distribution<double> val(-3.0, 3.0);
  switch (pick(rng)) {
    case 0: return constant(std::round(val(rng) * 4.0) / 4.0);
    case 1: return variable(rng() % 2 ? "x1" : "x2");
    case 2: return binary(ExprKind::Add, random_expr(rng, depth - 1), random_expr(rng, depth - 1));
    case 3: return binary(ExprKind::Sub, random_expr(rng, depth - 1), random_expr(rng, depth - 1));
    case 4: return binary(ExprKind::Mul, random_expr(rng, depth - 1), random_expr(rng, depth - 1));
    case 5: return binary(ExprKind::Div, random_expr(rng, depth - 1), binary(ExprKind::Add, constant(4.0), unary(ExprKind::Sin, random_expr(rng, depth - 1))));
    case 6: return power(random_expr(rng, depth - 1), static_cast<int>(rng() % 4));
    case 7: return unary(ExprKind::Neg, random_expr(rng, depth - 1));
    case 8: return unary(ExprKind::Tanh, random_expr(rng, depth - 1));
    case 9: return unary(ExprKind::Cos, random_expr(rng, depth - 1));
    default: return unary(ExprKind::Exp, unary(ExprKind::Sin, random_expr(rng, depth - 1)));
  }
}

double at(const Expr& e, double x1, double x2) { return eval(e, {{"x1", x1}, {"x2", x2}}); }

}  // namespace

TEST_CASE("parse and print the example spring") {
  const Expr e = parse_expr("7*tanh(x1) - 5*x1 - 5*z1");
  CHECK(to_string(e) == "7*tanh(x1) - 5*x1 - 5*z1");
  CHECK(to_string(diff_expr(e, "x1")) == "7*(1 - tanh(x1)^2) - 5");
  CHECK(to_string(diff_expr(e, "z1")) == "-5");
  CHECK(to_string(diff_expr(e, "x2")) == "0");
  CHECK(variables(e) == std::set<std::string>{"x1", "z1"});
}

TEST_CASE("precedence and associativity") {
  CHECK(eval(parse_expr("1 - 2 - 3"), {}) == -4.0);
  CHECK(eval(parse_expr("8 / 4 / 2"), {}) == 1.0);
  CHECK(eval(parse_expr("2 + 3*4"), {}) == 14.0);
  CHECK(eval(parse_expr("-2^2"), {}) == 4.0);  // unary minus binds tighter
  CHECK(eval(parse_expr("2^-1"), {}) == 0.5);
  CHECK(eval(parse_expr("(1 + 2)^2"), {}) == 9.0);
  CHECK(eval(parse_expr("1.5e1"), {}) == 15.0);
  CHECK(to_string(parse_expr("a - (b - c)")) == "a - (b - c)");
  CHECK(to_string(parse_expr("(a - b) - c")) == "a - b - c");
  CHECK(to_string(parse_expr("a / (b * c)")) == "a/(b*c)");
}

TEST_CASE("printing round-trips on random trees") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    const Expr e = random_expr(rng, 4);
    const std::string s = to_string(e);
    const Expr back = parse_expr(s);
    CHECK(to_string(back) == s);
    for (int k = 0; k < 5; ++k) {
      const double a = u(rng), b = u(rng);
      const double v0 = at(e, a, b);
      const double v1 = at(back, a, b);
      CHECK(v1 == doctest::Approx(v0).epsilon(1e-12));
    }
  }
}

TEST_CASE("symbolic derivative against central differences") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int trial = 0; trial < 100; ++trial) {
    const Expr e = random_expr(rng, 3);
    const Expr d = diff_expr(e, "x1");
    const double a = u(rng), b = u(rng);
    const double h = 1e-5;
    const double fd = (at(e, a + h, b) - at(e, a - h, b)) / (2 * h);
    const double sym = at(d, a, b);
    CHECK(std::abs(sym - fd) <= 1e-5 * std::max(1.0, std::abs(fd)));
  }
}

TEST_CASE("compiled evaluation matches the tree walk") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const std::vector<std::string> order{"x1", "x2"};
  for (int trial = 0; trial < 100; ++trial) {
    const Expr e = random_expr(rng, 5);
    const CompiledExpr c(e, order);
    const double vals[2] = {u(rng), u(rng)};
    CHECK(c(vals) == doctest::Approx(at(e, vals[0], vals[1])).epsilon(1e-14));
  }
  CHECK_THROWS_AS(CompiledExpr(parse_expr("y + 1"), order), Error);
}

TEST_CASE("simplifying constructors") {
  const Expr x = variable("x");
  CHECK(to_string(s_add(x, constant(0))) == "x");
  CHECK(to_string(s_mul(constant(1), x)) == "x");
  CHECK(s_mul(constant(0), x).is_constant(0));
  CHECK(to_string(s_pow(x, 1)) == "x");
  CHECK(s_pow(x, 0).is_constant(1));
  CHECK(s_add(constant(2), constant(3)).is_constant(5));
  CHECK(to_string(s_neg(s_neg(x))) == "x");
  CHECK(s_div(constant(0), x).is_constant(0));
}

TEST_CASE("substitution and state-free detection") {
  const Expr e = parse_expr("k*x1 + c");
  const Expr s = substitute(e, {{"k", 2.0}, {"c", 1.0}});
  CHECK(variables(s) == std::set<std::string>{"x1"});
  CHECK(eval(s, {{"x1", 3.0}}) == 7.0);
  CHECK(is_state_free(parse_expr("2*sin(1)")));
  CHECK_FALSE(is_state_free(e));
}

TEST_CASE("parse errors carry a position and expected tokens") {
  auto position_of = [](const char* text) -> long {
    try {
      parse_expr(text);
    } catch (const ParseError& e) {
      CHECK_FALSE(e.expected().empty());
      return static_cast<long>(e.position());
    }
    return -1;
  };
  CHECK(position_of("1 +") == 3);
  CHECK(position_of("(x") == 2);
  CHECK(position_of("x $ y") == 2);
  CHECK(position_of("foo(x)") == 0);
  CHECK(position_of("x^1.5") >= 2);
  CHECK(position_of("") == 0);
}

TEST_CASE("evaluation errors") {
  CHECK_THROWS_AS(eval(parse_expr("1/x"), {{"x", 0.0}}), Error);
  CHECK_THROWS_AS(eval(parse_expr("y"), {}), Error);
}
