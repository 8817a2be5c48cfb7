#pragma once

#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dominion {

// Expression language for right-hand sides:
//
//   expr   := term (('+' | '-') term)*
//   term   := factor (('*' | '/') factor)*
//   factor := base ('^' integer)?
//   base   := number | ident | ident '(' expr ')' | '(' expr ')' | '-' base
//
// Functions: tanh, sin, cos, exp. Note that '-' binds tighter than '^', so
// "-x^2" is (-x)^2.

enum class ExprKind { Constant, Variable, Add, Sub, Mul, Div, Pow, Neg, Tanh, Sin, Cos, Exp };

class Expr {
 public:
  struct Node;

  Expr() = default;  // the constant 0

  ExprKind kind() const;
  double value() const;             // Constant
  const std::string& name() const;  // Variable
  int exponent() const;             // Pow
  Expr lhs() const;                 // binary ops, Pow base, unary argument
  Expr rhs() const;                 // binary ops

  bool is_constant(double v) const;

  friend Expr make_node(std::shared_ptr<const Node> node);

 private:
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

// Raw constructors (no simplification).
Expr constant(double v);
Expr variable(std::string name);
Expr binary(ExprKind op, Expr a, Expr b);
Expr unary(ExprKind op, Expr a);
Expr power(Expr base, int exponent);

// Simplifying constructors: constant folding plus 0/1 identities.
Expr s_add(Expr a, Expr b);
Expr s_sub(Expr a, Expr b);
Expr s_mul(Expr a, Expr b);
Expr s_div(Expr a, Expr b);
Expr s_pow(Expr a, int n);
Expr s_neg(Expr a);

Expr parse_expr(std::string_view text);

/// Infix form with minimal parentheses; parses back to an equivalent tree.
std::string to_string(const Expr& e);

Expr diff_expr(const Expr& e, std::string_view var);

std::set<std::string> variables(const Expr& e);

/// True when the expression contains no variables.
bool is_state_free(const Expr& e);

/// Replace the named variables by constants.
Expr substitute(const Expr& e, const std::map<std::string, double>& values);

/// Tree-walking evaluation; throws EvalError on division by zero or an
/// unbound variable.
double eval(const Expr& e, const std::map<std::string, double>& values);

/// Flat postfix program for repeated evaluation with a fixed variable order.
class CompiledExpr {
 public:
  CompiledExpr() = default;
  /// Throws EvalError if the expression uses a variable not in `order`.
  CompiledExpr(const Expr& e, const std::vector<std::string>& order);

  double operator()(std::span<const double> values) const;

 private:
  enum class Op : unsigned char { Const, Var, Add, Sub, Mul, Div, Pow, Neg, Tanh, Sin, Cos, Exp };
  struct Instr {
    Op op;
    int arg;       // variable index or exponent
    double value;  // constant
  };
  void emit(const Expr& e, const std::vector<std::string>& order, int depth);

  std::vector<Instr> code_;
  int max_depth_ = 0;
};

}  // namespace dominion
