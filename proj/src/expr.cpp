#include "dominion/expr.hpp"

#include "dominion/error.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <optional>

namespace dominion {

struct Expr::Node {
  ExprKind kind = ExprKind::Constant;
  double value = 0.0;
  std::string name;
  int exponent = 0;
  Expr a;
  Expr b;
};

namespace {

const Expr::Node& zero_node() {
  static const Expr::Node z{};
  return z;
}

bool is_binary(ExprKind k) {
  return k == ExprKind::Add || k == ExprKind::Sub || k == ExprKind::Mul || k == ExprKind::Div;
}

bool is_function(ExprKind k) {
  return k == ExprKind::Tanh || k == ExprKind::Sin || k == ExprKind::Cos || k == ExprKind::Exp;
}

std::optional<ExprKind> function_kind(std::string_view name) {
  if (name == "tanh") return ExprKind::Tanh;
  if (name == "sin") return ExprKind::Sin;
  if (name == "cos") return ExprKind::Cos;
  if (name == "exp") return ExprKind::Exp;
  return std::nullopt;
}

std::string_view function_name(ExprKind k) {
  switch (k) {
    case ExprKind::Tanh: return "tanh";
    case ExprKind::Sin: return "sin";
    case ExprKind::Cos: return "cos";
    case ExprKind::Exp: return "exp";
    default: return "?";
  }
}

}  // namespace

Expr make_node(std::shared_ptr<const Expr::Node> node) { return Expr(std::move(node)); }

ExprKind Expr::kind() const { return node_ ? node_->kind : ExprKind::Constant; }
double Expr::value() const { return node_ ? node_->value : 0.0; }
const std::string& Expr::name() const { return (node_ ? *node_ : zero_node()).name; }
int Expr::exponent() const { return node_ ? node_->exponent : 0; }
Expr Expr::lhs() const { return node_ ? node_->a : Expr{}; }
Expr Expr::rhs() const { return node_ ? node_->b : Expr{}; }
bool Expr::is_constant(double v) const { return kind() == ExprKind::Constant && value() == v; }

Expr constant(double v) {
  auto n = std::make_shared<Expr::Node>();
  n->kind = ExprKind::Constant;
  n->value = v;
  return make_node(std::move(n));
}

Expr variable(std::string name) {
  auto n = std::make_shared<Expr::Node>();
  n->kind = ExprKind::Variable;
  n->name = std::move(name);
  return make_node(std::move(n));
}

Expr binary(ExprKind op, Expr a, Expr b) {
  if (!is_binary(op)) throw Error(ErrorCode::InvalidArgument, "not a binary operator");
  auto n = std::make_shared<Expr::Node>();
  n->kind = op;
  n->a = std::move(a);
  n->b = std::move(b);
  return make_node(std::move(n));
}

Expr unary(ExprKind op, Expr a) {
  if (op != ExprKind::Neg && !is_function(op)) throw Error(ErrorCode::InvalidArgument, "not a unary operator");
  auto n = std::make_shared<Expr::Node>();
  n->kind = op;
  n->a = std::move(a);
  return make_node(std::move(n));
}

Expr power(Expr base, int exponent) {
  auto n = std::make_shared<Expr::Node>();
  n->kind = ExprKind::Pow;
  n->a = std::move(base);
  n->exponent = exponent;
  return make_node(std::move(n));
}

// ---------------------------------------------------------------------------
// Simplifying constructors

Expr s_add(Expr a, Expr b) {
  if (a.kind() == ExprKind::Constant && b.kind() == ExprKind::Constant) return constant(a.value() + b.value());
  if (a.is_constant(0.0)) return b;
  if (b.is_constant(0.0)) return a;
  return binary(ExprKind::Add, std::move(a), std::move(b));
}

Expr s_sub(Expr a, Expr b) {
  if (a.kind() == ExprKind::Constant && b.kind() == ExprKind::Constant) return constant(a.value() - b.value());
  if (b.is_constant(0.0)) return a;
  if (a.is_constant(0.0)) return s_neg(std::move(b));
  return binary(ExprKind::Sub, std::move(a), std::move(b));
}

Expr s_mul(Expr a, Expr b) {
  if (a.kind() == ExprKind::Constant && b.kind() == ExprKind::Constant) return constant(a.value() * b.value());
  if (a.is_constant(0.0) || b.is_constant(0.0)) return constant(0.0);
  if (a.is_constant(1.0)) return b;
  if (b.is_constant(1.0)) return a;
  return binary(ExprKind::Mul, std::move(a), std::move(b));
}

Expr s_div(Expr a, Expr b) {
  if (a.kind() == ExprKind::Constant && b.kind() == ExprKind::Constant && b.value() != 0.0)
    return constant(a.value() / b.value());
  if (b.is_constant(1.0)) return a;
  if (a.is_constant(0.0) && !b.is_constant(0.0)) return constant(0.0);
  return binary(ExprKind::Div, std::move(a), std::move(b));
}

Expr s_pow(Expr a, int n) {
  if (n == 0) return constant(1.0);
  if (n == 1) return a;
  if (a.kind() == ExprKind::Constant && (a.value() != 0.0 || n > 0)) return constant(std::pow(a.value(), n));
  return power(std::move(a), n);
}

Expr s_neg(Expr a) {
  if (a.kind() == ExprKind::Constant) return constant(-a.value());
  if (a.kind() == ExprKind::Neg) return a.lhs();
  return unary(ExprKind::Neg, std::move(a));
}

// ---------------------------------------------------------------------------
// Parser

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Expr parse() {
    Expr e = expr();
    skip_ws();
    if (pos_ != text_.size()) fail({"'+'", "'-'", "'*'", "'/'", "'^'", "end of input"}, "unexpected character");
    return e;
  }

 private:
  [[noreturn]] void fail(std::vector<std::string> expected, const std::string& msg) const {
    std::string what = msg + ", expected one of:";
    for (const auto& e : expected) what += " " + e;
    throw ParseError(pos_, std::move(expected), what);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr expr() {
    Expr e = term();
    for (;;) {
      if (accept('+'))
        e = binary(ExprKind::Add, std::move(e), term());
      else if (accept('-'))
        e = binary(ExprKind::Sub, std::move(e), term());
      else
        return e;
    }
  }

  Expr term() {
    Expr e = factor();
    for (;;) {
      if (accept('*'))
        e = binary(ExprKind::Mul, std::move(e), factor());
      else if (accept('/'))
        e = binary(ExprKind::Div, std::move(e), factor());
      else
        return e;
    }
  }

  Expr factor() {
    Expr b = base();
    if (accept('^')) {
      skip_ws();
      const std::size_t start = pos_;
      bool negative = false;
      if (pos_ < text_.size() && text_[pos_] == '-') {
        negative = true;
        ++pos_;
      }
      const std::size_t digits = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (pos_ == digits || (pos_ < text_.size() && (text_[pos_] == '.' || text_[pos_] == 'e' ||
                                                     text_[pos_] == 'E'))) {
        pos_ = start;
        fail({"integer"}, "exponent must be an integer literal");
      }
      int n = 0;
      auto [ptr, ec] = std::from_chars(text_.data() + digits, text_.data() + pos_, n);
      if (ec != std::errc{}) {
        pos_ = start;
        fail({"integer"}, "exponent out of range");
      }
      return power(std::move(b), negative ? -n : n);
    }
    return b;
  }

  Expr base() {
    skip_ws();
    if (pos_ >= text_.size()) fail({"number", "identifier", "'('", "'-'"}, "unexpected end of input");
    const char c = text_[pos_];
    if (c == '-') {
      ++pos_;
      return unary(ExprKind::Neg, base());
    }
    if (c == '(') {
      ++pos_;
      Expr e = expr();
      if (!accept(')')) fail({"')'"}, "unbalanced parenthesis");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
        ++pos_;
      std::string name(text_.substr(start, pos_ - start));
      skip_ws();
      if (pos_ < text_.size() && text_[pos_] == '(') {
        auto fk = function_kind(name);
        if (!fk) {
          pos_ = start;
          fail({"tanh", "sin", "cos", "exp"}, "unknown function '" + name + "'");
        }
        ++pos_;
        Expr arg = expr();
        if (!accept(')')) fail({"')'"}, "unbalanced parenthesis");
        return unary(*fk, std::move(arg));
      }
      if (function_kind(name)) fail({"'('"}, "function '" + name + "' needs an argument");
      return variable(std::move(name));
    }
    fail({"number", "identifier", "'('", "'-'"}, std::string("unexpected character '") + c + "'");
  }

  Expr number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    };
    digits();
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      digits();
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      const std::size_t mark = pos_;
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      const std::size_t exp_digits = pos_;
      digits();
      if (pos_ == exp_digits) pos_ = mark;  // not an exponent after all
    }
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, v);
    if (ec != std::errc{} || ptr != text_.data() + pos_) {
      pos_ = start;
      fail({"number"}, "malformed number");
    }
    return constant(v);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse_expr(std::string_view text) { return Parser(text).parse(); }

// ---------------------------------------------------------------------------
// Printer

namespace {

int precedence(const Expr& e) {
  switch (e.kind()) {
    case ExprKind::Add:
    case ExprKind::Sub: return 1;
    case ExprKind::Mul:
    case ExprKind::Div: return 2;
    case ExprKind::Pow: return 3;
    default: return 5;  // atoms, calls, prefix minus (including negative constants)
  }
}

// Atoms that never need parentheses as a '^' base or '-' operand.
bool is_atom(const Expr& e) {
  switch (e.kind()) {
    case ExprKind::Variable: return true;
    case ExprKind::Constant: return !std::signbit(e.value());
    default: return is_function(e.kind());
  }
}

std::string format_number(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), std::abs(v));
  std::string s(buf.data(), ptr);
  return std::signbit(v) ? "-" + s : s;
}

void print(const Expr& e, std::string& out);

void print_wrapped(const Expr& e, bool wrap, std::string& out) {
  if (wrap) out += '(';
  print(e, out);
  if (wrap) out += ')';
}

void print(const Expr& e, std::string& out) {
  switch (e.kind()) {
    case ExprKind::Constant: out += format_number(e.value()); return;
    case ExprKind::Variable: out += e.name(); return;
    case ExprKind::Neg:
      out += '-';
      print_wrapped(e.lhs(), !is_atom(e.lhs()), out);
      return;
    case ExprKind::Pow:
      print_wrapped(e.lhs(), !is_atom(e.lhs()), out);
      out += '^';
      out += std::to_string(e.exponent());
      return;
    case ExprKind::Tanh:
    case ExprKind::Sin:
    case ExprKind::Cos:
    case ExprKind::Exp:
      out += function_name(e.kind());
      out += '(';
      print(e.lhs(), out);
      out += ')';
      return;
    case ExprKind::Add:
    case ExprKind::Sub:
    case ExprKind::Mul:
    case ExprKind::Div: {
      const int p = precedence(e);
      const Expr l = e.lhs();
      const Expr r = e.rhs();
      print_wrapped(l, precedence(l) < p, out);
      switch (e.kind()) {
        case ExprKind::Add: out += " + "; break;
        case ExprKind::Sub: out += " - "; break;
        case ExprKind::Mul: out += '*'; break;
        default: out += '/'; break;
      }
      print_wrapped(r, precedence(r) <= p, out);
      return;
    }
  }
}

}  // namespace

std::string to_string(const Expr& e) {
  std::string out;
  print(e, out);
  return out;
}

// ---------------------------------------------------------------------------
// Differentiation

Expr diff_expr(const Expr& e, std::string_view var) {
  switch (e.kind()) {
    case ExprKind::Constant: return constant(0.0);
    case ExprKind::Variable: return constant(e.name() == var ? 1.0 : 0.0);
    case ExprKind::Add: return s_add(diff_expr(e.lhs(), var), diff_expr(e.rhs(), var));
    case ExprKind::Sub: return s_sub(diff_expr(e.lhs(), var), diff_expr(e.rhs(), var));
    case ExprKind::Mul:
      return s_add(s_mul(diff_expr(e.lhs(), var), e.rhs()), s_mul(e.lhs(), diff_expr(e.rhs(), var)));
    case ExprKind::Div:
      return s_div(s_sub(s_mul(diff_expr(e.lhs(), var), e.rhs()), s_mul(e.lhs(), diff_expr(e.rhs(), var))),
                   s_pow(e.rhs(), 2));
    case ExprKind::Pow: {
      const int n = e.exponent();
      return s_mul(s_mul(constant(n), s_pow(e.lhs(), n - 1)), diff_expr(e.lhs(), var));
    }
    case ExprKind::Neg: return s_neg(diff_expr(e.lhs(), var));
    case ExprKind::Tanh:
      return s_mul(s_sub(constant(1.0), s_pow(e, 2)), diff_expr(e.lhs(), var));
    case ExprKind::Sin: return s_mul(unary(ExprKind::Cos, e.lhs()), diff_expr(e.lhs(), var));
    case ExprKind::Cos: return s_mul(s_neg(unary(ExprKind::Sin, e.lhs())), diff_expr(e.lhs(), var));
    case ExprKind::Exp: return s_mul(e, diff_expr(e.lhs(), var));
  }
  return constant(0.0);
}

// ---------------------------------------------------------------------------
// Inspection and evaluation

namespace {

void collect(const Expr& e, std::set<std::string>& out) {
  switch (e.kind()) {
    case ExprKind::Constant: return;
    case ExprKind::Variable: out.insert(e.name()); return;
    case ExprKind::Add:
    case ExprKind::Sub:
    case ExprKind::Mul:
    case ExprKind::Div:
      collect(e.lhs(), out);
      collect(e.rhs(), out);
      return;
    default: collect(e.lhs(), out); return;
  }
}

double checked_div(double a, double b) {
  if (b == 0.0) throw Error(ErrorCode::EvalError, "division by zero");
  return a / b;
}

double checked_pow(double a, int n) {
  if (n < 0 && a == 0.0) throw Error(ErrorCode::EvalError, "division by zero in negative power");
  return std::pow(a, n);
}

}  // namespace

std::set<std::string> variables(const Expr& e) {
  std::set<std::string> out;
  collect(e, out);
  return out;
}

bool is_state_free(const Expr& e) { return variables(e).empty(); }

Expr substitute(const Expr& e, const std::map<std::string, double>& values) {
  switch (e.kind()) {
    case ExprKind::Constant: return e;
    case ExprKind::Variable: {
      auto it = values.find(e.name());
      return it == values.end() ? e : constant(it->second);
    }
    case ExprKind::Add:
    case ExprKind::Sub:
    case ExprKind::Mul:
    case ExprKind::Div: return binary(e.kind(), substitute(e.lhs(), values), substitute(e.rhs(), values));
    case ExprKind::Pow: return power(substitute(e.lhs(), values), e.exponent());
    default: return unary(e.kind(), substitute(e.lhs(), values));
  }
}

double eval(const Expr& e, const std::map<std::string, double>& values) {
  switch (e.kind()) {
    case ExprKind::Constant: return e.value();
    case ExprKind::Variable: {
      auto it = values.find(e.name());
      if (it == values.end()) throw Error(ErrorCode::EvalError, "unbound variable '" + e.name() + "'");
      return it->second;
    }
    case ExprKind::Add: return eval(e.lhs(), values) + eval(e.rhs(), values);
    case ExprKind::Sub: return eval(e.lhs(), values) - eval(e.rhs(), values);
    case ExprKind::Mul: return eval(e.lhs(), values) * eval(e.rhs(), values);
    case ExprKind::Div: return checked_div(eval(e.lhs(), values), eval(e.rhs(), values));
    case ExprKind::Pow: return checked_pow(eval(e.lhs(), values), e.exponent());
    case ExprKind::Neg: return -eval(e.lhs(), values);
    case ExprKind::Tanh: return std::tanh(eval(e.lhs(), values));
    case ExprKind::Sin: return std::sin(eval(e.lhs(), values));
    case ExprKind::Cos: return std::cos(eval(e.lhs(), values));
    case ExprKind::Exp: return std::exp(eval(e.lhs(), values));
  }
  return 0.0;
}

CompiledExpr::CompiledExpr(const Expr& e, const std::vector<std::string>& order) {
  emit(e, order, 0);
}

void CompiledExpr::emit(const Expr& e, const std::vector<std::string>& order, int depth) {
  auto push = [&](Op op, int arg = 0, double value = 0.0) { code_.push_back({op, arg, value}); };
  max_depth_ = std::max(max_depth_, depth + 1);
  switch (e.kind()) {
    case ExprKind::Constant: push(Op::Const, 0, e.value()); return;
    case ExprKind::Variable: {
      for (std::size_t i = 0; i < order.size(); ++i) {
        if (order[i] == e.name()) {
          push(Op::Var, static_cast<int>(i));
          return;
        }
      }
      throw Error(ErrorCode::EvalError, "unbound variable '" + e.name() + "'");
    }
    case ExprKind::Add:
    case ExprKind::Sub:
    case ExprKind::Mul:
    case ExprKind::Div:
      emit(e.lhs(), order, depth);
      emit(e.rhs(), order, depth + 1);
      push(e.kind() == ExprKind::Add   ? Op::Add
           : e.kind() == ExprKind::Sub ? Op::Sub
           : e.kind() == ExprKind::Mul ? Op::Mul
                                       : Op::Div);
      return;
    case ExprKind::Pow:
      emit(e.lhs(), order, depth);
      push(Op::Pow, e.exponent());
      return;
    case ExprKind::Neg: emit(e.lhs(), order, depth); push(Op::Neg); return;
    case ExprKind::Tanh: emit(e.lhs(), order, depth); push(Op::Tanh); return;
    case ExprKind::Sin: emit(e.lhs(), order, depth); push(Op::Sin); return;
    case ExprKind::Cos: emit(e.lhs(), order, depth); push(Op::Cos); return;
    case ExprKind::Exp: emit(e.lhs(), order, depth); push(Op::Exp); return;
  }
}

double CompiledExpr::operator()(std::span<const double> values) const {
  if (code_.empty()) return 0.0;
  constexpr int kInline = 64;
  std::array<double, kInline> small{};
  std::vector<double> big;
  double* stack = small.data();
  if (max_depth_ > kInline) {
    big.resize(static_cast<std::size_t>(max_depth_));
    stack = big.data();
  }
  int top = -1;
  for (const Instr& in : code_) {
    switch (in.op) {
      case Op::Const: stack[++top] = in.value; break;
      case Op::Var: stack[++top] = values[static_cast<std::size_t>(in.arg)]; break;
      case Op::Add: stack[top - 1] += stack[top]; --top; break;
      case Op::Sub: stack[top - 1] -= stack[top]; --top; break;
      case Op::Mul: stack[top - 1] *= stack[top]; --top; break;
      case Op::Div: stack[top - 1] = checked_div(stack[top - 1], stack[top]); --top; break;
      case Op::Pow: stack[top] = checked_pow(stack[top], in.arg); break;
      case Op::Neg: stack[top] = -stack[top]; break;
      case Op::Tanh: stack[top] = std::tanh(stack[top]); break;
      case Op::Sin: stack[top] = std::sin(stack[top]); break;
      case Op::Cos: stack[top] = std::cos(stack[top]); break;
      case Op::Exp: stack[top] = std::exp(stack[top]); break;
    }
  }
  return stack[0];
}

}  // namespace dominion
