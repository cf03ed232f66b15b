#include "leafgeom/expression.hpp"

#include "leafgeom/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <sstream>

namespace leafgeom {

enum class Op { Const, Var, Neg, Add, Sub, Mul, Div, Pow, Call, Harmonic };
enum class Fn { Sin, Cos, Tan, Exp, Log, Sqrt, Sinh, Cosh, Tanh };

struct Expression::Node {
  Op op = Op::Const;
  double value = 0.0;
  int var = -1;
  Fn fn = Fn::Sin;
  int l = 0, m = 0;
  int xyz[3] = {-1, -1, -1};
  std::shared_ptr<const Node> a, b;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;

NodePtr make_const(double v) {
  auto n = std::make_shared<Expression::Node>();
  n->op = Op::Const;
  n->value = v;
  return n;
}

bool is_const(const NodePtr& n, double v) { return n->op == Op::Const && n->value == v; }

NodePtr make_unary(Op op, NodePtr a) {
  if (op == Op::Neg) {
    if (a->op == Op::Const) return make_const(-a->value);
    if (a->op == Op::Neg) return a->a;
  }
  auto n = std::make_shared<Expression::Node>();
  n->op = op;
  n->a = std::move(a);
  return n;
}

NodePtr make_binary(Op op, NodePtr a, NodePtr b) {
  if (a->op == Op::Const && b->op == Op::Const) {
    switch (op) {
      case Op::Add: return make_const(a->value + b->value);
      case Op::Sub: return make_const(a->value - b->value);
      case Op::Mul: return make_const(a->value * b->value);
      case Op::Div: return make_const(a->value / b->value);
      case Op::Pow: return make_const(std::pow(a->value, b->value));
      default: break;
    }
  }
  switch (op) {
    case Op::Add:
      if (is_const(a, 0.0)) return b;
      if (is_const(b, 0.0)) return a;
      break;
    case Op::Sub:
      if (is_const(b, 0.0)) return a;
      if (is_const(a, 0.0)) return make_unary(Op::Neg, b);
      break;
    case Op::Mul:
      if (is_const(a, 0.0) || is_const(b, 0.0)) return make_const(0.0);
      if (is_const(a, 1.0)) return b;
      if (is_const(b, 1.0)) return a;
      break;
    case Op::Div:
      if (is_const(a, 0.0)) return make_const(0.0);
      if (is_const(b, 1.0)) return a;
      break;
    case Op::Pow:
      if (is_const(b, 0.0)) return make_const(1.0);
      if (is_const(b, 1.0)) return a;
      break;
    default: break;
  }
  auto n = std::make_shared<Expression::Node>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

NodePtr make_call(Fn fn, NodePtr a) {
  auto n = std::make_shared<Expression::Node>();
  n->op = Op::Call;
  n->fn = fn;
  n->a = std::move(a);
  return n;
}

double apply(Fn fn, double x) {
  switch (fn) {
    case Fn::Sin: return std::sin(x);
    case Fn::Cos: return std::cos(x);
    case Fn::Tan: return std::tan(x);
    case Fn::Exp: return std::exp(x);
    case Fn::Log: return std::log(x);
    case Fn::Sqrt: return std::sqrt(x);
    case Fn::Sinh: return std::sinh(x);
    case Fn::Cosh: return std::cosh(x);
    case Fn::Tanh: return std::tanh(x);
  }
  return 0.0;
}

const char* fn_name(Fn fn) {
  switch (fn) {
    case Fn::Sin: return "sin";
    case Fn::Cos: return "cos";
    case Fn::Tan: return "tan";
    case Fn::Exp: return "exp";
    case Fn::Log: return "log";
    case Fn::Sqrt: return "sqrt";
    case Fn::Sinh: return "sinh";
    case Fn::Cosh: return "cosh";
    case Fn::Tanh: return "tanh";
  }
  return "?";
}

double eval(const Expression::Node& n, std::span<const double> v) {
  switch (n.op) {
    case Op::Const: return n.value;
    case Op::Var: return v[static_cast<std::size_t>(n.var)];
    case Op::Neg: return -eval(*n.a, v);
    case Op::Add: return eval(*n.a, v) + eval(*n.b, v);
    case Op::Sub: return eval(*n.a, v) - eval(*n.b, v);
    case Op::Mul: return eval(*n.a, v) * eval(*n.b, v);
    case Op::Div: return eval(*n.a, v) / eval(*n.b, v);
    case Op::Pow: {
      const double base = eval(*n.a, v);
      if (n.b->op == Op::Const) {
        const double e = n.b->value;
        if (e == 2.0) return base * base;
        if (e == 3.0) return base * base * base;
        if (e == std::floor(e) && std::abs(e) < 64) {
          return std::pow(base, static_cast<int>(e));
        }
      }
      return std::pow(base, eval(*n.b, v));
    }
    case Op::Call: return apply(n.fn, eval(*n.a, v));
    case Op::Harmonic:
      return real_harmonic(n.l, n.m, v[static_cast<std::size_t>(n.xyz[0])],
                           v[static_cast<std::size_t>(n.xyz[1])],
                           v[static_cast<std::size_t>(n.xyz[2])]);
  }
  return 0.0;
}

NodePtr diff(const NodePtr& n, int var) {
  switch (n->op) {
    case Op::Const: return make_const(0.0);
    case Op::Var: return make_const(n->var == var ? 1.0 : 0.0);
    case Op::Neg: return make_unary(Op::Neg, diff(n->a, var));
    case Op::Add: return make_binary(Op::Add, diff(n->a, var), diff(n->b, var));
    case Op::Sub: return make_binary(Op::Sub, diff(n->a, var), diff(n->b, var));
    case Op::Mul:
      return make_binary(Op::Add, make_binary(Op::Mul, diff(n->a, var), n->b),
                         make_binary(Op::Mul, n->a, diff(n->b, var)));
    case Op::Div: {
      auto num = make_binary(Op::Sub, make_binary(Op::Mul, diff(n->a, var), n->b),
                             make_binary(Op::Mul, n->a, diff(n->b, var)));
      return make_binary(Op::Div, num, make_binary(Op::Pow, n->b, make_const(2.0)));
    }
    case Op::Pow: {
      auto da = diff(n->a, var);
      if (n->b->op == Op::Const) {
        const double e = n->b->value;
        return make_binary(Op::Mul, make_binary(Op::Mul, make_const(e),
                                                make_binary(Op::Pow, n->a, make_const(e - 1.0))),
                           da);
      }
      // d(a^b) = a^b (b' log a + b a'/a)
      auto db = diff(n->b, var);
      auto inner = make_binary(Op::Add, make_binary(Op::Mul, db, make_call(Fn::Log, n->a)),
                               make_binary(Op::Div, make_binary(Op::Mul, n->b, da), n->a));
      return make_binary(Op::Mul, n, inner);
    }
    case Op::Call: {
      auto da = diff(n->a, var);
      if (is_const(da, 0.0)) return make_const(0.0);
      NodePtr outer;
      switch (n->fn) {
        case Fn::Sin: outer = make_call(Fn::Cos, n->a); break;
        case Fn::Cos: outer = make_unary(Op::Neg, make_call(Fn::Sin, n->a)); break;
        case Fn::Tan:
          outer = make_binary(Op::Div, make_const(1.0),
                              make_binary(Op::Pow, make_call(Fn::Cos, n->a), make_const(2.0)));
          break;
        case Fn::Exp: outer = n; break;
        case Fn::Log: outer = make_binary(Op::Div, make_const(1.0), n->a); break;
        case Fn::Sqrt: outer = make_binary(Op::Div, make_const(0.5), n); break;
        case Fn::Sinh: outer = make_call(Fn::Cosh, n->a); break;
        case Fn::Cosh: outer = make_call(Fn::Sinh, n->a); break;
        case Fn::Tanh:
          outer = make_binary(Op::Sub, make_const(1.0), make_binary(Op::Pow, n, make_const(2.0)));
          break;
      }
      return make_binary(Op::Mul, outer, da);
    }
    case Op::Harmonic:
      if (n->xyz[0] == var || n->xyz[1] == var || n->xyz[2] == var) {
        throw ConfigError("Y(l,m) is not symbolically differentiable");
      }
      return make_const(0.0);
  }
  return make_const(0.0);
}

bool depends(const Expression::Node& n, int var) {
  switch (n.op) {
    case Op::Const: return false;
    case Op::Var: return n.var == var;
    case Op::Harmonic: return n.xyz[0] == var || n.xyz[1] == var || n.xyz[2] == var;
    default:
      return (n.a && depends(*n.a, var)) || (n.b && depends(*n.b, var));
  }
}

void print(const Expression::Node& n, const std::vector<std::string>& vars, std::ostream& os) {
  switch (n.op) {
    case Op::Const: os << n.value; return;
    case Op::Var: os << vars[static_cast<std::size_t>(n.var)]; return;
    case Op::Neg: os << "(-"; print(*n.a, vars, os); os << ")"; return;
    case Op::Call: os << fn_name(n.fn) << "("; print(*n.a, vars, os); os << ")"; return;
    case Op::Harmonic: os << "Y(" << n.l << "," << n.m << ")"; return;
    default: break;
  }
  const char* sym = n.op == Op::Add ? "+" : n.op == Op::Sub ? "-" : n.op == Op::Mul ? "*"
                  : n.op == Op::Div ? "/" : "^";
  os << "(";
  print(*n.a, vars, os);
  os << sym;
  print(*n.b, vars, os);
  os << ")";
}

class Parser {
 public:
  Parser(std::string_view text, const std::vector<std::string>& vars) : s_(text), vars_(vars) {}

  NodePtr parse() {
    auto n = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected trailing input");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    std::ostringstream os;
    os << "expression '" << s_ << "': " << what << " at column " << pos_ + 1;
    throw ConfigError(os.str());
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  NodePtr expr() {
    auto n = term();
    for (;;) {
      if (accept('+')) n = make_binary(Op::Add, n, term());
      else if (accept('-')) n = make_binary(Op::Sub, n, term());
      else return n;
    }
  }

  NodePtr term() {
    auto n = unary();
    for (;;) {
      if (accept('*')) n = make_binary(Op::Mul, n, unary());
      else if (accept('/')) n = make_binary(Op::Div, n, unary());
      else return n;
    }
  }

  NodePtr unary() {
    if (accept('-')) return make_unary(Op::Neg, unary());
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    auto base = primary();
    if (accept('^')) return make_binary(Op::Pow, base, unary());
    return base;
  }

  int integer_arg() {
    skip();
    bool neg = accept('-');
    skip();
    std::size_t start = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (start == pos_) fail("expected integer");
    int v = std::stoi(std::string(s_.substr(start, pos_ - start)));
    return neg ? -v : v;
  }

  int var_index(std::string_view name) const {
    auto it = std::find(vars_.begin(), vars_.end(), name);
    return it == vars_.end() ? -1 : static_cast<int>(it - vars_.begin());
  }

  NodePtr primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      auto n = expr();
      expect(')');
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const std::string rest(s_.substr(pos_));
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(rest, &used);
      } catch (const std::exception&) {
        fail("bad number");
      }
      pos_ += used;
      return make_const(v);
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) {
        ++pos_;
      }
      const std::string name(s_.substr(start, pos_ - start));
      skip();
      if (pos_ < s_.size() && s_[pos_] == '(') {
        ++pos_;
        if (name == "Y") {
          auto n = std::make_shared<Expression::Node>();
          n->op = Op::Harmonic;
          n->l = integer_arg();
          expect(',');
          n->m = integer_arg();
          expect(')');
          if (n->l < 0 || n->l > 3 || std::abs(n->m) > n->l) fail("Y(l,m) needs |m| <= l <= 3");
          n->xyz[0] = var_index("x");
          n->xyz[1] = var_index("y");
          n->xyz[2] = var_index("z");
          if (n->xyz[0] < 0 || n->xyz[1] < 0 || n->xyz[2] < 0) {
            fail("Y(l,m) needs variables x, y, z");
          }
          return n;
        }
        static const std::pair<const char*, Fn> fns[] = {
            {"sin", Fn::Sin},   {"cos", Fn::Cos},   {"tan", Fn::Tan},
            {"exp", Fn::Exp},   {"log", Fn::Log},   {"sqrt", Fn::Sqrt},
            {"sinh", Fn::Sinh}, {"cosh", Fn::Cosh}, {"tanh", Fn::Tanh}};
        for (const auto& [fname, fn] : fns) {
          if (name == fname) {
            auto arg = expr();
            expect(')');
            return make_call(fn, arg);
          }
        }
        fail("unknown function '" + name + "'");
      }
      if (name == "pi") return make_const(std::numbers::pi);
      const int idx = var_index(name);
      if (idx < 0) fail("unknown variable '" + name + "'");
      auto n = std::make_shared<Expression::Node>();
      n->op = Op::Var;
      n->var = idx;
      return n;
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  std::string_view s_;
  const std::vector<std::string>& vars_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression::Expression() : root_(make_const(0.0)) {}

Expression::Expression(std::shared_ptr<const Node> root, std::vector<std::string> vars)
    : root_(std::move(root)), vars_(std::move(vars)) {}

Expression Expression::parse(std::string_view text, std::vector<std::string> variables) {
  Parser p(text, variables);
  auto root = p.parse();
  return Expression(std::move(root), std::move(variables));
}

Expression Expression::constant(double value, std::vector<std::string> variables) {
  return Expression(make_const(value), std::move(variables));
}

double Expression::operator()(std::span<const double> values) const {
  return eval(*root_, values);
}

Expression Expression::derivative(std::string_view variable) const {
  auto it = std::find(vars_.begin(), vars_.end(), variable);
  if (it == vars_.end()) return Expression(make_const(0.0), vars_);
  return Expression(diff(root_, static_cast<int>(it - vars_.begin())), vars_);
}

bool Expression::depends_on(std::string_view variable) const {
  auto it = std::find(vars_.begin(), vars_.end(), variable);
  if (it == vars_.end()) return false;
  return depends(*root_, static_cast<int>(it - vars_.begin()));
}

bool Expression::is_constant() const { return root_->op == Op::Const; }

std::string Expression::to_string() const {
  std::ostringstream os;
  os.precision(17);
  print(*root_, vars_, os);
  return os.str();
}

double real_harmonic(int l, int m, double x, double y, double z) {
  switch (l) {
    case 0: return 1.0;
    case 1:
      return m == 0 ? z : (m > 0 ? x : y);
    case 2:
      switch (m) {
        case -2: return x * y;
        case -1: return y * z;
        case 0: return 1.5 * z * z - 0.5;
        case 1: return x * z;
        case 2: return 0.5 * (x * x - y * y);
      }
      break;
    case 3:
      switch (m) {
        case -3: return y * (3.0 * x * x - y * y);
        case -2: return x * y * z;
        case -1: return y * (5.0 * z * z - 1.0);
        case 0: return z * (5.0 * z * z - 3.0);
        case 1: return x * (5.0 * z * z - 1.0);
        case 2: return z * (x * x - y * y);
        case 3: return x * (x * x - 3.0 * y * y);
      }
      break;
  }
  throw ConfigError("real_harmonic: unsupported (l, m)");
}

}  // namespace leafgeom
