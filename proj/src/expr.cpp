#include "finslerforge/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <sstream>

namespace finslerforge {

namespace {

ExprPtr make(Op op, double num, int var, int pos, ExprPtr a, ExprPtr b) {
  auto n = std::make_shared<ExprNode>();
  n->op = op;
  n->num = num;
  n->var = var;
  n->pos = pos;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

}  // namespace

Expr Expr::constant(double v) { return Expr(make(Op::Const, v, -1, -1, nullptr, nullptr)); }
Expr Expr::var(int coord) { return Expr(make(Op::Var, 0.0, coord, -1, nullptr, nullptr)); }
Expr Expr::unary(Op op, Expr a) { return Expr(make(op, 0.0, -1, -1, a.root(), nullptr)); }
Expr Expr::binary(Op op, Expr a, Expr b) {
  return Expr(make(op, 0.0, -1, -1, a.root(), b.root()));
}
Expr Expr::pow(Expr a, double e) { return Expr(make(Op::Pow, e, -1, -1, a.root(), nullptr)); }

bool Expr::same_structure(const Expr& o) const {
  struct Cmp {
    static bool eq(const ExprPtr& x, const ExprPtr& y) {
      if (!x || !y) return !x && !y;
      if (x->op != y->op || x->var != y->var) return false;
      if (x->num != y->num) return false;
      return eq(x->a, y->a) && eq(x->b, y->b);
    }
  };
  return Cmp::eq(root_, o.root_);
}

std::vector<int> Expr::variables() const {
  std::vector<int> out;
  struct Walk {
    std::vector<int>& out;
    void go(const ExprPtr& n) {
      if (!n) return;
      if (n->op == Op::Var) {
        for (int v : out)
          if (v == n->var) return;
        out.push_back(n->var);
        return;
      }
      go(n->a);
      go(n->b);
    }
  } w{out};
  w.go(root_);
  return out;
}

int Expr::poly_degree_in(const std::vector<int>& coords) const {
  struct Walk {
    const std::vector<int>& coords;
    // returns degree, or -1 when not polynomial in coords
    int go(const ExprPtr& n) {
      if (!n) return 0;
      switch (n->op) {
        case Op::Const:
          return 0;
        case Op::Var: {
          for (int c : coords)
            if (c == n->var) return 1;
          return 0;
        }
        case Op::Neg:
          return go(n->a);
        case Op::Add:
        case Op::Sub: {
          int da = go(n->a), db = go(n->b);
          return (da < 0 || db < 0) ? -1 : std::max(da, db);
        }
        case Op::Mul: {
          int da = go(n->a), db = go(n->b);
          return (da < 0 || db < 0) ? -1 : da + db;
        }
        case Op::Div: {
          int da = go(n->a), db = go(n->b);
          if (da < 0 || db != 0) return -1;
          return da;
        }
        case Op::Pow: {
          int da = go(n->a);
          double r = std::round(n->num);
          if (da < 0 || std::abs(n->num - r) > 1e-12 || r < 0) return -1;
          return da * static_cast<int>(r);
        }
        default: {
          int da = go(n->a);
          return da == 0 ? 0 : -1;  // transcendental of a coord-free subtree is fine
        }
      }
    }
  } w{coords};
  return w.go(root_);
}

// ---------------------------------------------------------------------------
// parser
// ---------------------------------------------------------------------------

namespace {

class Parser {
 public:
  Parser(const std::string& text, const Chart& chart) : s_(text), chart_(chart) {}

  Expr run() {
    skip_ws();
    ExprPtr e = expr();
    skip_ws();
    if (pos_ != static_cast<int>(s_.size())) throw ParseError("unexpected trailing input", pos_);
    return Expr(e);
  }

 private:
  void skip_ws() {
    while (pos_ < static_cast<int>(s_.size()) && std::isspace(static_cast<unsigned char>(s_[pos_])))
      ++pos_;
  }
  char peek() { return pos_ < static_cast<int>(s_.size()) ? s_[pos_] : '\0'; }
  bool eat(char c) {
    skip_ws();
    if (peek() == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  ExprPtr expr() {
    skip_ws();
    ExprPtr lhs;
    int p0 = pos_;
    if (eat('-')) {
      lhs = make(Op::Neg, 0.0, -1, p0, term(), nullptr);
    } else {
      lhs = term();
    }
    while (true) {
      skip_ws();
      int p = pos_;
      if (eat('+')) {
        lhs = make(Op::Add, 0.0, -1, p, lhs, term());
      } else if (eat('-')) {
        lhs = make(Op::Sub, 0.0, -1, p, lhs, term());
      } else {
        return lhs;
      }
    }
  }

  ExprPtr term() {
    ExprPtr lhs = factor();
    while (true) {
      skip_ws();
      int p = pos_;
      if (eat('*')) {
        lhs = make(Op::Mul, 0.0, -1, p, lhs, factor());
      } else if (eat('/')) {
        lhs = make(Op::Div, 0.0, -1, p, lhs, factor());
      } else {
        return lhs;
      }
    }
  }

  ExprPtr factor() {
    ExprPtr b = base();
    skip_ws();
    int p = pos_;
    if (eat('^')) {
      skip_ws();
      bool neg = eat('-');
      double e = number();
      return make(Op::Pow, neg ? -e : e, -1, p, b, nullptr);
    }
    return b;
  }

  double number() {
    skip_ws();
    int start = pos_;
    const char* begin = s_.data() + pos_;
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin) throw ParseError("expected a number", start);
    pos_ += static_cast<int>(end - begin);
    return v;
  }

  ExprPtr base() {
    skip_ws();
    int start = pos_;
    char c = peek();
    if (c == '\0') throw ParseError("unexpected end of input", pos_);
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      double v = number();
      return make(Op::Const, v, -1, start, nullptr, nullptr);
    }
    if (c == '(') {
      ++pos_;
      ExprPtr e = expr();
      if (!eat(')')) throw ParseError("expected ')'", pos_);
      return e;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string id;
      while (pos_ < static_cast<int>(s_.size()) &&
             (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) {
        id += s_[pos_++];
      }
      Op fop;
      if (func_op(id, fop)) {
        if (!eat('(')) throw ParseError("expected '(' after function '" + id + "'", pos_);
        ExprPtr arg = expr();
        if (!eat(')')) throw ParseError("expected ')'", pos_);
        return make(fop, 0.0, -1, start, arg, nullptr);
      }
      int idx = chart_.index_of(id);
      if (idx < 0) throw ParseError("undeclared variable '" + id + "'", start);
      return make(Op::Var, 0.0, idx, start, nullptr, nullptr);
    }
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  static bool func_op(const std::string& id, Op& op) {
    if (id == "sqrt") op = Op::Sqrt;
    else if (id == "exp") op = Op::Exp;
    else if (id == "log") op = Op::Log;
    else if (id == "sin") op = Op::Sin;
    else if (id == "cos") op = Op::Cos;
    else if (id == "neg") op = Op::Neg;
    else return false;
    return true;
  }

  const std::string& s_;
  const Chart& chart_;
  int pos_ = 0;
};

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

int level(Op op) {
  switch (op) {
    case Op::Add:
    case Op::Sub:
      return 1;
    case Op::Mul:
    case Op::Div:
      return 2;
    case Op::Pow:
      return 3;
    default:
      return 4;  // atoms and function calls
  }
}

void print_node(const ExprPtr& n, const Chart& chart, std::string& out) {
  switch (n->op) {
    case Op::Const: {
      double v = n->num;
      if (v < 0) {
        out += "neg(" + format_double(-v) + ")";
      } else {
        out += format_double(v);
      }
      return;
    }
    case Op::Var:
      out += chart.name(n->var);
      return;
    case Op::Neg:
      out += "neg(";
      print_node(n->a, chart, out);
      out += ")";
      return;
    case Op::Sqrt:
    case Op::Exp:
    case Op::Log:
    case Op::Sin:
    case Op::Cos: {
      const char* name = n->op == Op::Sqrt  ? "sqrt"
                         : n->op == Op::Exp ? "exp"
                         : n->op == Op::Log ? "log"
                         : n->op == Op::Sin ? "sin"
                                            : "cos";
      out += name;
      out += "(";
      print_node(n->a, chart, out);
      out += ")";
      return;
    }
    case Op::Pow: {
      bool parens = level(n->a->op) < 4;
      if (parens) out += "(";
      print_node(n->a, chart, out);
      if (parens) out += ")";
      out += "^";
      if (n->num < 0) {
        out += "-" + format_double(-n->num);
      } else {
        out += format_double(n->num);
      }
      return;
    }
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div: {
      int lv = level(n->op);
      bool lp = level(n->a->op) < lv;
      bool rp = level(n->b->op) <= lv;  // keep parse left-associative regrouping away
      if (lp) out += "(";
      print_node(n->a, chart, out);
      if (lp) out += ")";
      out += n->op == Op::Add ? " + " : n->op == Op::Sub ? " - " : n->op == Op::Mul ? "*" : "/";
      if (rp) out += "(";
      print_node(n->b, chart, out);
      if (rp) out += ")";
      return;
    }
  }
}

}  // namespace

Expr parse_expr(const std::string& text, const Chart& chart) {
  return Parser(text, chart).run();
}

std::string to_string(const Expr& e, const Chart& chart) {
  std::string out;
  if (e.empty()) return out;
  print_node(e.root(), chart, out);
  return out;
}

// ---------------------------------------------------------------------------
// evaluation
// ---------------------------------------------------------------------------

namespace {

template <class S, class MakeConst, class GetVar>
S eval_node(const ExprPtr& n, const MakeConst& mc, const GetVar& gv) {
  switch (n->op) {
    case Op::Const:
      return mc(n->num);
    case Op::Var:
      return gv(n->var);
    case Op::Neg:
      return -eval_node<S>(n->a, mc, gv);
    case Op::Sqrt: {
      S u = eval_node<S>(n->a, mc, gv);
      if constexpr (std::is_same_v<S, double>) {
        if (u < 0.0) throw EvalError("sqrt of negative value", n->pos);
        return std::sqrt(u);
      } else {
        try {
          return sqrt(u);
        } catch (const DomainError& e) {
          throw EvalError(e.what(), n->pos);
        }
      }
    }
    case Op::Exp: {
      S u = eval_node<S>(n->a, mc, gv);
      using std::exp;
      return exp(u);
    }
    case Op::Log: {
      S u = eval_node<S>(n->a, mc, gv);
      if (value_of(u) <= 0.0) throw EvalError("log of non-positive value", n->pos);
      using std::log;
      return log(u);
    }
    case Op::Sin: {
      using std::sin;
      return sin(eval_node<S>(n->a, mc, gv));
    }
    case Op::Cos: {
      using std::cos;
      return cos(eval_node<S>(n->a, mc, gv));
    }
    case Op::Add:
      return eval_node<S>(n->a, mc, gv) + eval_node<S>(n->b, mc, gv);
    case Op::Sub:
      return eval_node<S>(n->a, mc, gv) - eval_node<S>(n->b, mc, gv);
    case Op::Mul:
      return eval_node<S>(n->a, mc, gv) * eval_node<S>(n->b, mc, gv);
    case Op::Div: {
      S num = eval_node<S>(n->a, mc, gv);
      S den = eval_node<S>(n->b, mc, gv);
      if (value_of(den) == 0.0) throw EvalError("division by zero", n->pos);
      return num / den;
    }
    case Op::Pow: {
      S base = eval_node<S>(n->a, mc, gv);
      double e = n->num;
      double r = std::round(e);
      bool integral = std::abs(e - r) < 1e-12 && std::abs(r) < 64;
      if (!integral && value_of(base) <= 0.0)
        throw EvalError("non-integer power of non-positive base", n->pos);
      if constexpr (std::is_same_v<S, double>) {
        if (integral && r < 0 && base == 0.0) throw EvalError("negative power of zero", n->pos);
        return std::pow(base, e);
      } else {
        try {
          return pow(base, e);
        } catch (const DomainError& de) {
          throw EvalError(de.what(), n->pos);
        }
      }
    }
  }
  throw EvalError("corrupt expression node", -1);
}

}  // namespace

double eval(const Expr& e, const std::vector<double>& point) {
  if (e.empty()) throw EvalError("empty expression", -1);
  return eval_node<double>(
      e.root(), [](double v) { return v; },
      [&](int var) {
        if (var < 0 || var >= static_cast<int>(point.size()))
          throw EvalError("variable not bound at evaluation point", -1);
        return point[var];
      });
}

Jet eval_jet_unchecked(const Expr& e, const std::vector<double>& point, int order,
                       const std::vector<int>& wrt) {
  if (e.empty()) throw EvalError("empty expression", -1);
  auto sp = JetSpace::get(wrt, order);
  return eval_node<Jet>(
      e.root(), [&](double v) { return Jet::constant(sp, v); },
      [&](int var) {
        if (var < 0 || var >= static_cast<int>(point.size()))
          throw EvalError("variable not bound at evaluation point", -1);
        return Jet::variable(sp, var, point[var]);
      });
}

Jet eval_jet(const Expr& e, const std::vector<double>& point, int order,
             const std::vector<int>& wrt) {
  if (order < 0 || order > 4) throw std::invalid_argument("jet order must be in 0..4");
  return eval_jet_unchecked(e, point, order, wrt);
}

// ---------------------------------------------------------------------------
// random trees
// ---------------------------------------------------------------------------

Expr random_expr(std::mt19937& rng, const Chart& chart, int max_depth, bool polynomial) {
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  std::uniform_int_distribution<int> var_pick(0, chart.size() - 1);
  auto leaf = [&]() -> Expr {
    if (std::uniform_int_distribution<int>(0, 2)(rng) == 0)
      return Expr::constant(std::abs(std::round(coef(rng) * 100.0)) / 100.0);
    return Expr::var(var_pick(rng));
  };
  struct Gen {
    std::mt19937& rng;
    const Chart& chart;
    bool polynomial;
    std::function<Expr()> leaf;
    Expr go(int depth) {
      if (depth <= 0) return leaf();
      int maxop = polynomial ? 4 : 9;
      int k = std::uniform_int_distribution<int>(0, maxop)(rng);
      switch (k) {
        case 0:
          return leaf();
        case 1:
          return go(depth - 1) + go(depth - 1);
        case 2:
          return go(depth - 1) - go(depth - 1);
        case 3:
          return go(depth - 1) * go(depth - 1);
        case 4:
          return Expr::pow(go(depth - 1), std::uniform_int_distribution<int>(0, 3)(rng));
        case 5:
          return Expr::unary(Op::Neg, go(depth - 1));
        case 6:
          return Expr::unary(Op::Sin, go(depth - 1));
        case 7:
          return Expr::unary(Op::Cos, go(depth - 1));
        case 8:
          // keep exp arguments small
          return Expr::unary(Op::Exp, Expr::constant(0.1) * go(depth - 1));
        default:
          return Expr::unary(Op::Sqrt,
                             Expr::constant(1.0) + go(depth - 1) * go(depth - 1));
      }
    }
  } g{rng, chart, polynomial, leaf};
  return g.go(max_depth);
}

}  // namespace finslerforge
