#include "smtilp/formula.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace smtilp {

std::string_view to_string(Comparator c) {
  switch (c) {
    case Comparator::Lt: return "<";
    case Comparator::Le: return "<=";
    case Comparator::Eq: return "=";
    case Comparator::Ge: return ">=";
    case Comparator::Gt: return ">";
  }
  return "?";
}

std::optional<Comparator> parse_comparator(std::string_view t) {
  if (t == "<") return Comparator::Lt;
  if (t == "<=" || t == "≤") return Comparator::Le;
  if (t == "=") return Comparator::Eq;
  if (t == ">=" || t == "≥") return Comparator::Ge;
  if (t == ">") return Comparator::Gt;
  return std::nullopt;
}

Comparator negate(Comparator c) {
  switch (c) {
    case Comparator::Lt: return Comparator::Ge;
    case Comparator::Le: return Comparator::Gt;
    case Comparator::Ge: return Comparator::Lt;
    case Comparator::Gt: return Comparator::Le;
    case Comparator::Eq: return Comparator::Eq;  // not closed under negation; callers wrap in Not
  }
  return c;
}

bool compare(double a, Comparator c, double b) {
  switch (c) {
    case Comparator::Lt: return a < b;
    case Comparator::Le: return a <= b;
    case Comparator::Eq: return a == b;
    case Comparator::Ge: return a >= b;
    case Comparator::Gt: return a > b;
  }
  return false;
}

namespace {

bool is_boolean_op(Op op) {
  return op == Op::Cmp || op == Op::And || op == Op::Or || op == Op::Not || op == Op::True ||
         op == Op::False;
}

}  // namespace

Formula::Formula() : Formula(truth(true)) {}

Formula Formula::var(std::string name) {
  auto n = std::make_shared<Node>();
  n->op = Op::Var;
  n->name = std::move(name);
  return Formula(std::move(n));
}

Formula Formula::constant(double v) {
  auto n = std::make_shared<Node>();
  n->op = Op::Const;
  n->value = v;
  return Formula(std::move(n));
}

Formula Formula::truth(bool v) {
  static const Formula t = [] {
    auto n = std::make_shared<Node>();
    n->op = Op::True;
    n->boolean = true;
    return Formula(std::shared_ptr<const Node>(std::move(n)));
  }();
  static const Formula f = [] {
    auto n = std::make_shared<Node>();
    n->op = Op::False;
    n->boolean = true;
    return Formula(std::shared_ptr<const Node>(std::move(n)));
  }();
  return v ? t : f;
}

Formula Formula::make(Op op, std::vector<Formula> kids, Comparator c) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->cmp = c;
  n->boolean = is_boolean_op(op);
  int d = 0;
  for (const auto& k : kids) {
    d = std::max(d, k.depth());
    bool want_bool = op == Op::And || op == Op::Or || op == Op::Not;
    if (k.is_boolean() != want_bool) throw Error("ill-sorted formula");
  }
  n->depth = d + 1;
  if (n->depth > kMaxFormulaDepth) throw Error("formula depth exceeds bound");
  n->kids = std::move(kids);
  return Formula(std::move(n));
}

Formula operator+(const Formula& a, const Formula& b) { return Formula::make(Op::Add, {a, b}); }
Formula operator-(const Formula& a, const Formula& b) { return Formula::make(Op::Sub, {a, b}); }
Formula operator*(const Formula& a, const Formula& b) { return Formula::make(Op::Mul, {a, b}); }
Formula operator/(const Formula& a, const Formula& b) { return Formula::make(Op::Div, {a, b}); }
Formula operator-(const Formula& a) { return Formula::make(Op::Neg, {a}); }
Formula abs(const Formula& a) { return Formula::make(Op::Abs, {a}); }
Formula sin(const Formula& a) { return Formula::make(Op::Sin, {a}); }
Formula cmp(const Formula& a, Comparator c, const Formula& b) {
  return Formula::make(Op::Cmp, {a, b}, c);
}

Formula land(std::vector<Formula> parts) {
  if (parts.empty()) return Formula::truth(true);
  if (parts.size() == 1) return parts.front();
  return Formula::make(Op::And, std::move(parts));
}

Formula lor(std::vector<Formula> parts) {
  if (parts.empty()) return Formula::truth(false);
  if (parts.size() == 1) return parts.front();
  return Formula::make(Op::Or, std::move(parts));
}

Formula lnot(const Formula& a) { return Formula::make(Op::Not, {a}); }

Env env_from(const std::map<std::string, double>& values) {
  return [&values](const std::string& name) {
    auto it = values.find(name);
    if (it == values.end()) throw EvalError("unbound variable " + name);
    return it->second;
  };
}

double eval_term(const Formula& f, const Env& env) {
  const auto& k = f.kids();
  switch (f.op()) {
    case Op::Var: {
      double v = env(f.name());
      if (!std::isfinite(v)) throw EvalError("non-finite value for " + f.name());
      return v;
    }
    case Op::Const:
      if (!std::isfinite(f.value())) throw EvalError("non-finite constant");
      return f.value();
    case Op::Add: return eval_term(k[0], env) + eval_term(k[1], env);
    case Op::Sub: return eval_term(k[0], env) - eval_term(k[1], env);
    case Op::Mul: return eval_term(k[0], env) * eval_term(k[1], env);
    case Op::Div: {
      double den = eval_term(k[1], env);
      if (den == 0.0) throw EvalError("division by zero");
      return eval_term(k[0], env) / den;
    }
    case Op::Neg: return -eval_term(k[0], env);
    case Op::Abs: return std::fabs(eval_term(k[0], env));
    case Op::Sin: return std::sin(eval_term(k[0], env));
    default: throw Error("eval_term on boolean formula");
  }
}

bool eval_bool(const Formula& f, const Env& env) {
  switch (f.op()) {
    case Op::True: return true;
    case Op::False: return false;
    case Op::Cmp:
      return compare(eval_term(f.kids()[0], env), f.comparator(), eval_term(f.kids()[1], env));
    case Op::And:
      for (const auto& k : f.kids())
        if (!eval_bool(k, env)) return false;
      return true;
    case Op::Or:
      for (const auto& k : f.kids())
        if (eval_bool(k, env)) return true;
      return false;
    case Op::Not: return !eval_bool(f.kids()[0], env);
    default: throw Error("eval_bool on term");
  }
}

Formula fold(const Formula& f) {
  switch (f.op()) {
    case Op::Var:
    case Op::Const:
    case Op::True:
    case Op::False: return f;
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div: {
      Formula a = fold(f.kids()[0]), b = fold(f.kids()[1]);
      if (a.is_const() && b.is_const()) {
        double x = a.value(), y = b.value();
        switch (f.op()) {
          case Op::Add: return Formula::constant(x + y);
          case Op::Sub: return Formula::constant(x - y);
          case Op::Mul: return Formula::constant(x * y);
          default:
            if (y != 0.0) return Formula::constant(x / y);
        }
      }
      return Formula::make(f.op(), {a, b});
    }
    case Op::Neg:
    case Op::Abs:
    case Op::Sin: {
      Formula a = fold(f.kids()[0]);
      if (a.is_const()) {
        double x = a.value();
        return Formula::constant(f.op() == Op::Neg ? -x : f.op() == Op::Abs ? std::fabs(x) : std::sin(x));
      }
      return Formula::make(f.op(), {a});
    }
    case Op::Cmp: {
      Formula a = fold(f.kids()[0]), b = fold(f.kids()[1]);
      if (a.is_const() && b.is_const()) return Formula::truth(compare(a.value(), f.comparator(), b.value()));
      return cmp(a, f.comparator(), b);
    }
    case Op::And: {
      std::vector<Formula> parts;
      for (const auto& k : f.kids()) {
        Formula g = fold(k);
        if (g.is_false()) return g;
        if (g.is_true()) continue;
        if (g.op() == Op::And)
          parts.insert(parts.end(), g.kids().begin(), g.kids().end());
        else
          parts.push_back(g);
      }
      return land(std::move(parts));
    }
    case Op::Or: {
      std::vector<Formula> parts;
      for (const auto& k : f.kids()) {
        Formula g = fold(k);
        if (g.is_true()) return g;
        if (g.is_false()) continue;
        if (g.op() == Op::Or)
          parts.insert(parts.end(), g.kids().begin(), g.kids().end());
        else
          parts.push_back(g);
      }
      return lor(std::move(parts));
    }
    case Op::Not: {
      Formula a = fold(f.kids()[0]);
      if (a.is_true()) return Formula::truth(false);
      if (a.is_false()) return Formula::truth(true);
      if (a.op() == Op::Not) return a.kids()[0];
      return lnot(a);
    }
  }
  return f;
}

Formula substitute(const Formula& f, const std::map<std::string, Formula>& repl) {
  if (f.op() == Op::Var) {
    auto it = repl.find(f.name());
    return it == repl.end() ? f : it->second;
  }
  if (f.kids().empty()) return f;
  std::vector<Formula> kids;
  kids.reserve(f.kids().size());
  for (const auto& k : f.kids()) kids.push_back(substitute(k, repl));
  return Formula::make(f.op(), std::move(kids), f.comparator());
}

namespace {

void collect_vars(const Formula& f, std::set<std::string>& out) {
  if (f.op() == Op::Var) out.insert(f.name());
  for (const auto& k : f.kids()) collect_vars(k, out);
}

}  // namespace

std::set<std::string> variables(const Formula& f) {
  std::set<std::string> out;
  collect_vars(f, out);
  return out;
}

std::optional<AffineForm> affine(const Formula& t) {
  switch (t.op()) {
    case Op::Var: {
      AffineForm a;
      a.coeffs[t.name()] = 1.0;
      return a;
    }
    case Op::Const: {
      AffineForm a;
      a.constant = t.value();
      return a;
    }
    case Op::Add:
    case Op::Sub: {
      auto a = affine(t.kids()[0]);
      auto b = affine(t.kids()[1]);
      if (!a || !b) return std::nullopt;
      double s = t.op() == Op::Add ? 1.0 : -1.0;
      a->constant += s * b->constant;
      for (auto& [v, c] : b->coeffs) a->coeffs[v] += s * c;
      return a;
    }
    case Op::Neg: {
      auto a = affine(t.kids()[0]);
      if (!a) return std::nullopt;
      a->constant = -a->constant;
      for (auto& [v, c] : a->coeffs) c = -c;
      return a;
    }
    case Op::Mul: {
      auto a = affine(t.kids()[0]);
      auto b = affine(t.kids()[1]);
      if (!a || !b) return std::nullopt;
      if (!a->coeffs.empty() && !b->coeffs.empty()) return std::nullopt;
      if (!a->coeffs.empty()) std::swap(a, b);
      // a is constant now
      double k = a->constant;
      b->constant *= k;
      for (auto& [v, c] : b->coeffs) c *= k;
      return b;
    }
    case Op::Div: {
      auto a = affine(t.kids()[0]);
      auto b = affine(t.kids()[1]);
      if (!a || !b || !b->coeffs.empty() || b->constant == 0.0) return std::nullopt;
      a->constant /= b->constant;
      for (auto& [v, c] : a->coeffs) c /= b->constant;
      return a;
    }
    case Op::Abs:
    case Op::Sin: {
      if (!variables(t).empty()) return std::nullopt;
      AffineForm a;
      a.constant = eval_term(t, [](const std::string&) -> double { return 0.0; });
      return a;
    }
    default: return std::nullopt;
  }
}

bool contains_sin(const Formula& f) {
  if (f.op() == Op::Sin) return true;
  for (const auto& k : f.kids())
    if (contains_sin(k)) return true;
  return false;
}

std::string smtlib_number(double v) {
  if (!std::isfinite(v)) throw Error("non-finite constant in SMT-LIB output");
  bool neg = std::signbit(v) && v != 0.0;
  double a = std::fabs(v);
  char buf[512];
  auto res = std::to_chars(buf, buf + sizeof(buf), a, std::chars_format::fixed);
  std::string s(buf, res.ptr);
  if (s.find('.') == std::string::npos) s += ".0";
  return neg ? "(- " + s + ")" : s;
}

namespace {

void print_smt(const Formula& f, std::ostringstream& os) {
  auto nary = [&](const char* head) {
    os << '(' << head;
    for (const auto& k : f.kids()) {
      os << ' ';
      print_smt(k, os);
    }
    os << ')';
  };
  switch (f.op()) {
    case Op::Var: os << f.name(); break;
    case Op::Const: os << smtlib_number(f.value()); break;
    case Op::Add: nary("+"); break;
    case Op::Sub: nary("-"); break;
    case Op::Mul: nary("*"); break;
    case Op::Div: nary("/"); break;
    case Op::Neg: nary("-"); break;
    case Op::Abs: nary("abs"); break;
    case Op::Sin: nary("sin"); break;
    case Op::True: os << "true"; break;
    case Op::False: os << "false"; break;
    case Op::And: nary("and"); break;
    case Op::Or: nary("or"); break;
    case Op::Not: nary("not"); break;
    case Op::Cmp:
      if (f.comparator() == Comparator::Eq)
        nary("=");
      else
        nary(std::string(to_string(f.comparator())).c_str());
      break;
  }
}

void print_infix(const Formula& f, std::ostringstream& os) {
  const auto& k = f.kids();
  auto bin = [&](const char* op) {
    os << '(';
    print_infix(k[0], os);
    os << ' ' << op << ' ';
    print_infix(k[1], os);
    os << ')';
  };
  auto join = [&](const char* sep) {
    os << '(';
    for (size_t i = 0; i < k.size(); ++i) {
      if (i) os << sep;
      print_infix(k[i], os);
    }
    os << ')';
  };
  switch (f.op()) {
    case Op::Var: os << f.name(); break;
    case Op::Const: os << f.value(); break;
    case Op::Add: bin("+"); break;
    case Op::Sub: bin("-"); break;
    case Op::Mul: bin("*"); break;
    case Op::Div: bin("/"); break;
    case Op::Neg: os << "-"; print_infix(k[0], os); break;
    case Op::Abs: os << "abs("; print_infix(k[0], os); os << ')'; break;
    case Op::Sin: os << "sin("; print_infix(k[0], os); os << ')'; break;
    case Op::True: os << "true"; break;
    case Op::False: os << "false"; break;
    case Op::And: join(" and "); break;
    case Op::Or: join(" or "); break;
    case Op::Not: os << "not "; print_infix(k[0], os); break;
    case Op::Cmp:
      print_infix(k[0], os);
      os << ' ' << to_string(f.comparator()) << ' ';
      print_infix(k[1], os);
      break;
  }
}

}  // namespace

std::string to_smtlib(const Formula& f) {
  std::ostringstream os;
  print_smt(f, os);
  return os.str();
}

std::string to_string(const Formula& f) {
  std::ostringstream os;
  print_infix(f, os);
  return os.str();
}

}  // namespace smtilp
