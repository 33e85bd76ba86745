#include "smtilp/templates.hpp"

#include <cmath>

namespace smtilp {

std::string_view to_string(Theory t) { return t == Theory::LRA ? "LRA" : "NRA"; }

std::string arg_placeholder(int i) { return "arg" + std::to_string(i); }

const ParamSpec* ConstraintTemplate::param(std::string_view name) const {
  for (const auto& p : params)
    if (p.name == name) return &p;
  return nullptr;
}

namespace {

bool mentions_args(const Formula& f) {
  if (f.op() == Op::Var) return f.name().rfind("arg", 0) == 0;
  for (const auto& k : f.kids())
    if (mentions_args(k)) return true;
  return false;
}

bool nonlinear_in_args(const Formula& f) {
  switch (f.op()) {
    case Op::Abs:
    case Op::Sin: return true;
    case Op::Mul:
      if (mentions_args(f.kids()[0]) && mentions_args(f.kids()[1])) return true;
      break;
    case Op::Div:
      if (mentions_args(f.kids()[1])) return true;
      break;
    default: break;
  }
  for (const auto& k : f.kids())
    if (nonlinear_in_args(k)) return true;
  return false;
}

Formula A(int i) { return Formula::var(arg_placeholder(i)); }
Formula P(const char* n) { return Formula::var(n); }
Formula C(double v) { return Formula::constant(v); }
Formula sq(const Formula& f) { return f * f; }

ConstraintTemplate make(std::string id, int arity, std::vector<ParamSpec> params, Formula form,
                        std::string desc) {
  ConstraintTemplate t;
  t.id = std::move(id);
  t.arity = arity;
  t.params = std::move(params);
  t.theory = infer_theory(form);
  t.form = std::move(form);
  t.description = std::move(desc);
  return t;
}

ParamSpec ps(const char* name, double lo = -100.0, double hi = 100.0, double def = 0.0,
             bool lo_open = false) {
  return ParamSpec{name, lo, hi, lo_open, def};
}

std::vector<ConstraintTemplate> build_catalogue() {
  std::vector<ConstraintTemplate> out;
  using enum Comparator;
  // l < x < u
  out.push_back(make("interval1d", 1, {ps("l", -100, 100, -1), ps("u", -100, 100, 1)},
                     land({cmp(P("l"), Lt, A(0)), cmp(A(0), Lt, P("u"))}), "l < x < u"));
  out.push_back(make("halfplane2d", 2, {ps("a", -100, 100, 1), ps("b"), ps("theta")},
                     cmp(P("a") * A(0) + P("b") * A(1), Le, P("theta")), "a*x + b*y <= theta"));
  out.push_back(make("halfplane3d", 3, {ps("a", -100, 100, 1), ps("b"), ps("c"), ps("d")},
                     cmp(P("a") * A(0) + P("b") * A(1) + P("c") * A(2), Le, P("d")),
                     "a*x + b*y + c*z <= d"));
  for (Comparator c : kAllComparators) {
    out.push_back(make(varcmp_id(c), 2, {}, cmp(A(0), c, A(1)),
                       "x " + std::string(to_string(c)) + " y"));
  }
  out.push_back(make("box2d", 2,
                     {ps("xmin", -100, 100, -1), ps("xmax", -100, 100, 1), ps("ymin", -100, 100, -1),
                      ps("ymax", -100, 100, 1)},
                     land({cmp(P("xmin"), Le, A(0)), cmp(A(0), Le, P("xmax")), cmp(P("ymin"), Le, A(1)),
                           cmp(A(1), Le, P("ymax"))}),
                     "xmin <= x <= xmax and ymin <= y <= ymax"));
  // args: xP yP xA yA xB yB
  Formula cross = (A(0) - A(2)) * (A(5) - A(3)) - (A(1) - A(3)) * (A(4) - A(2));
  out.push_back(make("collinear3pt", 6, {ps("eps", 0.0, 0.5, 0.25, true)},
                     cmp(abs(cross), Le, P("eps")),
                     "|(xP-xA)(yB-yA) - (yP-yA)(xB-xA)| <= eps"));
  Formula dot = (A(0) - A(2)) * (A(4) - A(0)) + (A(1) - A(3)) * (A(5) - A(1));
  out.push_back(make("between3pt", 6, {}, cmp(dot, Ge, C(0.0)),
                     "(xP-xA)(xB-xP) + (yP-yA)(yB-yP) >= 0"));
  // args: xP yP xQ yQ
  out.push_back(make("distance_threshold", 4, {ps("d", 0, 100, 1)},
                     cmp(sq(A(0) - A(2)) + sq(A(1) - A(3)), Le, sq(P("d"))),
                     "(xP-xQ)^2 + (yP-yQ)^2 <= d^2"));
  Formula r2 = sq(A(0)) + sq(A(1));
  out.push_back(make("circle", 2, {ps("r", 0, 100, 1)}, cmp(r2, Le, sq(P("r"))), "x^2 + y^2 <= r^2"));
  out.push_back(make("outside_circle", 2, {ps("r", 0, 100, 1)}, cmp(r2, Ge, sq(P("r"))),
                     "x^2 + y^2 >= r^2"));
  out.push_back(make("annulus", 2, {ps("rmin", 0, 100, 1), ps("rmax", 0, 100, 2)},
                     land({cmp(sq(P("rmin")), Le, r2), cmp(r2, Le, sq(P("rmax")))}),
                     "rmin^2 <= x^2 + y^2 <= rmax^2"));
  out.push_back(make("ellipse", 2, {ps("a", 0.1, 100, 1), ps("b", 0.1, 100, 1)},
                     cmp(sq(A(0)) / sq(P("a")) + sq(A(1)) / sq(P("b")), Le, C(1.0)),
                     "x^2/a^2 + y^2/b^2 <= 1"));
  out.push_back(make("hyperbola_side", 2, {ps("c")}, cmp(sq(A(0)) - sq(A(1)), Le, P("c")),
                     "x^2 - y^2 <= c"));
  out.push_back(make("product_threshold", 2, {ps("c")}, cmp(A(0) * A(1), Lt, P("c")), "x*y < c"));
  out.push_back(make("quad_strip", 2, {ps("a"), ps("l", -100, 100, -1), ps("u", -100, 100, 1)},
                     land({cmp(P("l"), Le, A(1) - P("a") * sq(A(0))),
                           cmp(A(1) - P("a") * sq(A(0)), Le, P("u"))}),
                     "l <= y - a*x^2 <= u"));
  out.push_back(make("parabola", 2, {ps("a"), ps("b"), ps("c")},
                     cmp(A(1), Ge, P("a") * sq(A(0)) + P("b") * A(0) + P("c")), "y >= a*x^2 + b*x + c"));
  out.push_back(make("abs_box", 2, {ps("s", 0, 100, 1)},
                     land({cmp(abs(A(0)), Le, P("s")), cmp(abs(A(1)), Le, P("s"))}), "|x| <= s and |y| <= s"));
  out.push_back(make("sinusoid", 2, {ps("omega", 0.1, 10, 1), ps("phi")},
                     cmp(A(1), Ge, sin(P("omega") * A(0)) + P("phi")), "y >= sin(omega*x) + phi"));
  out.push_back(make("influence_threshold", 1, {ps("tau")}, cmp(A(0), Gt, P("tau")), "v > tau"));
  return out;
}

}  // namespace

Theory infer_theory(const Formula& form) { return nonlinear_in_args(form) ? Theory::NRA : Theory::LRA; }

std::string varcmp_id(Comparator c) {
  switch (c) {
    case Comparator::Lt: return "varcmp_lt";
    case Comparator::Le: return "varcmp_le";
    case Comparator::Eq: return "varcmp_eq";
    case Comparator::Ge: return "varcmp_ge";
    case Comparator::Gt: return "varcmp_gt";
  }
  return "varcmp_lt";
}

const std::vector<ConstraintTemplate>& catalogue() {
  static const std::vector<ConstraintTemplate> cat = build_catalogue();
  return cat;
}

const ConstraintTemplate* find_template(std::string_view id) {
  for (const auto& t : catalogue())
    if (t.id == id) return &t;
  return nullptr;
}

const ConstraintTemplate& get_template(std::string_view id) {
  const auto* t = find_template(id);
  if (!t) throw Error("unknown template '" + std::string(id) + "'");
  return *t;
}

bool evaluate(const ConstraintTemplate& t, const ParamAssignment& params, std::span<const double> args) {
  if (static_cast<int>(args.size()) != t.arity)
    throw Error("arity mismatch for template " + t.id);
  for (double a : args)
    if (!std::isfinite(a)) throw EvalError("non-finite argument to template " + t.id);
  for (const auto& p : t.params) {
    auto it = params.find(p.name);
    if (it == params.end()) throw Error("missing parameter " + p.name + " for template " + t.id);
    if (!std::isfinite(it->second)) throw EvalError("non-finite parameter " + p.name);
    if (!p.contains(it->second)) throw Error("parameter " + p.name + " out of bounds");
  }
  Env env = [&](const std::string& name) -> double {
    if (name.rfind("arg", 0) == 0) return args[std::stoi(name.substr(3))];
    return params.at(name);
  };
  return eval_bool(t.form, env);
}

Formula bound_constraint(const ParamSpec& spec, const std::string& var) {
  Formula v = Formula::var(var);
  return land({cmp(Formula::constant(spec.lo), spec.lo_open ? Comparator::Lt : Comparator::Le, v),
               cmp(v, Comparator::Le, Formula::constant(spec.hi))});
}

Formula encode(const ConstraintTemplate& t, std::span<const Formula> args,
               const std::map<std::string, ParamBinding>& params, bool fold_constants) {
  if (static_cast<int>(args.size()) != t.arity)
    throw Error("arity mismatch encoding template " + t.id + ": expected " + std::to_string(t.arity) +
                ", got " + std::to_string(args.size()));
  std::map<std::string, Formula> repl;
  for (int i = 0; i < t.arity; ++i) repl[arg_placeholder(i)] = args[i];
  std::vector<Formula> parts;
  for (const auto& p : t.params) {
    auto it = params.find(p.name);
    if (it == params.end()) throw Error("missing parameter binding " + p.name + " for " + t.id);
    if (it->second.symbolic) {
      repl[p.name] = Formula::var(it->second.var);
    } else {
      repl[p.name] = Formula::constant(it->second.value);
    }
  }
  parts.push_back(substitute(t.form, repl));
  for (const auto& p : t.params) {
    const auto& b = params.at(p.name);
    if (b.symbolic) parts.push_back(bound_constraint(p, b.var));
  }
  Formula f = land(std::move(parts));
  return fold_constants ? fold(f) : f;
}

}  // namespace smtilp
