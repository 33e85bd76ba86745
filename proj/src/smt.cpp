#include <cmath>

#include "smtilp/smt.hpp"

namespace smtilp {

std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Sat: return "sat";
    case SolveStatus::Unsat: return "unsat";
    case SolveStatus::Unknown: return "unknown";
    case SolveStatus::Timeout: return "timeout";
  }
  return "?";
}

double MaxSmtInstance::total_soft_weight() const {
  double w = 0;
  for (const auto& s : soft) w += s.weight;
  return w;
}

void MaxSmtInstance::validate() const {
  if (!(timeout > 0)) throw Error("MaxSMT timeout must be positive");
  std::set<std::string> declared;
  for (const auto& d : declarations) {
    if (!declared.insert(d.name).second) throw Error("duplicate declaration " + d.name);
    if (!(d.lo <= d.hi)) throw Error("empty bounds for " + d.name);
  }
  auto check = [&](const Formula& f) {
    if (!f.is_boolean()) throw Error("constraint is not a formula");
    for (const auto& v : variables(f))
      if (!declared.count(v)) throw Error("undeclared variable " + v);
  };
  for (const auto& h : hard) check(h);
  for (const auto& s : soft) {
    if (!(s.weight > 0)) throw Error("soft weight must be positive");
    check(s.formula);
  }
}

bool holds(const Formula& f, const ParamAssignment& model, const std::vector<VarDecl>& decls) {
  std::map<std::string, double> env = model;
  for (const auto& d : decls) {
    if (env.count(d.name)) continue;
    double v = std::clamp(0.0, d.lo, d.hi);
    if (d.lo_open && v <= d.lo) v = std::min(d.hi, d.lo + 1e-6 * std::max(1.0, std::fabs(d.lo)));
    env[d.name] = v;
  }
  try {
    return eval_bool(f, env_from(env));
  } catch (const EvalError&) {
    return false;
  }
}

namespace {

bool in_bounds(const ParamAssignment& m, const std::vector<VarDecl>& decls) {
  for (const auto& d : decls) {
    auto it = m.find(d.name);
    if (it == m.end()) continue;
    double v = it->second;
    if (v > d.hi || v < d.lo || (d.lo_open && v <= d.lo)) return false;
  }
  return true;
}

// Three-valued evaluation: a comparison within rounding distance of its
// boundary is undecided. Solvers print exact models in decimals, so an
// optimum sitting on a boundary can evaluate either way in doubles.
enum class Tri { False, True, Undecided };

Tri eval_tri(const Formula& f, const Env& env) {
  switch (f.op()) {
    case Op::True: return Tri::True;
    case Op::False: return Tri::False;
    case Op::Cmp: {
      double l = eval_term(f.kids()[0], env), r = eval_term(f.kids()[1], env);
      if (compare(l, f.comparator(), r)) return Tri::True;
      return std::fabs(l - r) <= 1e-9 * (1 + std::max(std::fabs(l), std::fabs(r))) ? Tri::Undecided : Tri::False;
    }
    case Op::And: {
      Tri out = Tri::True;
      for (const auto& k : f.kids()) {
        Tri t = eval_tri(k, env);
        if (t == Tri::False) return Tri::False;
        if (t == Tri::Undecided) out = Tri::Undecided;
      }
      return out;
    }
    case Op::Or: {
      Tri out = Tri::False;
      for (const auto& k : f.kids()) {
        Tri t = eval_tri(k, env);
        if (t == Tri::True) return Tri::True;
        if (t == Tri::Undecided) out = Tri::Undecided;
      }
      return out;
    }
    case Op::Not: {
      Tri t = eval_tri(f.kids()[0], env);
      return t == Tri::Undecided ? t : t == Tri::True ? Tri::False : Tri::True;
    }
    default: throw Error("eval_tri on term");
  }
}

Tri holds_tri(const Formula& f, const ParamAssignment& model, const std::vector<VarDecl>& decls) {
  if (holds(f, model, decls)) return Tri::True;
  std::map<std::string, double> env = model;
  for (const auto& d : decls)
    if (!env.count(d.name)) return Tri::False;  // defaults are exact; nothing to excuse
  try {
    return eval_tri(f, env_from(env));
  } catch (const EvalError&) {
    return Tri::False;
  }
}

void downgrade(SolveResult& r) {
  r.status = SolveStatus::Unknown;
  r.model.reset();
  r.satisfied_soft_weight.reset();
  r.note = "returned model failed concrete re-evaluation";
}

}  // namespace

SolveResult check_sat(SmtBackend& backend, const std::vector<VarDecl>& decls, const Formula& f, double timeout) {
  SolveResult r = backend.check_sat(decls, f, timeout);
  if (r.model && (holds_tri(f, *r.model, decls) == Tri::False || !in_bounds(*r.model, decls))) downgrade(r);
  return r;
}

SolveResult solve_maxsmt(SmtBackend& backend, const MaxSmtInstance& inst) {
  SolveResult r = backend.solve_maxsmt(inst);
  if (!r.model) return r;
  bool ok = in_bounds(*r.model, inst.declarations);
  for (const auto& h : inst.hard) ok = ok && holds_tri(h, *r.model, inst.declarations) != Tri::False;
  if (!ok) {
    downgrade(r);
    return r;
  }
  // the reported weight stands when the model can account for it
  double lo = 0, hi = 0;
  for (const auto& s : inst.soft) {
    Tri t = holds_tri(s.formula, *r.model, inst.declarations);
    if (t == Tri::True) lo += s.weight;
    if (t != Tri::False) hi += s.weight;
  }
  const double eps = 1e-9 * (1 + hi);
  if (!r.satisfied_soft_weight || *r.satisfied_soft_weight < lo - eps || *r.satisfied_soft_weight > hi + eps)
    r.satisfied_soft_weight = lo;
  return r;
}

std::unique_ptr<SmtBackend> make_backend(const BackendConfig& cfg) {
  if (cfg.kind == BackendKind::External) return std::make_unique<SmtLibBackend>(cfg.external);
  return std::make_unique<BuiltinBackend>(cfg.builtin);
}

AcceptabilityResult acceptability_check(SmtBackend& backend, const std::vector<VarDecl>& decls,
                                        const Formula& background, const Formula& rule,
                                        const std::vector<LabeledFormula>& positives,
                                        const std::vector<LabeledFormula>& negatives, double timeout) {
  auto probe = [&](const LabeledFormula& e, bool positive) -> std::optional<AcceptabilityResult> {
    Formula q = land({background, rule, positive ? lnot(e.formula) : e.formula});
    SolveResult r = check_sat(backend, decls, q, timeout);
    if (r.status == SolveStatus::Unsat) return std::nullopt;
    AcceptabilityResult a;
    a.verdict = r.status == SolveStatus::Sat ? AcceptabilityResult::Verdict::Counterexample
                                             : AcceptabilityResult::Verdict::Undetermined;
    a.example_id = e.id;
    a.positive = positive;
    a.status = r.status;
    return a;
  };
  for (const auto& e : positives)
    if (auto bad = probe(e, true)) return *bad;
  for (const auto& e : negatives)
    if (auto bad = probe(e, false)) return *bad;
  return {};
}

}  // namespace smtilp
