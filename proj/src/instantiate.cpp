#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "smtilp/rules.hpp"

namespace smtilp {
namespace {

// Template form with arguments and parameters replaced; params missing from
// `fixed` stay symbolic as p<slot>_<name>.
Formula literal_formula(const Literal& lit, const std::vector<Formula>& args, const ParamAssignment* fixed) {
  const auto& t = lit.numeric_template();
  std::map<std::string, Formula> repl;
  for (int i = 0; i < t.arity; ++i) repl.emplace(arg_placeholder(i), args[i]);
  for (const auto& p : t.params) {
    std::string key = param_key(lit.slot, p.name);
    if (fixed) {
      auto it = fixed->find(key);
      if (it == fixed->end()) throw Error("unassigned parameter " + key);
      repl.emplace(p.name, Formula::constant(it->second));
    } else {
      repl.emplace(p.name, Formula::var(key));
    }
  }
  return substitute(t.form, repl);
}

// Disjunction over groundings of the numeric body under concrete measurements.
Formula example_encoding(const Clause& c, const std::vector<Binding>& bindings, const Example& ex,
                         const Background& bg, const ParamAssignment* fixed) {
  std::vector<Formula> disj;
  for (const auto& b : bindings) {
    std::vector<Formula> conj;
    bool missing = false;
    for (const auto& lit : c.body) {
      if (!lit.is_numeric()) continue;
      std::vector<Formula> args;
      for (const auto& a : lit.numeric_args) {
        auto v = lookup_measurement(a, b, ex, bg);
        if (!v) {
          missing = true;
          break;
        }
        args.push_back(Formula::constant(*v));
      }
      if (missing) break;
      conj.push_back(literal_formula(lit, args, fixed));
    }
    if (missing) continue;
    Formula f = fold(land(std::move(conj)));
    if (f.is_true()) return f;
    if (!f.is_false()) disj.push_back(f);
  }
  return fold(lor(std::move(disj)));
}

std::vector<VarDecl> param_decls(const Clause& c) {
  std::vector<VarDecl> out;
  for (const auto& l : c.body) {
    if (l.kind != Literal::Kind::Parametric) continue;
    for (const auto& p : get_template(l.template_id).params)
      out.push_back({param_key(l.slot, p.name), p.lo, p.hi, p.lo_open});
  }
  return out;
}

std::string symbol_safe(const std::string& s) {
  std::string out;
  for (char ch : s) out += std::isalnum(static_cast<unsigned char>(ch)) ? ch : '_';
  return out;
}

}  // namespace

EncodedClause build_maxsmt(const Clause& clause, const Dataset& dataset, const FitOptions& opts) {
  EncodedClause out;
  MaxSmtInstance& inst = out.instance;
  inst.timeout = opts.timeout;
  inst.declarations = param_decls(clause);
  for (const auto& l : clause.body) {
    if (l.kind != Literal::Kind::Parametric) continue;
    for (const auto& p : get_template(l.template_id).params)
      inst.hard.push_back(bound_constraint(p, param_key(l.slot, p.name)));
  }
  for (const auto& e : dataset.positives) {
    if (opts.skip_positives.count(e.id)) continue;
    auto bindings = ground_clause(clause, e, dataset.background);
    if (bindings.empty()) {
      out.unreachable_positives.push_back(e.id);
      continue;
    }
    Formula f = example_encoding(clause, bindings, e, dataset.background, nullptr);
    if (opts.positives_soft) {
      inst.soft.push_back({f, opts.positive_weight});
    } else {
      inst.hard.push_back(f);
    }
  }
  for (const auto& e : dataset.negatives) {
    auto bindings = ground_clause(clause, e, dataset.background);
    Formula f = bindings.empty() ? Formula::truth(false)
                                 : example_encoding(clause, bindings, e, dataset.background, nullptr);
    inst.soft.push_back({fold(lnot(f)), 1.0});
  }
  return out;
}

InstantiateResult instantiate(const Clause& clause, const Dataset& dataset, SmtBackend& backend,
                              const FitOptions& opts) {
  InstantiateResult res;
  ScoredRule rule;
  rule.clause = clause;
  if (clause.has_parameters()) {
    EncodedClause enc = build_maxsmt(clause, dataset, opts);
    SolveResult r = solve_maxsmt(backend, enc.instance);
    ++res.solver_calls;
    if (r.status == SolveStatus::Unsat && !opts.positives_soft) {
      FitOptions relaxed = opts;
      relaxed.positives_soft = true;
      enc = build_maxsmt(clause, dataset, relaxed);
      r = solve_maxsmt(backend, enc.instance);
      ++res.solver_calls;
      rule.relaxed_fit = true;
    }
    res.status = r.status;
    if (r.status != SolveStatus::Sat || !r.model) {
      res.reason = std::string(to_string(r.status));
      return res;
    }
    for (const auto& name : clause.param_names()) rule.params[name] = r.model->at(name);
    rule.heuristic_fit = r.heuristic;
    rule.relaxed_fit = rule.relaxed_fit || opts.positives_soft;
    if (!enc.unreachable_positives.empty())
      rule.note = std::to_string(enc.unreachable_positives.size()) + " positives without grounding";
  }
  rule.stats = compute_stats(clause, rule.params, dataset);
  rule.score = score_fn(rule.stats);
  res.rule = std::move(rule);
  return res;
}

SolveStatus body_satisfiable(const ScoredRule& rule, const Dataset& dataset, SmtBackend& backend, double timeout) {
  if (rule.stats.cov_pos > 0 || rule.stats.exc_neg < rule.stats.n_neg) return SolveStatus::Sat;
  // symbolic part must have a grounding somewhere
  bool grounded = false;
  for (const auto* list : {&dataset.positives, &dataset.negatives}) {
    for (const auto& e : *list) {
      if (!ground_clause(rule.clause, e, dataset.background).empty()) {
        grounded = true;
        break;
      }
    }
    if (grounded) break;
  }
  if (!grounded) return SolveStatus::Unsat;
  // numeric part over free measurements
  std::vector<VarDecl> decls;
  std::set<std::string> declared;
  std::vector<Formula> conj;
  for (const auto& lit : rule.clause.body) {
    if (!lit.is_numeric()) continue;
    std::vector<Formula> args;
    for (const auto& a : lit.numeric_args) {
      if (a.attribute.empty()) {
        args.push_back(Formula::constant(a.term.value.value_or(0.0)));
        continue;
      }
      std::string name = "m_" + symbol_safe(a.attribute) + "_" + symbol_safe(a.term.name);
      if (declared.insert(name).second) decls.push_back({name});
      args.push_back(Formula::var(name));
    }
    conj.push_back(literal_formula(lit, args, &rule.params));
  }
  return check_sat(backend, decls, land(conj), timeout).status;
}

VerifyResult verify(const ScoredRule& rule, const Dataset& dataset, SmtBackend& backend, double theta,
                    double timeout) {
  SolveStatus s = body_satisfiable(rule, dataset, backend, timeout);
  if (s == SolveStatus::Unsat) return {false, "unsat"};
  if (s != SolveStatus::Sat) return {false, "undetermined"};
  if (rule.stats.n_pos >= 10 && rule.stats.cov_pos <= 1) return {false, "overly specific"};
  if (rule.score < theta) return {false, "below threshold"};
  return {true, ""};
}

std::vector<std::string> head_attributes(const Dataset& d, int pos) {
  std::set<std::string> objects;
  for (const auto* list : {&d.positives, &d.negatives})
    for (const auto& e : *list)
      if (e.head && pos < static_cast<int>(e.head->objects.size())) objects.insert(e.head->objects[pos]);
  std::set<std::string> attrs;
  for (const auto& m : d.background.measurements())
    if (objects.count(m.object)) attrs.insert(m.attribute);
  for (const auto* list : {&d.positives, &d.negatives})
    for (const auto& e : *list)
      for (const auto& [key, v] : e.measurements)
        if (objects.count(key.first)) attrs.insert(key.second);
  return {attrs.begin(), attrs.end()};
}

namespace {

std::optional<GroundAtom> sample_head(const Dataset& d) {
  for (const auto* list : {&d.positives, &d.negatives})
    for (const auto& e : *list)
      if (e.head) return e.head;
  return std::nullopt;
}

Literal generic_head(const GroundAtom& h) {
  std::vector<Term> args;
  for (size_t i = 0; i < h.objects.size(); ++i) args.push_back(Term::var(std::string(1, char('A' + i))));
  return Literal::symbolic(h.predicate, args);
}

void fit_into(std::vector<ScoredRule>& out, const Clause& c, const Dataset& d, SmtBackend& backend, double timeout) {
  FitOptions fo;
  fo.timeout = timeout;
  InstantiateResult r = instantiate(c, d, backend, fo);
  if (!r.rule) return;
  r.rule->origin = Origin::Arithmetic;
  out.push_back(std::move(*r.rule));
}

}  // namespace

std::vector<ScoredRule> learn_range_relations(const Dataset& dataset, SmtBackend& backend, double timeout,
                                              int literal_budget) {
  std::vector<ScoredRule> out;
  auto head = sample_head(dataset);
  if (!head) return out;
  Literal h = generic_head(*head);
  for (size_t pos = 0; pos < head->objects.size(); ++pos) {
    for (const auto& attr : head_attributes(dataset, static_cast<int>(pos))) {
      Clause c{h, {Literal::parametric("interval1d", 0, {{h.args[pos], attr}})}, literal_budget};
      size_t before = out.size();
      fit_into(out, c, dataset, backend, timeout);
      if (out.size() == before) continue;
      // constant attribute: the sweep collapses onto a single value
      std::set<double> values;
      for (const auto* list : {&dataset.positives, &dataset.negatives})
        for (const auto& e : *list)
          if (e.head) {
            Binding b{{h.args[pos].name, e.head->objects[pos]}};
            if (auto v = lookup_measurement({h.args[pos], attr}, b, e, dataset.background)) values.insert(*v);
          }
      if (values.size() <= 1) {
        out.back().degenerate = true;
        out.back().note = "constant attribute " + attr;
      }
    }
  }
  return out;
}

std::vector<ScoredRule> learn_arithmetic_relations(const Dataset& dataset, SmtBackend& backend, double timeout,
                                                   bool include_3d, int literal_budget) {
  std::vector<ScoredRule> out;
  auto head = sample_head(dataset);
  if (!head) return out;
  Literal h = generic_head(*head);
  for (size_t pos = 0; pos < head->objects.size(); ++pos) {
    auto attrs = head_attributes(dataset, static_cast<int>(pos));
    const Term& v = h.args[pos];
    for (size_t i = 0; i < attrs.size(); ++i)
      for (size_t j = i + 1; j < attrs.size(); ++j) {
        Clause c{h, {Literal::parametric("halfplane2d", 0, {{v, attrs[i]}, {v, attrs[j]}})}, literal_budget};
        fit_into(out, c, dataset, backend, timeout);
      }
    if (!include_3d) continue;
    for (size_t i = 0; i < attrs.size(); ++i)
      for (size_t j = i + 1; j < attrs.size(); ++j)
        for (size_t k = j + 1; k < attrs.size(); ++k) {
          Clause c{h,
                   {Literal::parametric("halfplane3d", 0, {{v, attrs[i]}, {v, attrs[j]}, {v, attrs[k]}})},
                   literal_budget};
          fit_into(out, c, dataset, backend, timeout);
        }
  }
  return out;
}

AcceptabilityInputs acceptability_inputs(const ScoredRule& rule, const Dataset& dataset) {
  AcceptabilityInputs in;
  std::vector<Formula> bg, h;
  std::set<std::string> declared;
  int k = 0;
  auto add_example = [&](const Example& ex, std::vector<LabeledFormula>& target) {
    std::string e = "e_" + std::to_string(k++);
    in.decls.push_back({e, 0.0, 1.0});
    auto bindings = ground_clause(rule.clause, ex, dataset.background);
    std::vector<Formula> disj;
    for (const auto& b : bindings) {
      std::vector<Formula> conj;
      bool missing = false;
      for (const auto& lit : rule.clause.body) {
        if (!lit.is_numeric()) continue;
        std::vector<Formula> args;
        for (const auto& a : lit.numeric_args) {
          if (a.attribute.empty()) {
            args.push_back(Formula::constant(a.term.value.value_or(0.0)));
            continue;
          }
          auto val = lookup_measurement(a, b, ex, dataset.background);
          if (!val) {
            missing = true;
            break;
          }
          std::string obj = a.term.is_var() ? b.at(a.term.name) : a.term.name;
          std::string m = "m_" + e + "_" + symbol_safe(obj) + "_" + symbol_safe(a.attribute);
          if (declared.insert(m).second) {
            in.decls.push_back({m});
            bg.push_back(cmp(Formula::var(m), Comparator::Eq, Formula::constant(*val)));
          }
          args.push_back(Formula::var(m));
        }
        if (missing) break;
        conj.push_back(literal_formula(lit, args, &rule.params));
      }
      if (!missing) disj.push_back(land(std::move(conj)));
    }
    Formula cover = lor(std::move(disj));
    Formula ev = Formula::var(e);
    Formula on = cmp(ev, Comparator::Ge, Formula::constant(1.0));
    Formula off = cmp(ev, Comparator::Lt, Formula::constant(1.0));
    h.push_back(lor({land({on, cover}), land({off, lnot(cover)})}));
    target.push_back({ex.id, on});
  };
  for (const auto& ex : dataset.positives) add_example(ex, in.positives);
  for (const auto& ex : dataset.negatives) add_example(ex, in.negatives);
  in.background = land(std::move(bg));
  in.rule = land(std::move(h));
  return in;
}

}  // namespace smtilp
