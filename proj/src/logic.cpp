#include "smtilp/logic.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

namespace smtilp {

std::string param_key(int slot, std::string_view param) {
  return "p" + std::to_string(slot) + "_" + std::string(param);
}

Literal Literal::symbolic(std::string pred, std::vector<Term> args) {
  Literal l;
  l.kind = Kind::Symbolic;
  l.predicate = std::move(pred);
  l.args = std::move(args);
  return l;
}

Literal Literal::comparison(NumericArg lhs, Comparator c, NumericArg rhs) {
  Literal l;
  l.kind = Kind::Comparison;
  l.comparator = c;
  l.numeric_args = {std::move(lhs), std::move(rhs)};
  return l;
}

Literal Literal::parametric(std::string template_id, int slot, std::vector<NumericArg> args) {
  Literal l;
  l.kind = Kind::Parametric;
  l.template_id = std::move(template_id);
  l.slot = slot;
  l.numeric_args = std::move(args);
  return l;
}

const ConstraintTemplate& Literal::numeric_template() const {
  if (kind == Kind::Comparison) return get_template(varcmp_id(comparator));
  if (kind == Kind::Parametric) return get_template(template_id);
  throw Error("symbolic literal has no template");
}

std::vector<std::string> Literal::variables() const {
  std::vector<std::string> out;
  auto add = [&](const Term& t) {
    if (t.is_var() && std::find(out.begin(), out.end(), t.name) == out.end()) out.push_back(t.name);
  };
  for (const auto& t : args) add(t);
  for (const auto& a : numeric_args) add(a.term);
  return out;
}

namespace {

std::string numeric_arg_text(const NumericArg& a) {
  if (a.attribute.empty()) {
    if (a.term.value) {
      std::ostringstream os;
      os.precision(12);
      os << *a.term.value;
      return os.str();
    }
    return a.term.name;
  }
  return a.attribute + "(" + a.term.name + ")";
}

}  // namespace

std::string Literal::to_string() const {
  std::string s;
  switch (kind) {
    case Kind::Symbolic: {
      s = predicate + "(";
      for (size_t i = 0; i < args.size(); ++i) s += (i ? "," : "") + args[i].name;
      return s + ")";
    }
    case Kind::Comparison:
      return numeric_arg_text(numeric_args[0]) + " " + std::string(smtilp::to_string(comparator)) + " " +
             numeric_arg_text(numeric_args[1]);
    case Kind::Parametric: {
      s = template_id + "<p" + std::to_string(slot) + ">(";
      for (size_t i = 0; i < numeric_args.size(); ++i) s += (i ? "," : "") + numeric_arg_text(numeric_args[i]);
      return s + ")";
    }
  }
  return s;
}

std::vector<std::string> Clause::variables() const {
  std::vector<std::string> out = head.variables();
  for (const auto& l : body)
    for (auto& v : l.variables())
      if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  return out;
}

std::vector<std::string> Clause::param_names() const {
  std::vector<std::string> out;
  for (const auto& l : body) {
    if (l.kind != Literal::Kind::Parametric) continue;
    for (const auto& p : get_template(l.template_id).params) out.push_back(param_key(l.slot, p.name));
  }
  return out;
}

bool Clause::has_parameters() const { return !param_names().empty(); }

std::string Clause::to_string() const {
  std::string s = head.to_string() + " ←";
  for (size_t i = 0; i < body.size(); ++i) s += (i ? ", " : " ") + body[i].to_string();
  return s;
}

namespace {

Literal rename(const Literal& l, const std::map<std::string, std::string>& names, int slot) {
  Literal r = l;
  for (auto& t : r.args)
    if (t.is_var() && names.count(t.name)) t.name = names.at(t.name);
  for (auto& a : r.numeric_args)
    if (a.term.is_var() && names.count(a.term.name)) a.term.name = names.at(a.term.name);
  if (r.kind == Literal::Kind::Parametric) r.slot = slot;
  return r;
}

std::string render_ordered(const Clause& c, const std::vector<size_t>& order) {
  std::map<std::string, std::string> names;
  for (const auto& v : c.head.variables()) names[v] = v;
  int next = 0;
  for (size_t i : order)
    for (const auto& v : c.body[i].variables())
      if (!names.count(v)) names[v] = "V" + std::to_string(next++);
  std::string s = c.head.to_string() + " ←";
  int slot = 0;
  for (size_t i : order) {
    const auto& l = c.body[i];
    s += " " + rename(l, names, l.kind == Literal::Kind::Parametric ? slot++ : -1).to_string() + ";";
  }
  return s;
}

std::string shape_of(const Literal& l, const std::vector<std::string>& head_vars) {
  Literal r = l;
  auto mask = [&](Term& t) {
    if (t.is_var() && std::find(head_vars.begin(), head_vars.end(), t.name) == head_vars.end()) t.name = "_";
  };
  for (auto& t : r.args) mask(t);
  for (auto& a : r.numeric_args) mask(a.term);
  if (r.kind == Literal::Kind::Parametric) r.slot = 0;
  return r.to_string();
}

}  // namespace

std::string canonical_key(const Clause& c) {
  auto head_vars = c.head.variables();
  std::vector<std::string> shapes;
  for (const auto& l : c.body) shapes.push_back(shape_of(l, head_vars));
  std::vector<size_t> order(c.body.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) { return shapes[a] < shapes[b]; });

  // group boundaries of equal shapes; permute inside groups
  std::vector<std::pair<size_t, size_t>> groups;
  for (size_t i = 0; i < order.size();) {
    size_t j = i;
    while (j < order.size() && shapes[order[j]] == shapes[order[i]]) ++j;
    groups.emplace_back(i, j);
    i = j;
  }
  std::string best = render_ordered(c, order);
  size_t budget = 5040;
  // odometer over per-group permutations
  std::vector<size_t> cur = order;
  std::function<void(size_t)> rec = [&](size_t g) {
    if (budget == 0) return;
    if (g == groups.size()) {
      --budget;
      std::string s = render_ordered(c, cur);
      if (s < best) best = std::move(s);
      return;
    }
    auto [b, e] = groups[g];
    std::sort(cur.begin() + b, cur.begin() + e);
    do {
      rec(g + 1);
    } while (budget > 0 && std::next_permutation(cur.begin() + b, cur.begin() + e));
  };
  rec(0);
  return best;
}

std::string GroundAtom::to_string() const {
  std::string s = predicate + "(";
  for (size_t i = 0; i < objects.size(); ++i) s += (i ? "," : "") + objects[i];
  return s + ")";
}

namespace {

std::string index_key(const std::string& pred, int pos, const std::string& obj) {
  std::string k = pred;
  k += '\x1f';
  k += std::to_string(pos);
  k += '\x1f';
  k += obj;
  return k;
}

std::string measure_key(const std::string& obj, const std::string& attr) {
  std::string k = obj;
  k += '\x1f';
  k += attr;
  return k;
}

}  // namespace

void Background::add_fact(GroundAtom atom) {
  cache_ = std::make_shared<TupleCache>();
  declare_predicate(atom.predicate, static_cast<int>(atom.objects.size()));
  size_t idx = facts_.size();
  index_[index_key(atom.predicate, -1, "")].push_back(idx);
  for (size_t i = 0; i < atom.objects.size(); ++i)
    index_[index_key(atom.predicate, static_cast<int>(i), atom.objects[i])].push_back(idx);
  facts_.push_back(std::move(atom));
}

void Background::add_measurement(const std::string& object, const std::string& attribute, double value) {
  cache_ = std::make_shared<TupleCache>();
  auto key = measure_key(object, attribute);
  auto it = measure_index_.find(key);
  if (it != measure_index_.end()) {
    it->second = value;
    for (auto& m : measure_list_)
      if (m.object == object && m.attribute == attribute) m.value = value;
    return;
  }
  measure_index_.emplace(std::move(key), value);
  measure_list_.push_back({object, attribute, value});
}

void Background::declare_predicate(const std::string& name, int arity) {
  auto [it, inserted] = arities_.emplace(name, arity);
  if (!inserted && it->second != arity)
    throw Error("predicate " + name + " used with arities " + std::to_string(it->second) + " and " +
                std::to_string(arity));
}

void Background::add_derived(DerivedPredicate def) {
  cache_ = std::make_shared<TupleCache>();
  declare_predicate(def.name, static_cast<int>(def.definition.head.args.size()));
  derived_.push_back(std::move(def));
}

std::optional<double> Background::measurement(const std::string& object, const std::string& attribute) const {
  auto it = measure_index_.find(measure_key(object, attribute));
  if (it == measure_index_.end()) return std::nullopt;
  return it->second;
}

bool Background::knows_predicate(const std::string& name) const { return arities_.count(name) > 0; }

std::optional<int> Background::arity(const std::string& name) const {
  auto it = arities_.find(name);
  if (it == arities_.end()) return std::nullopt;
  return it->second;
}

const DerivedPredicate* Background::find_derived(const std::string& name) const {
  for (const auto& d : derived_)
    if (d.name == name) return &d;
  return nullptr;
}

std::vector<std::string> Background::attributes() const {
  std::set<std::string> s;
  for (const auto& m : measure_list_) s.insert(m.attribute);
  return {s.begin(), s.end()};
}

const std::vector<size_t>& Background::lookup(const std::string& predicate, int pos,
                                              const std::string& object) const {
  auto it = index_.find(index_key(predicate, pos, pos < 0 ? std::string() : object));
  return it == index_.end() ? empty_ : it->second;
}

void Dataset::validate() const {
  std::set<std::string> pos_ids;
  for (const auto& e : positives) {
    if (!e.positive()) throw Error("negative example " + e.id + " in positive list");
    pos_ids.insert(e.id);
  }
  for (const auto& e : negatives) {
    if (e.positive()) throw Error("positive example " + e.id + " in negative list");
    if (pos_ids.count(e.id)) throw Error("example id " + e.id + " is both positive and negative");
  }
}

// ---------------------------------------------------------------------------
// Grounding

namespace {

struct GroundCtx {
  const Example& ex;
  const Background& bg;
  int depth = 0;
};

void join(std::vector<const Literal*> lits, Binding b, GroundCtx& ctx, std::vector<Binding>& out);

bool bound_arg(const Term& t, const Binding& b, std::string& obj) {
  if (!t.is_var()) {
    obj = t.name;
    return true;
  }
  auto it = b.find(t.name);
  if (it == b.end()) return false;
  obj = it->second;
  return true;
}

// Unify literal args with a ground tuple, extending b. Returns false on clash.
bool unify(const Literal& lit, const std::vector<std::string>& tuple, Binding& b) {
  if (lit.args.size() != tuple.size()) return false;
  for (size_t i = 0; i < tuple.size(); ++i) {
    const Term& t = lit.args[i];
    if (!t.is_var()) {
      if (t.name != tuple[i]) return false;
      continue;
    }
    auto [it, inserted] = b.emplace(t.name, tuple[i]);
    if (!inserted && it->second != tuple[i]) return false;
  }
  return true;
}

std::vector<std::vector<std::string>> derived_tuples(const DerivedPredicate& def, const Literal& lit,
                                                     const Binding& b, GroundCtx& ctx) {
  if (ctx.depth > 4) throw Error("derived predicate nesting too deep at " + def.name);
  const Clause& c = def.definition;
  Binding init;
  for (size_t i = 0; i < lit.args.size() && i < c.head.args.size(); ++i) {
    std::string obj;
    if (bound_arg(lit.args[i], b, obj)) {
      const Term& hv = c.head.args[i];
      if (!hv.is_var()) {
        if (hv.name != obj) return {};
        continue;
      }
      auto [it, inserted] = init.emplace(hv.name, obj);
      if (!inserted && it->second != obj) return {};
    }
  }
  std::vector<const Literal*> sym;
  for (const auto& l : c.body)
    if (!l.is_numeric()) sym.push_back(&l);
  std::vector<Binding> inner;
  ++ctx.depth;
  join(sym, init, ctx, inner);
  --ctx.depth;
  std::set<std::vector<std::string>> tuples;
  for (const auto& ib : inner) {
    bool ok = true;
    for (const auto& l : c.body) {
      if (!l.is_numeric()) continue;
      if (!eval_numeric_literal(l, def.params, ib, ctx.ex, ctx.bg)) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    std::vector<std::string> tup;
    for (const auto& hv : c.head.args) {
      if (!hv.is_var()) {
        tup.push_back(hv.name);
        continue;
      }
      auto it = ib.find(hv.name);
      if (it == ib.end()) {
        ok = false;
        break;
      }
      tup.push_back(it->second);
    }
    if (ok) tuples.insert(std::move(tup));
  }
  return {tuples.begin(), tuples.end()};
}

void join(std::vector<const Literal*> lits, Binding b, GroundCtx& ctx, std::vector<Binding>& out) {
  if (lits.empty()) {
    out.push_back(std::move(b));
    return;
  }
  // most-bound literal first
  size_t pick = 0;
  int best = -1;
  for (size_t i = 0; i < lits.size(); ++i) {
    int nb = 0;
    std::string tmp;
    for (const auto& t : lits[i]->args) nb += bound_arg(t, b, tmp) ? 1 : 0;
    if (nb > best) {
      best = nb;
      pick = i;
    }
  }
  const Literal& lit = *lits[pick];
  lits.erase(lits.begin() + static_cast<long>(pick));

  if (const auto* def = ctx.bg.find_derived(lit.predicate)) {
    std::vector<std::vector<std::string>> tuples;
    if (ctx.ex.atoms.empty() && ctx.ex.measurements.empty()) {
      std::string key = def->name;
      for (const auto& t : lit.args) {
        std::string o;
        key += bound_arg(t, b, o) ? '\x1f' + o : std::string("\x1e");
      }
      auto& cache = ctx.bg.tuple_cache();
      bool hit = false;
      {
        std::lock_guard lock(cache.mu);
        auto it = cache.tuples.find(key);
        if (it != cache.tuples.end()) {
          tuples = it->second;
          hit = true;
        }
      }
      if (!hit) {
        tuples = derived_tuples(*def, lit, b, ctx);
        std::lock_guard lock(cache.mu);
        cache.tuples.emplace(key, tuples);
      }
    } else {
      tuples = derived_tuples(*def, lit, b, ctx);
    }
    for (const auto& tup : tuples) {
      Binding nb = b;
      if (unify(lit, tup, nb)) join(lits, std::move(nb), ctx, out);
    }
    return;
  }

  int pos = -1;
  std::string obj;
  for (size_t i = 0; i < lit.args.size(); ++i) {
    if (bound_arg(lit.args[i], b, obj)) {
      pos = static_cast<int>(i);
      break;
    }
  }
  for (size_t idx : ctx.bg.lookup(lit.predicate, pos, obj)) {
    const auto& fact = ctx.bg.facts()[idx];
    Binding nb = b;
    if (unify(lit, fact.objects, nb)) join(lits, std::move(nb), ctx, out);
  }
  for (const auto& fact : ctx.ex.atoms) {
    if (fact.predicate != lit.predicate) continue;
    Binding nb = b;
    if (unify(lit, fact.objects, nb)) join(lits, std::move(nb), ctx, out);
  }
}

}  // namespace

std::vector<Binding> ground_clause(const Clause& clause, const Example& example, const Background& background) {
  std::vector<const Literal*> sym;
  for (const auto& l : clause.body) {
    if (l.is_numeric()) continue;
    bool known = background.knows_predicate(l.predicate);
    for (const auto& a : example.atoms) known = known || a.predicate == l.predicate;
    if (!known) throw Error("unknown predicate '" + l.predicate + "'");
    sym.push_back(&l);
  }
  Binding init;
  if (example.head && example.head->predicate == clause.head.predicate) {
    if (!unify(clause.head, example.head->objects, init)) return {};
  }
  GroundCtx ctx{example, background};
  std::vector<Binding> raw;
  join(sym, init, ctx, raw);
  std::set<Binding> uniq(raw.begin(), raw.end());
  return {uniq.begin(), uniq.end()};
}

std::optional<double> lookup_measurement(const NumericArg& arg, const Binding& b, const Example& ex,
                                         const Background& bg) {
  if (arg.attribute.empty()) return arg.term.value;
  std::string obj = arg.term.name;
  if (arg.term.is_var()) {
    auto it = b.find(arg.term.name);
    if (it == b.end()) return std::nullopt;
    obj = it->second;
  }
  auto lit = ex.measurements.find({obj, arg.attribute});
  if (lit != ex.measurements.end()) return lit->second;
  return bg.measurement(obj, arg.attribute);
}

bool eval_numeric_literal(const Literal& lit, const ParamAssignment& params, const Binding& b,
                          const Example& ex, const Background& bg) {
  const auto& tmpl = lit.numeric_template();
  std::vector<double> vals;
  vals.reserve(lit.numeric_args.size());
  for (const auto& a : lit.numeric_args) {
    auto v = lookup_measurement(a, b, ex, bg);
    if (!v) return false;
    vals.push_back(*v);
  }
  ParamAssignment local;
  for (const auto& p : tmpl.params) {
    auto it = params.find(param_key(lit.slot, p.name));
    if (it == params.end()) throw Error("unassigned parameter " + param_key(lit.slot, p.name));
    local[p.name] = it->second;
  }
  return evaluate(tmpl, local, vals);
}

bool covers(const Clause& clause, const ParamAssignment& params, const Example& ex, const Background& bg) {
  for (const auto& b : ground_clause(clause, ex, bg)) {
    bool ok = true;
    for (const auto& l : clause.body) {
      if (!l.is_numeric()) continue;
      if (!eval_numeric_literal(l, params, b, ex, bg)) {
        ok = false;
        break;
      }
    }
    if (ok) return true;
  }
  return false;
}

std::vector<ClauseViolation> clause_check(const Clause& clause) {
  std::vector<ClauseViolation> out;
  if (clause.literal_budget < 1) out.push_back({"invalid budget", "literal budget must be positive"});
  if (static_cast<int>(clause.body.size()) > clause.literal_budget)
    out.push_back({"budget exceeded", std::to_string(clause.body.size()) + " literals > budget " +
                                          std::to_string(clause.literal_budget)});
  if (clause.head.kind != Literal::Kind::Symbolic) out.push_back({"non-symbolic head", clause.head.to_string()});
  std::set<std::string> body_vars;
  for (const auto& l : clause.body)
    for (const auto& v : l.variables()) body_vars.insert(v);
  for (const auto& v : clause.head.variables())
    if (!body_vars.count(v)) out.push_back({"unbound head variable", v});
  std::set<int> slots;
  for (const auto& l : clause.body) {
    if (l.kind == Literal::Kind::Comparison && l.numeric_args.size() != 2)
      out.push_back({"malformed comparison", l.to_string()});
    if (l.kind != Literal::Kind::Parametric) continue;
    const auto* t = find_template(l.template_id);
    if (!t) {
      out.push_back({"dangling template", l.template_id});
      continue;
    }
    if (static_cast<int>(l.numeric_args.size()) != t->arity)
      out.push_back({"template arity mismatch", l.to_string()});
    if (!slots.insert(l.slot).second) out.push_back({"shared parameter slot", l.to_string()});
  }
  return out;
}

}  // namespace smtilp
