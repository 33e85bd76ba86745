#include "smtilp/search.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace smtilp {

void LanguageBias::validate() const {
  if (head_predicate.empty() || head_types.empty()) throw Error("bias has no head signature");
  if (literal_budget < 1) throw Error("literal budget must be at least 1");
  if (predicate_invention && max_invented < 1) throw Error("predicate invention needs max_invented >= 1");
  if (predicates.empty() && comparisons.empty() && templates.empty()) throw Error("empty bias");
  if (!head_vars.empty() && head_vars.size() != head_types.size())
    throw Error("head variable names do not match head arity");
  for (const auto& t : templates) {
    const auto& tmpl = get_template(t.template_id);
    if (static_cast<int>(t.args.size()) != tmpl.arity)
      throw Error("template mode " + t.template_id + " binds " + std::to_string(t.args.size()) + " of " +
                  std::to_string(tmpl.arity) + " arguments");
    for (const auto& [slot, attr] : t.args)
      if (slot < 0 || slot >= static_cast<int>(t.slot_types.size()))
        throw Error("template mode " + t.template_id + " references missing slot");
    if (!t.slot_vars.empty() && t.slot_vars.size() != t.slot_types.size())
      throw Error("template mode " + t.template_id + " slot_vars size mismatch");
  }
  for (const auto& c : comparisons) {
    if (c.lhs_var >= static_cast<int>(head_types.size()) || c.rhs_var >= static_cast<int>(head_types.size()))
      throw Error("comparison mode references missing head position");
  }
}

std::vector<std::string> LanguageBias::head_var_names() const {
  if (!head_vars.empty()) return head_vars;
  std::vector<std::string> out;
  for (size_t i = 0; i < head_types.size(); ++i) out.push_back(std::string(1, char('A' + i)));
  return out;
}

namespace {

struct VarInfo {
  std::string name;
  std::string type;
  int depth = 0;
  int head_pos = -1;
};

struct Skeleton {
  std::vector<Literal> lits;
  std::vector<VarInfo> vars;
};

std::string next_var_name(const std::vector<VarInfo>& vars) {
  for (int i = 0;; ++i) {
    std::string n = i < 26 ? std::string(1, char('A' + i)) : "V" + std::to_string(i);
    bool used = false;
    for (const auto& v : vars) used = used || v.name == n;
    if (!used) return n;
  }
}

class Generator {
 public:
  Generator(const LanguageBias& bias) : bias_(bias) {
    auto names = bias.head_var_names();
    Skeleton root;
    std::vector<Term> head_args;
    for (size_t i = 0; i < names.size(); ++i) {
      root.vars.push_back({names[i], bias.head_types[i], 0, static_cast<int>(i)});
      head_args.push_back(Term::var(names[i]));
    }
    head_ = Literal::symbolic(bias.head_predicate, head_args);
    root_ = root;
  }

  // Level by level in body length, stopping once the cap is reached; the
  // output is the same as a full enumeration truncated in (length, key) order.
  std::vector<Clause> run() {
    for (level_ = 1; level_ <= bias_.literal_budget; ++level_) {
      seen_skeletons_.clear();
      expand(root_);
      if (clauses_.size() >= bias_.max_candidates) break;
    }
    std::vector<std::pair<size_t, std::string>> order;
    for (const auto& [key, c] : clauses_) order.push_back({c.body.size(), key});
    std::sort(order.begin(), order.end());
    std::vector<Clause> out;
    for (const auto& [len, key] : order) {
      if (out.size() >= bias_.max_candidates) break;
      out.push_back(clauses_.at(key));
    }
    return out;
  }

 private:
  int head_count() const { return static_cast<int>(root_.vars.size()); }

  void expand(const Skeleton& sk) {
    Clause probe{head_, sk.lits, bias_.literal_budget};
    if (!seen_skeletons_.insert(canonical_key(probe)).second) return;
    numeric_completions(sk);
    if (static_cast<int>(sk.lits.size()) >= level_) return;
    for (const auto& pm : bias_.predicates) {
      std::vector<Term> args;
      extend_args(sk, pm, args, sk);
    }
  }

  // Assign each argument an existing variable of its type or a fresh one.
  void extend_args(const Skeleton& base, const PredicateMode& pm, std::vector<Term>& args, const Skeleton& cur) {
    size_t i = args.size();
    if (i == pm.arg_types.size()) {
      bool linked = false;
      int min_depth = 1 << 20;
      for (const auto& a : args) {
        for (const auto& v : base.vars)
          if (v.name == a.name) {
            linked = true;
            min_depth = std::min(min_depth, v.depth);
          }
      }
      if (!linked) return;
      Skeleton next = cur;
      for (auto& v : next.vars) {
        bool is_new = true;
        for (const auto& b : base.vars) is_new = is_new && b.name != v.name;
        if (is_new) v.depth = min_depth + 1;
        if (v.depth > bias_.max_var_depth) return;
      }
      Literal lit = Literal::symbolic(pm.name, args);
      if (std::find(next.lits.begin(), next.lits.end(), lit) != next.lits.end()) return;
      next.lits.push_back(lit);
      expand(next);
      return;
    }
    for (const auto& v : cur.vars) {
      if (v.type != pm.arg_types[i] || (pm.head_args_only && v.depth != 0)) continue;
      args.push_back(Term::var(v.name));
      extend_args(base, pm, args, cur);
      args.pop_back();
    }
    int body_only = static_cast<int>(cur.vars.size()) - head_count();
    if (body_only < bias_.max_body_vars && !pm.head_args_only) {
      Skeleton with = cur;
      VarInfo nv{next_var_name(cur.vars), pm.arg_types[i], 0, -1};
      with.vars.push_back(nv);
      args.push_back(Term::var(nv.name));
      extend_args(base, pm, args, with);
      args.pop_back();
    }
  }

  struct NumLit {
    Literal lit;
    bool parametric = false;
    int mode = -1;  // template mode index
  };

  std::vector<const VarInfo*> candidates(const Skeleton& sk, const std::string& type, int head_pos) const {
    std::vector<const VarInfo*> out;
    for (const auto& v : sk.vars) {
      if (v.type != type) continue;
      if (head_pos >= 0 && v.head_pos != head_pos) continue;
      out.push_back(&v);
    }
    return out;
  }

  std::vector<NumLit> numeric_space(const Skeleton& sk) const {
    std::vector<NumLit> out;
    std::set<std::string> seen;
    for (const auto& cm : bias_.comparisons) {
      for (const VarInfo* l : candidates(sk, cm.lhs_type, cm.lhs_var)) {
        for (const VarInfo* r : candidates(sk, cm.rhs_type, cm.rhs_var)) {
          bool same_attr = cm.lhs_attr == cm.rhs_attr;
          if (l == r && same_attr) continue;
          for (Comparator c : cm.comparators) {
            NumericArg la{Term::var(l->name), cm.lhs_attr}, ra{Term::var(r->name), cm.rhs_attr};
            if (c == Comparator::Gt || c == Comparator::Ge) {
              std::swap(la, ra);
              c = c == Comparator::Gt ? Comparator::Lt : Comparator::Le;
            }
            if (c == Comparator::Eq && ra < la) std::swap(la, ra);
            Literal lit = Literal::comparison(la, c, ra);
            if (seen.insert(lit.to_string()).second) out.push_back({lit, false, -1});
          }
        }
      }
    }
    for (size_t mi = 0; mi < bias_.templates.size(); ++mi) {
      const auto& tm = bias_.templates[mi];
      std::vector<const VarInfo*> chosen;
      std::function<void()> rec = [&] {
        size_t s = chosen.size();
        if (s == tm.slot_types.size()) {
          std::vector<NumericArg> args;
          for (const auto& [slot, attr] : tm.args) args.push_back({Term::var(chosen[slot]->name), attr});
          Literal lit = Literal::parametric(tm.template_id, 0, args);
          if (seen.insert(lit.to_string()).second) out.push_back({lit, true, static_cast<int>(mi)});
          return;
        }
        int hp = tm.slot_vars.empty() ? -1 : tm.slot_vars[s];
        for (const VarInfo* v : candidates(sk, tm.slot_types[s], hp)) {
          if (std::find(chosen.begin(), chosen.end(), v) != chosen.end()) continue;
          chosen.push_back(v);
          rec();
          chosen.pop_back();
        }
      };
      rec();
    }
    return out;
  }

  void numeric_completions(const Skeleton& sk) {
    const int room = level_ - static_cast<int>(sk.lits.size());
    auto space = numeric_space(sk);
    std::vector<size_t> pick;
    std::vector<int> uses(bias_.templates.size(), 0);
    std::function<void(size_t, int)> rec = [&](size_t from, int n_param) {
      if (static_cast<int>(pick.size()) == room) {
        emit(sk, space, pick);
        return;
      }
      if (clauses_.size() >= kHardCap) return;
      for (size_t i = from; i < space.size(); ++i) {
        const NumLit& nl = space[i];
        if (nl.parametric) {
          if (n_param >= bias_.max_parametric) continue;
          if (uses[nl.mode] >= bias_.templates[nl.mode].max_uses) continue;
          ++uses[nl.mode];
        }
        pick.push_back(i);
        rec(nl.parametric ? i : i + 1, n_param + (nl.parametric ? 1 : 0));
        pick.pop_back();
        if (nl.parametric) --uses[nl.mode];
      }
    };
    rec(0, 0);
  }

  void emit(const Skeleton& sk, const std::vector<NumLit>& space, const std::vector<size_t>& pick) {
    Clause c{head_, sk.lits, bias_.literal_budget};
    int slot = 0;
    for (size_t i : pick) {
      Literal l = space[i].lit;
      if (l.kind == Literal::Kind::Parametric) l.slot = slot++;
      c.body.push_back(l);
    }
    if (c.body.empty()) return;
    std::set<std::string> used;
    for (const auto& l : c.body)
      for (const auto& v : l.variables()) used.insert(v);
    for (const auto& v : head_.variables())
      if (!used.count(v)) return;
    std::string key = canonical_key(c);
    clauses_.emplace(std::move(key), std::move(c));
  }

  static constexpr size_t kHardCap = 2'000'000;
  const LanguageBias& bias_;
  int level_ = 0;
  Literal head_;
  Skeleton root_;
  std::set<std::string> seen_skeletons_;
  std::map<std::string, Clause> clauses_;
};

}  // namespace

std::vector<Clause> generate_clauses(const Dataset& dataset, const LanguageBias& bias) {
  bias.validate();
  for (const auto& pm : bias.predicates) {
    auto ar = dataset.background.arity(pm.name);
    if (ar && *ar != static_cast<int>(pm.arg_types.size()))
      throw Error("bias declares " + pm.name + " with arity " + std::to_string(pm.arg_types.size()) +
                  " but the data uses " + std::to_string(*ar));
  }
  return Generator(bias).run();
}

std::vector<InventedPredicate> invent_predicates(const Dataset& dataset, const LanguageBias& bias) {
  std::vector<InventedPredicate> out;
  if (!bias.predicate_invention) return out;
  std::vector<const PredicateMode*> binary;
  for (const auto& pm : bias.predicates) {
    if (pm.arg_types.size() != 2 || pm.name.rfind("inv_", 0) == 0) continue;
    auto ar = dataset.background.arity(pm.name);
    if (ar && *ar != 2) continue;
    binary.push_back(&pm);
  }
  const bool single = binary.size() == 1;
  auto chain = [&](const std::string& name, const std::vector<const PredicateMode*>& ps) {
    std::vector<std::string> vs;
    for (size_t i = 0; i <= ps.size(); ++i) vs.push_back(std::string(1, char('A' + i)));
    Clause c;
    c.head = Literal::symbolic(name, {Term::var(vs.front()), Term::var(vs.back())});
    for (size_t i = 0; i < ps.size(); ++i)
      c.body.push_back(Literal::symbolic(ps[i]->name, {Term::var(vs[i]), Term::var(vs[i + 1])}));
    c.literal_budget = static_cast<int>(ps.size());
    out.push_back({name, c});
  };
  for (const auto* p : binary)
    if (p->arg_types[1] == p->arg_types[0]) chain(single ? "inv_reach2" : "inv_reach2_" + p->name, {p, p});
  for (const auto* p : binary)
    for (const auto* q : binary)
      if (p != q && p->arg_types[1] == q->arg_types[0]) chain("inv_" + p->name + "_" + q->name, {p, q});
  if (bias.literal_budget >= 3)
    for (const auto* p : binary)
      if (p->arg_types[1] == p->arg_types[0]) chain(single ? "inv_reach3" : "inv_reach3_" + p->name, {p, p, p});
  if (static_cast<int>(out.size()) > bias.max_invented) out.resize(static_cast<size_t>(bias.max_invented));
  return out;
}

void adopt_invented(Dataset& dataset, LanguageBias& bias, const std::vector<InventedPredicate>& inv) {
  for (const auto& ip : inv) {
    if (!dataset.background.find_derived(ip.name)) dataset.background.add_derived({ip.name, ip.definition, {}});
    bool present = false;
    for (const auto& pm : bias.predicates) present = present || pm.name == ip.name;
    if (present) continue;
    const auto& first = ip.definition.body.front().predicate;
    const auto& last = ip.definition.body.back().predicate;
    std::string t0, t1;
    for (const auto& pm : bias.predicates) {
      if (pm.name == first) t0 = pm.arg_types[0];
      if (pm.name == last) t1 = pm.arg_types[1];
    }
    bias.predicates.push_back({ip.name, {t0, t1}});
  }
}

}  // namespace smtilp
