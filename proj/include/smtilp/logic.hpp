#pragma once

#include <compare>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "smtilp/formula.hpp"
#include "smtilp/templates.hpp"

namespace smtilp {

struct Term {
  enum class Kind { Variable, Constant };
  Kind kind = Kind::Variable;
  std::string name;
  std::optional<double> value;  // constants only

  static Term var(std::string n) { return {Kind::Variable, std::move(n), std::nullopt}; }
  static Term constant(std::string n, std::optional<double> v = std::nullopt) {
    return {Kind::Constant, std::move(n), v};
  }
  bool is_var() const { return kind == Kind::Variable; }
  auto operator<=>(const Term&) const = default;
};

/// `attribute(term)`, or a bare numeric constant when `attribute` is empty.
struct NumericArg {
  Term term;
  std::string attribute;

  auto operator<=>(const NumericArg&) const = default;
};

/// Parameter slot naming: parametric literal with slot k owns `p<k>_<name>`.
std::string param_key(int slot, std::string_view param);

struct Literal {
  enum class Kind { Symbolic, Comparison, Parametric };
  Kind kind = Kind::Symbolic;
  std::string predicate;               // symbolic
  std::vector<Term> args;              // symbolic
  Comparator comparator = Comparator::Lt;  // comparison
  std::vector<NumericArg> numeric_args;  // comparison (2) / parametric (template arity)
  std::string template_id;             // parametric
  int slot = -1;                       // parametric

  static Literal symbolic(std::string pred, std::vector<Term> args);
  static Literal comparison(NumericArg lhs, Comparator c, NumericArg rhs);
  static Literal parametric(std::string template_id, int slot, std::vector<NumericArg> args);

  bool is_numeric() const { return kind != Kind::Symbolic; }
  /// Template backing a numeric literal (varcmp_* for comparisons).
  const ConstraintTemplate& numeric_template() const;
  std::vector<std::string> variables() const;
  std::string to_string() const;

  auto operator<=>(const Literal&) const = default;
};

struct Clause {
  Literal head;
  std::vector<Literal> body;
  int literal_budget = 1;

  std::vector<std::string> variables() const;  // head first, then first-occurrence order
  std::vector<std::string> param_names() const;
  bool has_parameters() const;
  std::string to_string() const;

  auto operator<=>(const Clause&) const = default;
};

/// Clause with body-only variables renamed to V0, V1... in first-occurrence
/// order, parameter slots renumbered, and body literals sorted; two clauses
/// that are variants under renaming share the same canonical text.
std::string canonical_key(const Clause& c);

struct GroundAtom {
  std::string predicate;
  std::vector<std::string> objects;

  std::string to_string() const;
  auto operator<=>(const GroundAtom&) const = default;
};

enum class Polarity { Positive, Negative };

struct Example {
  std::string id;
  Polarity polarity = Polarity::Positive;
  std::optional<GroundAtom> head;
  std::vector<GroundAtom> atoms;                                   // example-local facts
  std::map<std::pair<std::string, std::string>, double> measurements;  // example-local

  bool positive() const { return polarity == Polarity::Positive; }
};

/// A predicate defined by a clause instead of facts: invented chains and
/// high-precision rules promoted into the background.
struct DerivedPredicate {
  std::string name;
  Clause definition;
  ParamAssignment params;
};

class Background {
 public:
  void add_fact(GroundAtom atom);
  void add_measurement(const std::string& object, const std::string& attribute, double value);
  void declare_predicate(const std::string& name, int arity);
  void add_derived(DerivedPredicate def);

  const std::vector<GroundAtom>& facts() const { return facts_; }
  struct Measurement {
    std::string object, attribute;
    double value;
  };
  const std::vector<Measurement>& measurements() const { return measure_list_; }
  const std::vector<DerivedPredicate>& derived() const { return derived_; }
  const std::map<std::string, int>& predicate_arities() const { return arities_; }

  std::optional<double> measurement(const std::string& object, const std::string& attribute) const;
  bool knows_predicate(const std::string& name) const;
  std::optional<int> arity(const std::string& name) const;
  const DerivedPredicate* find_derived(const std::string& name) const;
  std::vector<std::string> attributes() const;

  /// Indices into facts() of atoms with `predicate` whose argument `pos`
  /// is `object`; pos < 0 returns all atoms of the predicate.
  const std::vector<size_t>& lookup(const std::string& predicate, int pos, const std::string& object) const;

  /// Memo for derived-predicate tuples that depend on the background only.
  /// Shared between copies; any mutation starts a fresh one.
  struct TupleCache {
    std::mutex mu;
    std::unordered_map<std::string, std::vector<std::vector<std::string>>> tuples;
  };
  TupleCache& tuple_cache() const { return *cache_; }

 private:
  std::vector<GroundAtom> facts_;
  std::vector<Measurement> measure_list_;
  std::unordered_map<std::string, double> measure_index_;
  std::map<std::string, int> arities_;
  std::vector<DerivedPredicate> derived_;
  // key: predicate + '\x1f' + pos + '\x1f' + object
  std::unordered_map<std::string, std::vector<size_t>> index_;
  std::vector<size_t> empty_;
  std::shared_ptr<TupleCache> cache_ = std::make_shared<TupleCache>();
};

struct Dataset {
  Background background;
  std::vector<Example> positives;
  std::vector<Example> negatives;
  Theory theory_class = Theory::LRA;

  size_t size() const { return positives.size() + negatives.size(); }
  void validate() const;
};

/// Variable -> object substitution.
using Binding = std::map<std::string, std::string>;

/// All substitutions making the symbolic body literals true; numeric
/// literals are left to the numeric layer. When the example has a head atom
/// with the clause's head predicate, head variables are pre-bound to it.
/// Throws Error naming an unknown predicate.
std::vector<Binding> ground_clause(const Clause& clause, const Example& example, const Background& background);

/// Measurement for `attribute(object)`, example-local first.
std::optional<double> lookup_measurement(const NumericArg& arg, const Binding& b, const Example& ex,
                                         const Background& bg);

/// Concrete truth of a numeric literal under a binding; false if a
/// measurement is missing.
bool eval_numeric_literal(const Literal& lit, const ParamAssignment& params, const Binding& b,
                          const Example& ex, const Background& bg);

/// Existential coverage: some binding satisfies every numeric literal.
bool covers(const Clause& clause, const ParamAssignment& params, const Example& ex, const Background& bg);

struct ClauseViolation {
  std::string kind;  // "budget exceeded", "unbound head variable", "dangling template", ...
  std::string detail;
};

/// Structural diagnostics; empty result means the clause is well formed.
std::vector<ClauseViolation> clause_check(const Clause& clause);

}  // namespace smtilp
