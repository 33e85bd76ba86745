#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "smtilp/logic.hpp"

namespace smtilp {

/// Body predicate with typed arguments.
struct PredicateMode {
  std::string name;
  std::vector<std::string> arg_types;
  bool head_args_only = false;  // arguments restricted to head variables
};

/// Comparison literal family `lhs_attr(U) cmp rhs_attr(V)`. Positions refer
/// to head arguments; -1 lets any clause variable of the type fill the side.
struct ComparisonMode {
  std::string lhs_type, lhs_attr;
  std::string rhs_type, rhs_attr;
  std::vector<Comparator> comparators{Comparator::Lt, Comparator::Le};
  int lhs_var = -1;
  int rhs_var = -1;
};

/// Parametric literal family: each template argument reads `attr(slot var)`.
struct TemplateMode {
  std::string template_id;
  std::vector<std::string> slot_types;
  std::vector<std::pair<int, std::string>> args;  // (slot, attribute) per template argument
  std::vector<int> slot_vars;                     // head position per slot, -1 = any; empty = all any
  int max_uses = 1;
};

struct LanguageBias {
  std::string head_predicate;
  std::vector<std::string> head_types;
  std::vector<std::string> head_vars;  // names; defaults to A, B, ...
  std::vector<PredicateMode> predicates;
  std::vector<ComparisonMode> comparisons;
  std::vector<TemplateMode> templates;
  int literal_budget = 3;
  bool predicate_invention = false;
  int max_invented = 4;
  int max_body_vars = 4;   // distinct body-only variables
  int max_var_depth = 2;   // head variables have depth 0
  int max_parametric = 2;  // parametric literals per clause
  size_t max_candidates = 20000;
  uint64_t seed = 0;

  /// Throws Error when the bias is empty or inconsistent.
  void validate() const;
  std::vector<std::string> head_var_names() const;
};

struct InventedPredicate {
  std::string name;
  Clause definition;
};

/// Candidate clauses ordered by (body length, canonical text), one per
/// variant class.
std::vector<Clause> generate_clauses(const Dataset& dataset, const LanguageBias& bias);

/// Chain predicates of length 2 (and 3 when the budget is at least 3) over
/// type-compatible binary predicates of the bias.
std::vector<InventedPredicate> invent_predicates(const Dataset& dataset, const LanguageBias& bias);

/// Registers invented predicates in the background and the bias.
void adopt_invented(Dataset& dataset, LanguageBias& bias, const std::vector<InventedPredicate>& inv);

}  // namespace smtilp
