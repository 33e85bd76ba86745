#pragma once

#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "smtilp/logic.hpp"
#include "smtilp/smt.hpp"

namespace smtilp {

struct RuleStats {
  int cov_pos = 0;
  int exc_neg = 0;
  int n_pos = 0;
  int n_neg = 0;
  double precision = 0, recall = 0, f1 = 0, support = 0, compression = 0;

  /// Derives the ratio fields from the raw counts.
  static RuleStats from_counts(int cov_pos, int exc_neg, int n_pos, int n_neg, int body_len, int budget);
};

/// 0.4 f1 + 0.3 precision + 0.2 support + 0.1 compression.
double score_fn(const RuleStats& s);

inline constexpr double kScoreThreshold = 0.6;

enum class Origin { Arithmetic, Structured, Other };
std::string_view to_string(Origin o);
std::optional<Origin> parse_origin(std::string_view s);
/// Lower is preferred.
int priority(Origin o);

struct ScoredRule {
  Clause clause;
  ParamAssignment params;
  RuleStats stats;
  double score = 0;
  Origin origin = Origin::Structured;
  int iteration = 0;
  bool relaxed_fit = false;  // positives were soft in the fit
  bool heuristic_fit = false;
  bool degenerate = false;
  std::string note;

  std::string to_string() const;  // rule <score> <origin>: head ← body {params}
};

/// Coverage of each example, positives then negatives.
struct Coverage {
  std::vector<bool> pos;
  std::vector<bool> neg;
};
Coverage coverage(const Clause& c, const ParamAssignment& params, const Dataset& d);
RuleStats compute_stats(const Clause& c, const ParamAssignment& params, const Dataset& d);
RuleStats compute_stats(const Clause& c, const Coverage& cov, const Dataset& d);

struct FitOptions {
  double timeout = 30;
  std::set<std::string> skip_positives;  // ids left out of the fit (already covered)
  bool positives_soft = false;
  double positive_weight = 10;
};

struct EncodedClause {
  MaxSmtInstance instance;
  std::vector<std::string> unreachable_positives;  // no symbolic grounding; left out of the hard set
};

/// Positives become hard disjunctions over their groundings, negatives soft
/// negations with weight 1, parameter bounds appear once.
EncodedClause build_maxsmt(const Clause& clause, const Dataset& dataset, const FitOptions& opts = {});

struct InstantiateResult {
  std::optional<ScoredRule> rule;
  std::string reason;  // when infeasible
  SolveStatus status = SolveStatus::Sat;
  int solver_calls = 0;
};

InstantiateResult instantiate(const Clause& clause, const Dataset& dataset, SmtBackend& backend,
                              const FitOptions& opts = {});

struct VerifyResult {
  bool keep = false;
  std::string reason;
};

/// Prunes unsatisfiable bodies, overly specific rules and rules scoring below
/// theta.
VerifyResult verify(const ScoredRule& rule, const Dataset& dataset, SmtBackend& backend,
                    double theta = kScoreThreshold, double timeout = 10);

/// Body satisfiability with the parameters fixed: a data witness if any
/// example is covered, otherwise a solver query over free measurements.
SolveStatus body_satisfiable(const ScoredRule& rule, const Dataset& dataset, SmtBackend& backend, double timeout);

/// Attributes measured on the objects at head position `pos` of the examples.
std::vector<std::string> head_attributes(const Dataset& d, int pos);

/// Step 1a: half-planes over attribute pairs (and triples when include_3d).
std::vector<ScoredRule> learn_arithmetic_relations(const Dataset& dataset, SmtBackend& backend, double timeout,
                                                   bool include_3d = false, int literal_budget = 3);
/// Step 1a: one interval per attribute.
std::vector<ScoredRule> learn_range_relations(const Dataset& dataset, SmtBackend& backend, double timeout,
                                              int literal_budget = 3);

/// Inputs for acceptability_check: measurements pinned by equalities in B,
/// one indicator e_k in [0,1] per example with h tying e_k >= 1 to coverage.
struct AcceptabilityInputs {
  std::vector<VarDecl> decls;
  Formula background;
  Formula rule;
  std::vector<LabeledFormula> positives;
  std::vector<LabeledFormula> negatives;
};
AcceptabilityInputs acceptability_inputs(const ScoredRule& rule, const Dataset& dataset);

// Text forms ----------------------------------------------------------------

Literal parse_literal(std::string_view text);
/// `head ← lit, lit` (also accepts `:-`).
Clause parse_clause(std::string_view text, int literal_budget = 0);
/// Inverse of ScoredRule::to_string; stats are left zero.
ScoredRule parse_rule(std::string_view line);

struct RuleFile {
  std::vector<DerivedPredicate> definitions;
  std::vector<ScoredRule> rules;
};
std::string serialize_rules(const RuleFile& f);
RuleFile parse_rules(std::string_view text);

std::string format_param(double v);  // 12 significant digits

}  // namespace smtilp
