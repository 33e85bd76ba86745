#pragma once

#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "smtilp/rules.hpp"
#include "smtilp/search.hpp"
#include "smtilp/smt.hpp"

namespace smtilp {

enum class Selection { TopK, GreedyCover };

/// Fixed parameters for a clause instead of solving (used by the PI-only
/// ablation). Returning nullopt falls back to solving.
using ParamPolicy = std::function<std::optional<ParamAssignment>(const Clause&, const Dataset&)>;

struct LoopConfig {
  double theta_conv = 0.01;
  int t_max = 10;
  int literal_budget = 3;
  double theta = kScoreThreshold;
  double time_budget = 0;       // seconds for the whole run, 0 = unlimited
  double solver_timeout = 10;   // per MaxSMT call
  bool predicate_invention = false;
  bool arithmetic_step = false;  // step 1a
  bool arithmetic_3d = false;
  Selection selection = Selection::GreedyCover;
  int top_k = 5;
  double background_precision = 0.8;
  int background_iterations = 3;  // additions only while t < this
  int max_background_additions = 2;  // per iteration, best scores first
  bool sequential_covering = true;
  bool partial_fit_retry = true;  // refit below-threshold rules with soft positives
  int workers = 1;
  ParamPolicy param_policy;

  void validate() const;
};

struct IterationLog {
  int t = 0;
  double quality = 0;
  double delta_q = 0;
  size_t candidates = 0;
  size_t validated = 0;
  int solver_calls = 0;
  double search_s = 0;
  double solve_s = 0;
  double wall_s = 0;
  std::vector<std::string> background_added;
};

struct LearnResult {
  std::vector<ScoredRule> final_rules;
  std::vector<ScoredRule> hypothesis;  // H before post-processing
  std::vector<IterationLog> log;
  std::vector<std::string> background_additions;
  std::vector<DerivedPredicate> definitions;  // invented and promoted predicates the rules may use
  std::map<std::string, int> prune_reasons;
  bool hit_time_budget = false;
};

using BackendFactory = std::function<std::unique_ptr<SmtBackend>()>;

LearnResult run_learning(const Dataset& dataset, LanguageBias bias, const LoopConfig& config,
                         const BackendFactory& backends);

/// Mean F1; 0 for no rules.
double quality(const std::vector<ScoredRule>& rules);

/// Duplicate, degenerate and contradiction removal, priority ordering, then
/// selection. Rule stats are recomputed on `dataset`.
std::vector<ScoredRule> post_process(std::vector<ScoredRule> rules, const Dataset& dataset, Selection selection,
                                     int top_k = 5);

/// Greedy cover: repeatedly takes the rule adding the most positives net of
/// newly covered negatives; ties go to the earlier rule. Returns indices.
std::vector<size_t> greedy_cover(const std::vector<Coverage>& cov);

bool is_degenerate(const ScoredRule& r);

Polarity predict(const std::vector<ScoredRule>& rules, const Example& example, const Background& background);

}  // namespace smtilp
