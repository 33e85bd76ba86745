#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "smtilp/benchmarks.hpp"
#include "smtilp/loop.hpp"
#include "smtilp/smt.hpp"

namespace smtilp {

enum class AblationMode { Full, NoInvention, InventionOnly };
std::string_view to_string(AblationMode m);  // "full", "no_pi", "pi_only"
std::optional<AblationMode> parse_mode(std::string_view s);

struct SuiteConfig {
  std::map<std::string, int> literal_budget{
      {"geometry0", 3}, {"geometry1", 6}, {"geometry2", 5}, {"geometry3", 6}, {"ip", 4}};
  std::map<std::string, double> timeout{
      {"geometry0", 45}, {"geometry1", 120}, {"geometry2", 30}, {"geometry3", 60}};
  std::map<std::string, double> ip_timeout{{"ip1_active", 30},
                                           {"ip2_active", 60},
                                           {"ip3_active", 120},
                                           {"ip3_threshold", 120},
                                           {"ip4_high_score", 180}};
  std::map<std::string, int> trials{
      {"geometry0", 10}, {"geometry1", 10}, {"geometry2", 5}, {"geometry3", 5}, {"ip", 5}};
  BackendKind backend = BackendKind::Builtin;
  std::string solver_command;  // empty: SMTILP_SOLVER_CMD or "z3 -in"
  std::string output_dir = "results";
  uint64_t base_seed = 0;
  int workers = 1;             // trials run in parallel
  int n_examples = 0;          // 0: family default
  double solver_timeout = 10;  // per solver call
  int trials_override = 0;     // >0 replaces the per-family trial count

  /// Throws Error on non-positive budgets, timeouts or trial counts.
  void validate() const;
  int budget_for(const TaskInfo& t) const;
  double timeout_for(const TaskInfo& t) const;
  int trials_for(const TaskInfo& t) const;
};

/// Reads a JSON object; unknown keys are an error. Missing keys keep defaults.
SuiteConfig load_suite_config(const std::string& path);
SuiteConfig parse_suite_config(const std::string& json_text);

struct Prediction {
  std::string example_id;
  bool label = false;
  bool predicted = false;
};

struct ResultRecord {
  std::string task;
  int trial = 0;
  uint64_t seed = 0;
  double accuracy = 0;
  double wall_time_s = 0;
  double search_s = 0;
  double solve_s = 0;
  size_t n_rules = 0;
  AblationMode mode = AblationMode::Full;
  bool failed = false;
  bool hit_time_budget = false;
  std::string error;
  std::string rules_text;
  std::vector<Prediction> predictions;
  LearnResult learn;  // empty for failed trials
};

/// Loop settings for a task under a mode.
LoopConfig loop_config_for(const TaskInfo& t, const SuiteConfig& cfg, AblationMode mode);
BackendFactory backend_factory(const SuiteConfig& cfg, uint64_t seed);

/// Median of max_influence over the training heads, the frozen threshold of
/// the invention-only mode.
double median_max_influence(const Dataset& train);

ResultRecord run_trial(const std::string& task, int trial, const SuiteConfig& cfg,
                       AblationMode mode = AblationMode::Full);
/// All trials of a task; a failing trial is recorded, not thrown.
std::vector<ResultRecord> run_task(const std::string& task, const SuiteConfig& cfg,
                                   AblationMode mode = AblationMode::Full);

/// Accuracy of rules on a dataset; definitions are added to its background.
double evaluate_rules(const RuleFile& rules, const Dataset& d, std::vector<Prediction>* predictions = nullptr);

struct TaskSummary {
  std::string task;
  AblationMode mode = AblationMode::Full;
  int trials = 0, failed = 0;
  double acc_mean = 0, acc_std = 0;  // percent
  double time_mean = 0, time_std = 0;
  double search_mean = 0, solve_mean = 0;
};

TaskSummary summarize(const std::vector<ResultRecord>& records);

/// One JSON object per line: task, trial, seed, accuracy, n_rules, mode
/// (the byte-reproducible part).
std::string results_jsonl(const std::vector<ResultRecord>& records);
/// task, trial, mode, wall_time_s, search_s, solve_s.
std::string timings_jsonl(const std::vector<ResultRecord>& records);
std::string predictions_jsonl(const std::vector<ResultRecord>& records);
std::string results_table(const std::vector<TaskSummary>& rows);
std::string ablation_table(const std::vector<TaskSummary>& rows);

struct SuiteOutput {
  std::vector<ResultRecord> records;
  std::vector<TaskSummary> summaries;
  std::string table;
};

/// Runs every task of the families and writes results.jsonl, timings.jsonl,
/// predictions.jsonl, table.txt, run.log and per-trial rule files into the
/// output directory.
SuiteOutput run_suite(const std::vector<Family>& families, const SuiteConfig& cfg);
/// Three modes per graph task; writes the same files plus ablation.txt.
SuiteOutput run_ablation_ip(const SuiteConfig& cfg, const std::vector<std::string>& tasks = {});

}  // namespace smtilp
