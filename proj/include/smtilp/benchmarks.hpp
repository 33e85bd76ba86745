#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "smtilp/logic.hpp"
#include "smtilp/search.hpp"

namespace smtilp {

enum class Family { Geometry0, Geometry1, Geometry2, Geometry3, Ip };

std::string_view to_string(Family f);
std::optional<Family> parse_family(std::string_view s);

struct TaskInfo {
  std::string name;
  Family family;
  std::string head;        // head predicate
  int head_arity = 1;
  std::string formula;     // human-readable ground truth
  std::map<std::string, double> true_params;
};

const std::vector<TaskInfo>& task_catalogue();
const TaskInfo* find_task(std::string_view name);
const TaskInfo& get_task(std::string_view name);
std::vector<std::string> tasks_in(Family f);

struct TaskSpec {
  std::string task;
  int n_examples = 0;  // 0 = family default
  uint64_t seed = 0;
  double split_ratio = 0.7;
  double margin = 0.25;
};

struct GeneratedTask {
  TaskSpec spec;
  Dataset all;
  Dataset train;
  Dataset test;
  std::vector<std::string> train_ids, test_ids;
};

/// Deterministic in the spec. Throws Error for an unknown task or when
/// rejection sampling needs more than 10^6 draws.
GeneratedTask generate(const TaskSpec& spec);

/// Ground truth for the example's head objects. Throws Error when a needed
/// measurement is missing.
bool true_label(std::string_view task, const Example& ex, const Background& bg);

/// Signed boundary expression in distance-like units; positive on the
/// positive side. For graph tasks it is the distance of the deciding
/// attribute from its threshold (+inf when no threshold applies).
double boundary_value(std::string_view task, const Example& ex, const Background& bg);

/// Splits by id order; train takes floor(ratio * n).
void split_dataset(const Dataset& all, const std::vector<std::string>& order, double ratio, Dataset& train,
                   Dataset& test, std::vector<std::string>& train_ids, std::vector<std::string>& test_ids);

std::string manifest_text(const GeneratedTask& g);

/// Language bias used for the task.
LanguageBias task_bias(std::string_view task);

}  // namespace smtilp
