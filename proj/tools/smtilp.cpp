// smtilp command-line front end.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "smtilp/benchmarks.hpp"
#include "smtilp/dataset_io.hpp"
#include "smtilp/harness.hpp"

using namespace smtilp;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Common {
  std::string config;
  std::string backend;
  std::string out;
  int workers = 0;
  long long seed = -1;
  int trials = 0;
  int n = 0;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "JSON suite configuration");
    app->add_option("--backend", backend, "builtin or external")->check(CLI::IsMember({"builtin", "external"}));
    app->add_option("--out", out, "output directory");
    app->add_option("--workers", workers, "parallel trials")->check(CLI::PositiveNumber);
    app->add_option("--seed", seed, "base seed")->check(CLI::NonNegativeNumber);
    app->add_option("--trials", trials, "trials per task")->check(CLI::PositiveNumber);
    app->add_option("--n", n, "examples per task")->check(CLI::PositiveNumber);
  }

  SuiteConfig make() const {
    SuiteConfig c = config.empty() ? SuiteConfig{} : load_suite_config(config);
    if (backend == "builtin") c.backend = BackendKind::Builtin;
    if (backend == "external") c.backend = BackendKind::External;
    if (!out.empty()) c.output_dir = out;
    if (workers > 0) c.workers = workers;
    if (seed >= 0) c.base_seed = static_cast<uint64_t>(seed);
    if (trials > 0) c.trials_override = trials;
    if (n > 0) c.n_examples = n;
    c.validate();
    return c;
  }
};

int cmd_gen(const std::string& task, long long seed, int n, const std::string& out) {
  TaskSpec spec;
  spec.task = task;
  spec.seed = seed < 0 ? 0 : static_cast<uint64_t>(seed);
  spec.n_examples = n;
  GeneratedTask g = generate(spec);
  std::filesystem::create_directories(out);
  std::string base = (std::filesystem::path(out) / task).string();
  save_dataset(g.all, base + ".facts");
  std::ofstream(base + ".manifest") << manifest_text(g);
  std::cout << "wrote " << base << ".facts (" << g.all.size() << " examples) and " << base << ".manifest\n";
  return 0;
}

int cmd_learn(const std::string& task, const SuiteConfig& cfg) {
  auto records = run_task(task, cfg);
  int failed = 0;
  for (const auto& r : records) {
    if (r.failed) {
      ++failed;
      std::printf("trial %d (seed %llu): failed: %s\n", r.trial, static_cast<unsigned long long>(r.seed),
                  r.error.c_str());
      continue;
    }
    std::printf("trial %d (seed %llu): accuracy %.2f%%, %.2fs, %zu rules%s\n", r.trial,
                static_cast<unsigned long long>(r.seed), 100 * r.accuracy, r.wall_time_s, r.n_rules,
                r.hit_time_budget ? " (time budget hit)" : "");
    std::fputs(r.rules_text.c_str(), stdout);
  }
  std::fputs(results_table({summarize(records)}).c_str(), stdout);
  return failed == static_cast<int>(records.size()) ? 1 : 0;
}

int cmd_eval(const std::string& rules_path, const std::string& data_path) {
  RuleFile rules = parse_rules(read_file(rules_path));
  Dataset d = load_dataset(data_path);
  std::vector<Prediction> preds;
  double acc = evaluate_rules(rules, d, &preds);
  size_t tp = 0, fp = 0, fn = 0, tn = 0;
  for (const auto& p : preds) {
    tp += p.label && p.predicted;
    fp += !p.label && p.predicted;
    fn += p.label && !p.predicted;
    tn += !p.label && !p.predicted;
  }
  std::printf("accuracy %.4f (tp %zu, fp %zu, fn %zu, tn %zu)\n", acc, tp, fp, fn, tn);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rule learning with numeric constraints fitted by an SMT back end"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen", "generate a benchmark dataset and its manifest");
  std::string gen_task, gen_out = ".";
  long long gen_seed = 0;
  int gen_n = 0;
  gen->add_option("task", gen_task, "task name")->required();
  gen->add_option("--seed", gen_seed, "seed")->check(CLI::NonNegativeNumber);
  gen->add_option("--n", gen_n, "number of examples")->check(CLI::PositiveNumber);
  gen->add_option("--out", gen_out, "output directory");

  auto* learn = app.add_subcommand("learn", "learn rules for one task over several trials");
  std::string learn_task;
  Common learn_opts;
  learn->add_option("task", learn_task, "task name")->required();
  learn_opts.attach(learn);

  auto* suite = app.add_subcommand("suite", "run every task of the given families");
  std::vector<std::string> families;
  Common suite_opts;
  suite->add_option("families", families, "geometry0 geometry1 geometry2 geometry3 ip");
  suite_opts.attach(suite);

  auto* ablate = app.add_subcommand("ablate-ip", "graph tasks without invention, invention only, and full");
  std::vector<std::string> ablate_tasks;
  Common ablate_opts;
  ablate->add_option("--tasks", ablate_tasks, "subset of graph tasks");
  ablate_opts.attach(ablate);

  auto* eval = app.add_subcommand("eval", "accuracy of a rule file on a dataset");
  std::string eval_rules, eval_data;
  eval->add_option("rules", eval_rules, "rule file")->required()->check(CLI::ExistingFile);
  eval->add_option("dataset", eval_data, "dataset file")->required()->check(CLI::ExistingFile);

  auto* list = app.add_subcommand("list", "list tasks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return cmd_gen(gen_task, gen_seed, gen_n, gen_out);
    if (*learn) return cmd_learn(learn_task, learn_opts.make());
    if (*suite) {
      std::vector<Family> fams;
      for (const auto& f : families) {
        auto p = parse_family(f);
        if (!p) throw Error("unknown family '" + f + "'");
        fams.push_back(*p);
      }
      SuiteConfig cfg = suite_opts.make();
      auto out = run_suite(fams, cfg);
      std::fputs(out.table.c_str(), stdout);
      std::printf("results in %s\n", cfg.output_dir.c_str());
      return 0;
    }
    if (*ablate) {
      SuiteConfig cfg = ablate_opts.make();
      auto out = run_ablation_ip(cfg, ablate_tasks);
      std::fputs(out.table.c_str(), stdout);
      std::printf("results in %s\n", cfg.output_dir.c_str());
      return 0;
    }
    if (*eval) return cmd_eval(eval_rules, eval_data);
    if (*list) {
      for (const auto& t : task_catalogue())
        std::printf("%-20s %-10s %s\n", t.name.c_str(), std::string(to_string(t.family)).c_str(), t.formula.c_str());
      return 0;
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
