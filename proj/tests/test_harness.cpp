#include <cmath>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "smtilp/dataset_io.hpp"
#include "smtilp/harness.hpp"

using namespace smtilp;

TEST_CASE("suite configuration from JSON") {
  SuiteConfig c = parse_suite_config(R"({"backend": "external", "base_seed": 5, "trials": {"geometry0": 3},
                                          "timeout": {"geometry0": 12.5}, "workers": 2})");
  CHECK(c.backend == BackendKind::External);
  CHECK(c.base_seed == 5);
  CHECK(c.workers == 2);
  CHECK(c.trials_for(get_task("interval")) == 3);
  CHECK(c.timeout_for(get_task("interval")) == 12.5);
  CHECK(c.budget_for(get_task("interval")) == 3);
  CHECK(c.trials_for(get_task("in_circle")) == 5);
  CHECK(c.timeout_for(get_task("ip4_high_score")) == 180);
  CHECK(c.budget_for(get_task("ip2_active")) == 4);

  CHECK_THROWS_AS(parse_suite_config(R"({"bogus": 1})"), Error);
  CHECK_THROWS_AS(parse_suite_config(R"({"trials": {"geometry0": 0}})"), Error);
  CHECK_THROWS_AS(parse_suite_config("{not json"), Error);
}

TEST_CASE("ablation mode names") {
  for (AblationMode m : {AblationMode::Full, AblationMode::NoInvention, AblationMode::InventionOnly})
    CHECK(parse_mode(to_string(m)) == m);
  CHECK_FALSE(parse_mode("something"));
}

TEST_CASE("summary statistics in percent") {
  std::vector<ResultRecord> rs(3);
  double acc[] = {0.9, 1.0, 0.8};
  double t[] = {1, 2, 3};
  for (int i = 0; i < 3; ++i) {
    rs[i].task = "interval";
    rs[i].trial = i;
    rs[i].accuracy = acc[i];
    rs[i].wall_time_s = t[i];
  }
  TaskSummary s = summarize(rs);
  CHECK(s.trials == 3);
  CHECK(s.acc_mean == doctest::Approx(90));
  // sample deviation of {90, 100, 80}
  CHECK(s.acc_std == doctest::Approx(std::sqrt((0.0 + 100 + 100) / 2)));
  CHECK(s.time_mean == doctest::Approx(2));
}

TEST_CASE("results lines carry no timing") {
  ResultRecord r;
  r.task = "interval";
  r.trial = 1;
  r.seed = 1;
  r.accuracy = 0.95;
  r.wall_time_s = 3.25;
  r.n_rules = 1;
  std::string line = results_jsonl({r});
  auto j = nlohmann::json::parse(line.substr(0, line.find('\n')));
  CHECK(j.at("task") == "interval");
  CHECK(j.at("accuracy") == 0.95);
  CHECK(j.at("mode") == "full");
  CHECK_FALSE(j.contains("wall_time_s"));
  auto tj = nlohmann::json::parse(timings_jsonl({r}));
  CHECK(tj.at("wall_time_s") == 3.25);
}

TEST_CASE("table has one row per task") {
  TaskSummary a{"interval", AblationMode::Full, 10, 0, 91, 1, 1.5, 0.2, 0, 0};
  TaskSummary b{"halfplane", AblationMode::Full, 10, 0, 96, 2, 2.5, 0.3, 0, 0};
  std::string t = results_table({a, b});
  CHECK(t.find("interval") != std::string::npos);
  CHECK(t.find("halfplane") != std::string::npos);
  CHECK(t.find("91") != std::string::npos);
}

TEST_CASE("median influence over training heads") {
  Dataset d = parse_dataset(
      "measure a max_influence 1\nmeasure b max_influence 4\nmeasure c max_influence 9\nmeasure z max_influence 100\n"
      "example e1 pos active(a)\nexample e2 neg active(b)\nexample e3 neg active(c)\n");
  CHECK(median_max_influence(d) == 4);
}

TEST_CASE("rules evaluate on a dataset with their definitions") {
  Dataset d = parse_dataset(
      "fact e(a,b)\nfact e(b,c)\nfact e(c,a)\nfact e(d,b)\n"
      "example e1 pos active(a)\nexample e2 neg active(d)\n");
  RuleFile f = parse_rules(
      "define inv_reach2: inv_reach2(A,C) ← e(A,B), e(B,C) {}\n"
      "rule 0.9 structured: active(A) ← inv_reach2(A,C), e(C,A) {}\n");
  std::vector<Prediction> preds;
  CHECK(evaluate_rules(f, d, &preds) == 1.0);
  CHECK(preds.size() == 2);
}

TEST_CASE("a short trial is reproducible") {
  SuiteConfig cfg;
  cfg.n_examples = 60;
  ResultRecord a = run_trial("interval", 0, cfg);
  ResultRecord b = run_trial("interval", 0, cfg);
  CHECK_FALSE(a.failed);
  CHECK(a.seed == cfg.base_seed);
  CHECK(results_jsonl({a}) == results_jsonl({b}));
  CHECK(a.rules_text == b.rules_text);
  ResultRecord c = run_trial("interval", 1, cfg);
  CHECK(c.seed == cfg.base_seed + 1);
}
