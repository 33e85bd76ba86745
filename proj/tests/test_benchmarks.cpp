#include <cmath>
#include <set>

#include "doctest.h"
#include "smtilp/benchmarks.hpp"
#include "smtilp/dataset_io.hpp"

using namespace smtilp;

namespace {

Dataset point(const char* head, double x, double y) {
  std::string t = "measure p x " + format_real(x) + "\nmeasure p y " + format_real(y) + "\nexample e1 pos " +
                  head + "(p)\n";
  return parse_dataset(t);
}

Dataset cycle(double mi_c, double score_c) {
  std::string t =
      "fact propagates(a,b)\nfact propagates(b,c)\nfact propagates(c,a)\n"
      "measure a max_influence 0.9\nmeasure b max_influence 2\nmeasure c max_influence " +
      format_real(mi_c) +
      "\n"
      "measure a score 10\nmeasure b score 20\nmeasure c score " +
      format_real(score_c) + "\nexample e1 pos active(a)\n";
  return parse_dataset(t);
}

}  // namespace

TEST_CASE("ring labels by radius") {
  Dataset in = point("target", 4.5 / std::sqrt(2.0), 4.5 / std::sqrt(2.0));
  CHECK(true_label("donut", in.positives[0], in.background));
  Dataset hole = point("target", 1, 0);
  CHECK_FALSE(true_label("donut", hole.positives[0], hole.background));
  Dataset out = point("target", 0, 7);
  CHECK_FALSE(true_label("donut", out.positives[0], out.background));
}

TEST_CASE("left-of on two points") {
  Dataset d = parse_dataset(
      "measure p x 1\nmeasure p y 0\nmeasure q x 2\nmeasure q y 0\n"
      "example e1 pos left_of(p,q)\nexample e2 neg left_of(q,p)\n");
  CHECK(true_label("left_of", d.positives[0], d.background));
  CHECK_FALSE(true_label("left_of", d.negatives[0], d.background));
}

TEST_CASE("triangle with a high-influence closer") {
  Dataset hi = cycle(3.0, 10);
  CHECK(true_label("ip3_active", hi.positives[0], hi.background));
  CHECK(true_label("ip3_threshold", hi.positives[0], hi.background));
  CHECK_FALSE(true_label("ip4_high_score", hi.positives[0], hi.background));
  Dataset lo = cycle(1.0, 70);
  CHECK_FALSE(true_label("ip3_threshold", lo.positives[0], lo.background));
  CHECK(true_label("ip4_high_score", lo.positives[0], lo.background));
}

TEST_CASE("missing measurements are an error") {
  Dataset d = parse_dataset("measure p x 1\nexample e1 pos target(p)\n");
  CHECK_THROWS_AS(true_label("in_circle", d.positives[0], d.background), Error);
}

TEST_CASE("generated labels and margins hold for every task") {
  for (const auto& info : task_catalogue()) {
    TaskSpec spec;
    spec.task = info.name;
    spec.seed = 3;
    spec.n_examples = info.family == Family::Ip ? 60 : 80;
    GeneratedTask g = generate(spec);
    CHECK(g.all.size() == static_cast<size_t>(spec.n_examples));
    CHECK(g.all.positives.size() == static_cast<size_t>(spec.n_examples / 2));
    for (const auto* list : {&g.all.positives, &g.all.negatives}) {
      for (const auto& e : *list) {
        CHECK_MESSAGE(true_label(info.name, e, g.all.background) == e.positive(), info.name << " " << e.id);
        double b = boundary_value(info.name, e, g.all.background);
        CHECK_MESSAGE(std::fabs(b) >= spec.margin, info.name << " " << e.id);
        CHECK((b > 0) == e.positive());
      }
    }
  }
}

TEST_CASE("generation is a function of the seed") {
  TaskSpec spec;
  spec.task = "halfplane";
  spec.seed = 9;
  CHECK(serialize_dataset(generate(spec).all) == serialize_dataset(generate(spec).all));
  TaskSpec other = spec;
  other.seed = 10;
  CHECK(serialize_dataset(generate(spec).all) != serialize_dataset(generate(other).all));
}

TEST_CASE("split sizes and disjointness") {
  TaskSpec spec;
  spec.task = "in_circle";
  spec.n_examples = 101;
  GeneratedTask g = generate(spec);
  CHECK(g.train.size() == 70);
  CHECK(g.test.size() == 31);
  std::set<std::string> ids(g.train_ids.begin(), g.train_ids.end());
  for (const auto& id : g.test_ids) CHECK(ids.count(id) == 0);
  CHECK(ids.size() + g.test_ids.size() == 101);
}

TEST_CASE("catalogue lookups") {
  CHECK(tasks_in(Family::Geometry0).size() == 2);
  CHECK(tasks_in(Family::Geometry1).size() == 4);
  CHECK(tasks_in(Family::Ip).size() == 5);
  CHECK(find_task("no_such_task") == nullptr);
  TaskSpec spec;
  spec.task = "no_such_task";
  CHECK_THROWS_AS(generate(spec), Error);
  CHECK(parse_family("geometry2") == Family::Geometry2);
  CHECK_FALSE(parse_family("geometry9"));
  CHECK(get_task("in_circle").true_params.at("r") == 5);
}

TEST_CASE("every task has a usable bias") {
  for (const auto& info : task_catalogue()) {
    LanguageBias b = task_bias(info.name);
    CHECK_NOTHROW(b.validate());
    CHECK(b.head_predicate == info.head);
    CHECK(static_cast<int>(b.head_types.size()) == info.head_arity);
  }
}
