#include <algorithm>
#include <set>

#include "doctest.h"
#include "smtilp/dataset_io.hpp"
#include "smtilp/logic.hpp"
#include "smtilp/rules.hpp"

using namespace smtilp;

namespace {

Dataset chain_data() {
  return parse_dataset(
      "fact edge(a,b)\n"
      "fact edge(b,c)\n"
      "fact edge(c,d)\n"
      "fact edge(b,e)\n"
      "measure a x 1.0\n"
      "measure b x 2.0\n"
      "measure c x 3.0\n"
      "example e1 pos active(a)\n"
      "example e2 neg active(d)\n");
}

// every pair of edge facts joined on the shared middle object
std::set<Binding> brute_force_paths(const Background& bg, const std::string& start) {
  std::set<Binding> out;
  for (const auto& f1 : bg.facts())
    for (const auto& f2 : bg.facts())
      if (f1.predicate == "edge" && f2.predicate == "edge" && f1.objects[0] == start &&
          f1.objects[1] == f2.objects[0])
        out.insert({{"A", f1.objects[0]}, {"B", f1.objects[1]}, {"C", f2.objects[1]}});
  return out;
}

}  // namespace

TEST_CASE("two-hop grounding matches a join over all fact pairs") {
  Dataset d = chain_data();
  Clause c = parse_clause("active(A) :- edge(A,B), edge(B,C)", 2);
  for (const auto* list : {&d.positives, &d.negatives}) {
    for (const auto& e : *list) {
      auto got = ground_clause(c, e, d.background);
      std::set<Binding> got_set(got.begin(), got.end());
      CHECK(got_set == brute_force_paths(d.background, e.head->objects[0]));
    }
  }
  auto a = ground_clause(c, d.positives[0], d.background);
  CHECK(a.size() == 2);  // a-b-c and a-b-e
}

TEST_CASE("unknown predicates are named in the error") {
  Dataset d = chain_data();
  Clause c = parse_clause("active(A) :- link(A,B)", 1);
  CHECK_THROWS_WITH_AS(ground_clause(c, d.positives[0], d.background), doctest::Contains("link"), Error);
}

TEST_CASE("coverage needs one binding satisfying every numeric literal") {
  Dataset d = chain_data();
  Clause c = parse_clause("active(A) :- edge(A,B), x(A) < x(B)", 2);
  CHECK(covers(c, {}, d.positives[0], d.background));
  Clause rev = parse_clause("active(A) :- edge(A,B), x(B) < x(A)", 2);
  CHECK_FALSE(covers(rev, {}, d.positives[0], d.background));
  // no x measured for d
  CHECK_FALSE(covers(c, {}, d.negatives[0], d.background));
}

TEST_CASE("clause diagnostics") {
  Clause ok = parse_clause("p(A) :- q(A,B), r(B)", 2);
  CHECK(clause_check(ok).empty());

  Clause big = parse_clause("p(A) :- q(A,B), q(B,C), q(C,D), q(D,E), q(E,F), q(F,G), q(G,H)");
  big.literal_budget = 6;  // parsing widens the budget to fit the body
  auto v = clause_check(big);
  REQUIRE_FALSE(v.empty());
  CHECK(std::any_of(v.begin(), v.end(), [](const ClauseViolation& x) { return x.kind == "budget exceeded"; }));

  Clause unbound = parse_clause("p(A,B) :- q(A,C)", 2);
  auto u = clause_check(unbound);
  CHECK(std::any_of(u.begin(), u.end(), [](const ClauseViolation& x) { return x.kind == "unbound head variable"; }));
}

TEST_CASE("variants share a canonical key") {
  Clause a = parse_clause("p(A) :- q(A,B), r(B)", 2);
  Clause b = parse_clause("p(A) :- r(Z), q(A,Z)", 2);
  Clause c = parse_clause("p(A) :- q(B,A), r(B)", 2);
  CHECK(canonical_key(a) == canonical_key(b));
  CHECK(canonical_key(a) != canonical_key(c));

  Clause s1 = parse_clause("p(A) :- interval1d<p3>(x(A)), interval1d<p0>(y(A))", 2);
  Clause s2 = parse_clause("p(A) :- interval1d<p0>(x(A)), interval1d<p1>(y(A))", 2);
  CHECK(canonical_key(s1) == canonical_key(s2));
}

TEST_CASE("clause text round-trips") {
  for (const char* text : {"p(A) :- q(A,B), x(A) <= y(B)", "p(A,B) :- distance_threshold<p0>(x(A),y(A),x(B),y(B))",
                           "p(A) :- interval1d<p0>(x(A)), q(A,c1)"}) {
    Clause c = parse_clause(text, 3);
    CHECK(parse_clause(c.to_string(), 3) == c);
  }
  CHECK_THROWS_AS(parse_clause("p(A) :- q(A", 1), Error);
}

TEST_CASE("dataset text round-trips exactly") {
  Dataset d = parse_dataset(
      "# comment\n"
      "fact edge(a,b)\n"
      "measure a x 0.1\n"
      "measure b x -3.3333333333333335\n"
      "example e1 pos active(a)\n"
      "example e2 neg active(b)\n");
  Dataset back = parse_dataset(serialize_dataset(d));
  CHECK(back.positives.size() == 1);
  CHECK(back.negatives.size() == 1);
  CHECK(back.background.facts() == d.background.facts());
  CHECK(*back.background.measurement("b", "x") == -3.3333333333333335);
  CHECK(*back.background.measurement("a", "x") == 0.1);
  CHECK_THROWS_AS(parse_dataset("measure a x notanumber\n"), Error);
  CHECK_THROWS_AS(parse_dataset("example e1 maybe p(a)\n"), Error);
}

TEST_CASE("conflicting arities and labels are rejected") {
  Background bg;
  bg.add_fact({"edge", {"a", "b"}});
  CHECK_THROWS_AS(bg.add_fact({"edge", {"a"}}), Error);

  Dataset d = parse_dataset("example e1 pos p(a)\nexample e2 neg p(b)\n");
  d.negatives.push_back(d.positives[0]);
  d.negatives.back().polarity = Polarity::Negative;
  CHECK_THROWS_AS(d.validate(), Error);
}

TEST_CASE("derived predicates evaluate through their definitions") {
  Dataset d = chain_data();
  DerivedPredicate def{"reach2", parse_clause("reach2(A,C) :- edge(A,B), edge(B,C)", 2), {}};
  d.background.add_derived(def);
  Clause c = parse_clause("active(A) :- reach2(A,C), x(C) > x(A)", 2);
  CHECK(covers(c, {}, d.positives[0], d.background));
  Clause none = parse_clause("active(A) :- reach2(A,C)", 1);
  CHECK_FALSE(covers(none, {}, d.negatives[0], d.background));
  // a copy with an extra fact sees it
  Background bg2 = d.background;
  bg2.add_fact({"edge", {"d", "a"}});
  bg2.add_fact({"edge", {"a", "x1"}});
  CHECK(covers(none, {}, d.negatives[0], bg2));
  CHECK_FALSE(covers(none, {}, d.negatives[0], d.background));
}
