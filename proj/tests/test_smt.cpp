#include <algorithm>
#include <random>

#include "doctest.h"
#include "smtilp/smt.hpp"

using namespace smtilp;

namespace {

Formula V(const char* n) { return Formula::var(n); }
Formula K(double v) { return Formula::constant(v); }

std::vector<std::unique_ptr<SmtBackend>> backends() {
  std::vector<std::unique_ptr<SmtBackend>> out;
  out.push_back(std::make_unique<BuiltinBackend>());
  if (solver_available(default_solver_command())) out.push_back(std::make_unique<SmtLibBackend>());
  return out;
}

}  // namespace

TEST_CASE("radius squeezed between 24 and 25 is unsat") {
  // points at distance 5 and sqrt(24) must be inside and outside the circle
  Formula f = land({cmp(K(25), Comparator::Le, V("r") * V("r")), cmp(V("r") * V("r"), Comparator::Le, K(24))});
  for (auto& be : backends()) {
    SolveResult r = check_sat(*be, {{"r", 0, 100}}, f, 5);
    CHECK_MESSAGE(r.status == SolveStatus::Unsat, be->name());
  }
}

TEST_CASE("satisfiable queries come with a model that holds") {
  std::vector<VarDecl> d{{"x", -10, 10}, {"y", -10, 10}};
  Formula f = land({cmp(V("x") + V("y"), Comparator::Eq, K(3)), cmp(V("x"), Comparator::Gt, K(1.5))});
  for (auto& be : backends()) {
    SolveResult r = check_sat(*be, d, f, 5);
    REQUIRE_MESSAGE(r.status == SolveStatus::Sat, be->name());
    REQUIRE(r.model);
    CHECK(holds(f, *r.model, d));
  }
}

TEST_CASE("max-smt over two bounds") {
  MaxSmtInstance inst;
  inst.declarations = {{"l", -100, 100}, {"u", -100, 100}};
  inst.hard = {cmp(V("l"), Comparator::Lt, K(1)), cmp(V("l"), Comparator::Lt, K(2)),
               cmp(V("u"), Comparator::Gt, K(3))};
  inst.soft = {{cmp(V("l"), Comparator::Gt, K(0)), 1}, {cmp(V("u"), Comparator::Lt, K(5)), 1}};
  inst.timeout = 5;
  for (auto& be : backends()) {
    SolveResult r = solve_maxsmt(*be, inst);
    REQUIRE_MESSAGE(r.status == SolveStatus::Sat, be->name());
    REQUIRE(r.model);
    double l = r.model->at("l"), u = r.model->at("u");
    CHECK(0 < l);
    CHECK(l < 1);
    CHECK(3 < u);
    CHECK(u < 5);
    CHECK(*r.satisfied_soft_weight == doctest::Approx(2));
  }
}

TEST_CASE("soft weights trade against each other") {
  // x > 2 (weight 3) conflicts with x < 1 and x < 0 (weight 1 each)
  MaxSmtInstance inst;
  inst.declarations = {{"x", -10, 10}};
  inst.soft = {{cmp(V("x"), Comparator::Gt, K(2)), 3},
               {cmp(V("x"), Comparator::Lt, K(1)), 1},
               {cmp(V("x"), Comparator::Lt, K(0)), 1}};
  inst.timeout = 5;
  for (auto& be : backends()) {
    SolveResult r = solve_maxsmt(*be, inst);
    REQUIRE(r.model);
    CHECK_MESSAGE(r.model->at("x") > 2, be->name());
    CHECK(*r.satisfied_soft_weight == doctest::Approx(3));
  }
}

TEST_CASE("instance validation") {
  MaxSmtInstance inst;
  inst.declarations = {{"x"}};
  inst.hard = {cmp(V("y"), Comparator::Lt, K(0))};
  CHECK_THROWS_AS(inst.validate(), Error);
  inst.hard = {};
  inst.soft = {{cmp(V("x"), Comparator::Lt, K(0)), 0}};
  CHECK_THROWS_AS(inst.validate(), Error);
  inst.soft = {};
  inst.timeout = 0;
  CHECK_THROWS_AS(inst.validate(), Error);
}

TEST_CASE("model text parsing") {
  ParamAssignment m = parse_smtlib_model(
      "(\n  (define-fun l () Real\n    (- 1.5))\n  (define-fun u () Real\n    (/ 7.0 2.0))\n"
      "  (define-fun k () Real 3.0)\n  (define-fun n () Real (/ (- 1.0) 4.0))\n)");
  CHECK(m.at("l") == -1.5);
  CHECK(m.at("u") == 3.5);
  CHECK(m.at("k") == 3.0);
  CHECK(m.at("n") == -0.25);
}

TEST_CASE("scripts declare variables, bounds and soft constraints") {
  MaxSmtInstance inst;
  inst.declarations = {{"a", -1, 1}};
  inst.hard = {cmp(V("a"), Comparator::Le, K(0.5))};
  inst.soft = {{cmp(V("a"), Comparator::Gt, K(0)), 2}};
  std::string s = smtlib_script(inst, true, false);
  CHECK(s.find("(declare-const a Real)") != std::string::npos);
  CHECK(s.find("assert-soft") != std::string::npos);
  CHECK(s.find(":weight 2") != std::string::npos);
  std::string c = smtlib_script(inst, false, false);
  CHECK(c.find("assert-soft") == std::string::npos);
}

TEST_CASE("acceptability on a four-example toy set") {
  // e_k in [0,1] indicates coverage; x_k pinned in the background
  std::vector<VarDecl> decls;
  std::vector<Formula> bg, h;
  std::vector<LabeledFormula> pos, neg;
  double xs[] = {1, 2, 5, 6};
  for (int k = 0; k < 4; ++k) {
    std::string e = "e" + std::to_string(k), x = "x" + std::to_string(k);
    decls.push_back({e, 0, 1});
    decls.push_back({x});
    bg.push_back(cmp(V(x.c_str()), Comparator::Eq, K(xs[k])));
    Formula cover = cmp(V(x.c_str()), Comparator::Lt, K(3));
    Formula on = cmp(V(e.c_str()), Comparator::Ge, K(1));
    h.push_back(lor({land({on, cover}), land({lnot(on), lnot(cover)})}));
    (k < 2 ? pos : neg).push_back({e, on});
  }
  for (auto& be : backends()) {
    auto r = acceptability_check(*be, decls, land(bg), land(h), pos, neg, 5);
    CHECK_MESSAGE(r.verdict == AcceptabilityResult::Verdict::Accepted, be->name());
    // swap one label: the rule now misclassifies example 2
    std::vector<LabeledFormula> pos2 = pos, neg2 = {neg[1]};
    pos2.push_back(neg[0]);
    auto bad = acceptability_check(*be, decls, land(bg), land(h), pos2, neg2, 5);
    CHECK(bad.verdict == AcceptabilityResult::Verdict::Counterexample);
    CHECK(bad.example_id == "e2");
    CHECK(bad.positive);
  }
}

TEST_CASE("random one-dimensional max-smt against a boundary sweep") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-10, 10);
  BuiltinBackend be;
  for (int trial = 0; trial < 30; ++trial) {
    MaxSmtInstance inst;
    inst.declarations = {{"t", -20, 20}};
    std::vector<std::pair<Comparator, double>> cons;
    for (int i = 0; i < 8; ++i) {
      Comparator c = (rng() & 1) ? Comparator::Lt : Comparator::Gt;
      double v = std::round(u(rng) * 4) / 4;
      cons.push_back({c, v});
      inst.soft.push_back({cmp(V("t"), c, K(v)), 1.0 + double(rng() % 3)});
    }
    inst.timeout = 5;
    // the objective only changes at constraint constants; probe each piece
    std::vector<double> pts{-20, 20};
    for (auto& [c, v] : cons) pts.push_back(v);
    std::sort(pts.begin(), pts.end());
    std::vector<double> probes = pts;
    for (size_t i = 0; i + 1 < pts.size(); ++i) probes.push_back((pts[i] + pts[i + 1]) / 2);
    double best = 0;
    for (double t : probes) {
      double w = 0;
      for (size_t i = 0; i < cons.size(); ++i)
        if (compare(t, cons[i].first, cons[i].second)) w += inst.soft[i].weight;
      best = std::max(best, w);
    }
    SolveResult r = solve_maxsmt(be, inst);
    REQUIRE(r.satisfied_soft_weight);
    CHECK(*r.satisfied_soft_weight == doctest::Approx(best));
  }
}
