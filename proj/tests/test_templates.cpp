#include <cmath>
#include <random>

#include "doctest.h"
#include "smtilp/templates.hpp"

using namespace smtilp;

namespace {

bool eval(std::string_view id, const ParamAssignment& p, std::vector<double> args) {
  return evaluate(get_template(id), p, args);
}

}  // namespace

TEST_CASE("betweenness by the dot product") {
  CHECK(eval("between3pt", {}, {2, 0, 0, 0, 4, 0}));
  CHECK_FALSE(eval("between3pt", {}, {5, 0, 0, 0, 4, 0}));
  CHECK(eval("between3pt", {}, {0, 0, 0, 0, 4, 0}));  // endpoint
}

TEST_CASE("collinearity tolerance") {
  CHECK(eval("collinear3pt", {{"eps", 0.1}}, {2, 0, 0, 0, 4, 0}));
  // cross product of (2,1)-(0,0) with (4,0)-(0,0) is -4
  CHECK_FALSE(eval("collinear3pt", {{"eps", 0.5}}, {2, 1, 0, 0, 4, 0}));
  CHECK_THROWS_AS(eval("collinear3pt", {{"eps", 0.0}}, {2, 0, 0, 0, 4, 0}), Error);
}

TEST_CASE("templates agree with hand-written predicates on random points") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-8, 8);
  for (int i = 0; i < 500; ++i) {
    double x = u(rng), y = u(rng), z = u(rng);
    CHECK(eval("interval1d", {{"l", -1}, {"u", 2}}, {x}) == (-1 < x && x < 2));
    CHECK(eval("halfplane2d", {{"a", 1}, {"b", 2}, {"theta", 3}}, {x, y}) == (x + 2 * y <= 3));
    CHECK(eval("halfplane3d", {{"a", 1}, {"b", 2}, {"c", -1}, {"d", 2}}, {x, y, z}) == (x + 2 * y - z <= 2));
    CHECK(eval("circle", {{"r", 5}}, {x, y}) == (x * x + y * y <= 25));
    CHECK(eval("annulus", {{"rmin", 3}, {"rmax", 6}}, {x, y}) == (9 <= x * x + y * y && x * x + y * y <= 36));
    CHECK(eval("ellipse", {{"a", 7}, {"b", 4}}, {x, y}) == (x * x / 49 + y * y / 16 <= 1));
    CHECK(eval("hyperbola_side", {{"c", 4}}, {x, y}) == (x * x - y * y <= 4));
    CHECK(eval("product_threshold", {{"c", 6}}, {x, y}) == (x * y < 6));
    CHECK(eval("parabola", {{"a", 0.2}, {"b", 0}, {"c", -4}}, {x, y}) == (y >= 0.2 * x * x - 4));
    CHECK(eval("sinusoid", {{"omega", 1}, {"phi", 0.5}}, {x, y}) == (y >= std::sin(x) + 0.5));
    CHECK(eval("distance_threshold", {{"d", 5}}, {x, y, z, 0}) == ((x - z) * (x - z) + y * y <= 25));
    CHECK(eval("box2d", {{"xmin", -1}, {"xmax", 1}, {"ymin", -2}, {"ymax", 2}}, {x, y}) ==
          (-1 <= x && x <= 1 && -2 <= y && y <= 2));
    CHECK(eval("influence_threshold", {{"tau", 0.5}}, {x}) == (x > 0.5));
  }
}

TEST_CASE("theory classes follow the form") {
  CHECK(get_template("interval1d").theory == Theory::LRA);
  CHECK(get_template("halfplane3d").theory == Theory::LRA);
  CHECK(get_template("varcmp_lt").theory == Theory::LRA);
  CHECK(get_template("circle").theory == Theory::NRA);
  CHECK(get_template("collinear3pt").theory == Theory::NRA);
  CHECK(get_template("sinusoid").theory == Theory::NRA);
}

TEST_CASE("bad inputs") {
  CHECK_THROWS_AS(eval("interval1d", {{"l", 0}}, {1}), Error);
  CHECK_THROWS_AS(eval("interval1d", {{"l", 0}, {"u", 1}}, {1, 2}), Error);
  CHECK_THROWS_AS(eval("interval1d", {{"l", 0}, {"u", 1}}, {NAN}), EvalError);
  CHECK_THROWS_AS(eval("interval1d", {{"l", -200}, {"u", 1}}, {0}), Error);
  CHECK_THROWS_AS(get_template("nonexistent"), Error);
}

TEST_CASE("encoding an interval over a concrete point") {
  const auto& t = get_template("interval1d");
  std::vector<Formula> args{Formula::constant(3.2)};
  Formula f = encode(t, args, {{"l", ParamBinding::sym("l")}, {"u", ParamBinding::sym("u")}});
  CHECK(variables(f) == std::set<std::string>{"l", "u"});
  // compare with (l < 3.2) and (3.2 < u) and both within [-100, 100]
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-150, 150);
  for (int i = 0; i < 400; ++i) {
    double l = u(rng), h = u(rng);
    if (i % 4 == 0) l = 3.2 - std::fabs(l) / 100;
    if (i % 4 == 1) h = 3.2 + std::fabs(h) / 100;
    bool expect = l < 3.2 && 3.2 < h && -100 <= l && l <= 100 && -100 <= h && h <= 100;
    CHECK(eval_bool(f, env_from({{"l", l}, {"u", h}})) == expect);
  }
  Formula fixed = encode(t, args, {{"l", ParamBinding::fixed(0)}, {"u", ParamBinding::fixed(5)}});
  CHECK(fixed.is_true());
}

TEST_CASE("every catalogue entry evaluates at its defaults") {
  for (const auto& t : catalogue()) {
    ParamAssignment p;
    for (const auto& s : t.params) p[s.name] = s.default_value;
    std::vector<double> args(t.arity, 0.5);
    CHECK_NOTHROW(evaluate(t, p, args));
  }
}
