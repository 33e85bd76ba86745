#include <cmath>
#include <random>

#include "doctest.h"
#include "smtilp/formula.hpp"

using namespace smtilp;

namespace {

Formula X() { return Formula::var("x"); }
Formula Y() { return Formula::var("y"); }
Formula K(double v) { return Formula::constant(v); }

}  // namespace

TEST_CASE("terms evaluate like the same arithmetic written directly") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-10, 10);
  Formula t = (X() * K(3) - Y()) / (abs(Y()) + K(1)) + sin(X());
  for (int i = 0; i < 200; ++i) {
    double x = u(rng), y = u(rng);
    double expect = (x * 3 - y) / (std::fabs(y) + 1) + std::sin(x);
    double got = eval_term(t, env_from({{"x", x}, {"y", y}}));
    CHECK(got == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("division by zero and unknown variables are reported") {
  CHECK_THROWS_AS(eval_term(X() / Y(), env_from({{"x", 1}, {"y", 0}})), EvalError);
  CHECK_THROWS(eval_term(X() + Y(), env_from({{"x", 1}})));
}

TEST_CASE("order comparators and their negations partition the reals") {
  for (Comparator c : kAllComparators) {
    for (double a : {-1.0, 0.0, 2.5})
      for (double b : {-1.0, 0.0, 2.5})
        if (c != Comparator::Eq) CHECK(compare(a, c, b) != compare(a, negate(c), b));
    auto back = parse_comparator(to_string(c));
    REQUIRE(back);
    CHECK(*back == c);
  }
}

TEST_CASE("folding keeps the truth value") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-5, 5);
  Formula f = lor({land({cmp(X() + K(2) * K(3), Comparator::Lt, Y()), Formula::truth(true)}),
                   land({lnot(cmp(K(1), Comparator::Gt, K(2))), cmp(X() * K(0), Comparator::Le, Y())})});
  Formula g = fold(f);
  for (int i = 0; i < 300; ++i) {
    auto env = env_from({{"x", u(rng)}, {"y", u(rng)}});
    CHECK(eval_bool(f, env) == eval_bool(g, env));
  }
  CHECK(fold(cmp(K(1), Comparator::Lt, K(2))).is_true());
  CHECK(fold(land({Formula::truth(false), cmp(X(), Comparator::Lt, Y())})).is_false());
}

TEST_CASE("affine forms recover coefficients") {
  auto a = affine(K(2) * X() - Y() * K(0.5) + K(4));
  REQUIRE(a);
  CHECK(a->constant == doctest::Approx(4));
  CHECK(a->coeffs.at("x") == doctest::Approx(2));
  CHECK(a->coeffs.at("y") == doctest::Approx(-0.5));
  CHECK_FALSE(affine(X() * Y()));
  CHECK_FALSE(affine(sin(X())));
}

TEST_CASE("substitution and variable sets") {
  Formula f = cmp(X() + Y(), Comparator::Le, K(1));
  CHECK(variables(f) == std::set<std::string>{"x", "y"});
  Formula g = substitute(f, {{"y", K(0.25)}});
  CHECK(variables(g) == std::set<std::string>{"x"});
  CHECK(eval_bool(g, env_from({{"x", 0.75}})));
  CHECK_FALSE(eval_bool(g, env_from({{"x", 0.76}})));
  CHECK(contains_sin(land({f, cmp(sin(X()), Comparator::Lt, K(0))})));
  CHECK_FALSE(contains_sin(f));
}

TEST_CASE("SMT-LIB text uses prefix syntax and exact negative numbers") {
  CHECK(smtlib_number(-2.5) == "(- 2.5)");
  std::string s = to_smtlib(cmp(X() * K(2), Comparator::Lt, Y()));
  CHECK(s.find("(< (* x 2") == 0);
}

TEST_CASE("deeply nested formulas are rejected") {
  Formula f = X();
  auto build = [&] {
    for (int i = 0; i < kMaxFormulaDepth + 2; ++i) f = f + K(1);
  };
  CHECK_THROWS_AS(build(), Error);
}
