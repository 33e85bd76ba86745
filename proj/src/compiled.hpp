#pragma once

// Flat, index-based form of a MaxSMT instance used by the built-in fitter.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "smtilp/smt.hpp"

namespace smtilp::detail {

/// Postfix program over variable indices computing a real term.
class CompiledTerm {
 public:
  enum class Code : uint8_t { Var, Const, Add, Sub, Mul, Div, Neg, Abs, Sin };
  struct Instr {
    Code code;
    int index = 0;
    double value = 0.0;
  };

  static CompiledTerm compile(const Formula& term, const std::unordered_map<std::string, int>& vars);
  double eval(std::span<const double> x) const;  // NaN on division by zero

 private:
  std::vector<Instr> prog_;
};

/// `diff cmp 0` where diff = lhs - rhs.
struct Atom {
  CompiledTerm diff;
  Comparator cmp = Comparator::Lt;
  bool affine = false;
  std::vector<double> coeffs;  // when affine
  double offset = 0.0;         // when affine

  double value(std::span<const double> x) const;
  bool truth(double v) const;
};

/// Boolean program over atom truth values.
class BoolProgram {
 public:
  enum class Code : uint8_t { Atom, And, Or, Not, True, False };
  struct Instr {
    Code code;
    int arg = 0;  // atom index or child count
  };
  bool eval(std::span<const uint8_t> truth) const;
  std::vector<Instr> prog;
  std::vector<int> atoms;  // distinct atoms referenced
};

struct Problem {
  std::vector<VarDecl> vars;
  std::vector<double> lo, hi;  // effective closed bounds
  std::vector<Atom> atoms;
  std::vector<BoolProgram> hard;
  std::vector<BoolProgram> soft;
  std::vector<double> weights;
  std::vector<std::vector<int>> atom_users;  // atom -> formula ids (hard: i, soft: hard.size()+i)

  static Problem build(const MaxSmtInstance& inst);
  size_t dim() const { return vars.size(); }
  bool all_affine() const;
  double total_weight() const;
};

struct Objective {
  int violations = 0;
  double soft = 0.0;
  bool better_than(const Objective& o) const {
    if (violations != o.violations) return violations < o.violations;
    return soft > o.soft + 1e-12;
  }
  bool same_as(const Objective& o) const {
    return violations == o.violations && std::abs(soft - o.soft) <= 1e-12;
  }
};

/// Full evaluation; atom truths are written to `truth` (size atoms.size()).
/// With `cutoff_violations` >= 0, returns early once violations exceed it.
Objective evaluate(const Problem& p, std::span<const double> x, std::vector<uint8_t>& truth,
                   int cutoff_violations = -1);

}  // namespace smtilp::detail
