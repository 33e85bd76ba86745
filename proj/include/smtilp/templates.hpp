#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "smtilp/formula.hpp"

namespace smtilp {

enum class Theory { LRA, NRA };
std::string_view to_string(Theory t);

using ParamAssignment = std::map<std::string, double>;

struct ParamSpec {
  std::string name;
  double lo = -100.0;
  double hi = 100.0;
  bool lo_open = false;  // lower bound excluded, e.g. collinearity tolerance in (0, 0.5]
  double default_value = 0.0;

  bool contains(double v) const { return (lo_open ? v > lo : v >= lo) && v <= hi; }
};

/// A parametric numeric literal family. `form` is a boolean formula over the
/// placeholder variables `arg0..arg{arity-1}` and the parameter names.
struct ConstraintTemplate {
  std::string id;
  int arity = 0;
  std::vector<ParamSpec> params;
  Theory theory = Theory::LRA;
  Formula form;
  std::string description;

  const ParamSpec* param(std::string_view name) const;
};

std::string arg_placeholder(int i);

/// Theory implied by the form: NRA iff it multiplies/divides argument
/// terms together, or uses abs or sin.
Theory infer_theory(const Formula& form);

const std::vector<ConstraintTemplate>& catalogue();
const ConstraintTemplate* find_template(std::string_view id);
const ConstraintTemplate& get_template(std::string_view id);

/// Template id realizing a variable/variable comparison.
std::string varcmp_id(Comparator c);

/// Concrete semantics. Throws EvalError on non-finite input or a zero divisor,
/// Error on arity mismatch or missing/out-of-bounds parameters.
bool evaluate(const ConstraintTemplate& t, const ParamAssignment& params, std::span<const double> args);

/// A parameter bound either to a symbolic SMT variable or a concrete value.
struct ParamBinding {
  bool symbolic = false;
  std::string var;  // symbolic
  double value = 0.0;

  static ParamBinding sym(std::string name) { return {true, std::move(name), 0.0}; }
  static ParamBinding fixed(double v) { return {false, {}, v}; }
};

/// Constant-folded formula equivalent to the template's form over the given
/// arguments, conjoined with bound constraints for every symbolic parameter.
Formula encode(const ConstraintTemplate& t, std::span<const Formula> args,
               const std::map<std::string, ParamBinding>& params, bool fold_constants = true);

/// Bound constraints `lo <= p <= hi` (or `lo < p`) for one parameter variable.
Formula bound_constraint(const ParamSpec& spec, const std::string& var);

}  // namespace smtilp
