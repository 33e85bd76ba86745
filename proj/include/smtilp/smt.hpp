#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "smtilp/formula.hpp"
#include "smtilp/templates.hpp"

namespace smtilp {

/// Real-sorted variable with optional box bounds.
struct VarDecl {
  std::string name;
  double lo = -1e6;
  double hi = 1e6;
  bool lo_open = false;
};

struct SoftConstraint {
  Formula formula;
  double weight = 1.0;
};

struct MaxSmtInstance {
  std::vector<VarDecl> declarations;
  std::vector<Formula> hard;
  std::vector<SoftConstraint> soft;
  double timeout = 30.0;  // seconds, wall clock

  double total_soft_weight() const;
  /// Throws Error on non-positive weights/timeout or undeclared variables.
  void validate() const;
};

enum class SolveStatus { Sat, Unsat, Unknown, Timeout };
std::string_view to_string(SolveStatus s);

struct SolveResult {
  SolveStatus status = SolveStatus::Unknown;
  std::optional<ParamAssignment> model;
  std::optional<double> satisfied_soft_weight;
  bool heuristic = false;  // optimum not proven (built-in search, or partial result at timeout)
  std::string note;
};

/// Solver process failed (could not start, crashed, protocol error).
class BackendError : public Error {
 public:
  using Error::Error;
};

class SmtBackend {
 public:
  virtual ~SmtBackend() = default;
  virtual std::string name() const = 0;
  virtual SolveResult check_sat(const std::vector<VarDecl>& decls, const Formula& f, double timeout) = 0;
  virtual SolveResult solve_maxsmt(const MaxSmtInstance& inst) = 0;
};

struct BuiltinOptions {
  uint64_t seed = 0;
  size_t vertex_cap = 1'000'000;  // max hyperplane subsets for exact vertex enumeration
  int starts = 32;
  int iterations = 200;
};

/// Solver-free fitter: exact vertex enumeration over the hyperplane
/// arrangement for affine instances, exact 1-D sweeps for single-parameter
/// polynomial instances, multi-start exact line sweeps otherwise.
class BuiltinBackend : public SmtBackend {
 public:
  explicit BuiltinBackend(BuiltinOptions opts = {}) : opts_(opts) {}
  std::string name() const override { return "builtin"; }
  SolveResult check_sat(const std::vector<VarDecl>& decls, const Formula& f, double timeout) override;
  SolveResult solve_maxsmt(const MaxSmtInstance& inst) override;

 private:
  BuiltinOptions opts_;
};

struct SmtLibOptions {
  std::string command;  // e.g. "z3 -in"; empty means SMTILP_SOLVER_CMD or "z3 -in"
  enum class SoftMode { Auto, AssertSoft, Cardinality } soft_mode = SoftMode::Auto;
  enum class SinMode { Auto, Native, PiecewiseLinear } sin_mode = SinMode::Auto;
};

/// External solver speaking SMT-LIB2 over a child-process pipe, one
/// process per call.
class SmtLibBackend : public SmtBackend {
 public:
  explicit SmtLibBackend(SmtLibOptions opts = {});
  std::string name() const override { return "external"; }
  SolveResult check_sat(const std::vector<VarDecl>& decls, const Formula& f, double timeout) override;
  SolveResult solve_maxsmt(const MaxSmtInstance& inst) override;

  const std::string& command() const { return opts_.command; }
  /// Whether the solver decides a trivial sin query (probed once).
  bool native_sin();
  bool native_assert_soft();

 private:
  SolveResult run(const MaxSmtInstance& inst, bool maxsmt);
  SmtLibOptions opts_;
  std::optional<bool> sin_ok_;
  std::optional<bool> soft_ok_;
};

/// SMTILP_SOLVER_CMD, else "z3 -in".
std::string default_solver_command();
bool solver_available(const std::string& command);

enum class BackendKind { Builtin, External };
struct BackendConfig {
  BackendKind kind = BackendKind::Builtin;
  BuiltinOptions builtin;
  SmtLibOptions external;
};
std::unique_ptr<SmtBackend> make_backend(const BackendConfig& cfg);

/// Script text the external backend sends (without the trailing queries);
/// exposed for inspection and tests.
std::string smtlib_script(const MaxSmtInstance& inst, bool use_assert_soft, bool approximate_sin);

/// Parses a `(get-model)` response; accepts decimals, `(- c)`, `(/ a b)`.
ParamAssignment parse_smtlib_model(const std::string& text);

/// Model-checked front ends: a sat verdict whose model fails concrete
/// re-evaluation is downgraded to unknown. Comparisons within 1e-9
/// (relative) of their boundary are treated as undecided, and a reported
/// soft weight is kept when the model can account for it.
SolveResult check_sat(SmtBackend& backend, const std::vector<VarDecl>& decls, const Formula& f, double timeout);
SolveResult solve_maxsmt(SmtBackend& backend, const MaxSmtInstance& inst);

/// Evaluates f under a model, filling unassigned declared variables with an
/// in-bounds default.
bool holds(const Formula& f, const ParamAssignment& model, const std::vector<VarDecl>& decls);

struct AcceptabilityResult {
  enum class Verdict { Accepted, Counterexample, Undetermined } verdict = Verdict::Accepted;
  std::string example_id;
  bool positive = false;
  SolveStatus status = SolveStatus::Unsat;
};

struct LabeledFormula {
  std::string id;
  Formula formula;
};

/// Checks B ∧ h ∧ ¬e⁺ and B ∧ h ∧ e⁻ for unsatisfiability, positives first.
/// Any unknown/timeout yields Undetermined, never Accepted.
AcceptabilityResult acceptability_check(SmtBackend& backend, const std::vector<VarDecl>& decls,
                                        const Formula& background, const Formula& rule,
                                        const std::vector<LabeledFormula>& positives,
                                        const std::vector<LabeledFormula>& negatives, double timeout);

}  // namespace smtilp
