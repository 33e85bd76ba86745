#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace smtilp {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by concrete evaluation: division by zero, non-finite inputs.
class EvalError : public Error {
 public:
  using Error::Error;
};

enum class Comparator { Lt, Le, Eq, Ge, Gt };

std::string_view to_string(Comparator c);
std::optional<Comparator> parse_comparator(std::string_view text);
Comparator negate(Comparator c);
bool compare(double lhs, Comparator c, double rhs);

inline constexpr Comparator kAllComparators[] = {Comparator::Lt, Comparator::Le, Comparator::Eq,
                                                 Comparator::Ge, Comparator::Gt};

enum class Op { Var, Const, Add, Sub, Mul, Div, Neg, Abs, Sin, Cmp, And, Or, Not, True, False };

inline constexpr int kMaxFormulaDepth = 64;

/// Immutable expression tree over real variables and constants. Terms and
/// boolean formulas share one node type; And/Or are n-ary.
class Formula {
 public:
  struct Node {
    Op op;
    double value = 0.0;          // Const
    std::string name;            // Var
    Comparator cmp = Comparator::Lt;  // Cmp
    std::vector<Formula> kids;
    int depth = 1;
    bool boolean = false;
  };

  Formula();  // the constant `true`

  static Formula var(std::string name);
  static Formula constant(double v);
  static Formula truth(bool v);

  Op op() const { return node_->op; }
  double value() const { return node_->value; }
  const std::string& name() const { return node_->name; }
  Comparator comparator() const { return node_->cmp; }
  const std::vector<Formula>& kids() const { return node_->kids; }
  int depth() const { return node_->depth; }
  bool is_boolean() const { return node_->boolean; }
  bool is_const() const { return node_->op == Op::Const; }
  bool is_true() const { return node_->op == Op::True; }
  bool is_false() const { return node_->op == Op::False; }
  const Node* raw() const { return node_.get(); }

  static Formula make(Op op, std::vector<Formula> kids, Comparator cmp = Comparator::Lt);

 private:
  explicit Formula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

Formula operator+(const Formula& a, const Formula& b);
Formula operator-(const Formula& a, const Formula& b);
Formula operator*(const Formula& a, const Formula& b);
Formula operator/(const Formula& a, const Formula& b);
Formula operator-(const Formula& a);
Formula abs(const Formula& a);
Formula sin(const Formula& a);
Formula cmp(const Formula& a, Comparator c, const Formula& b);
Formula land(std::vector<Formula> parts);
Formula lor(std::vector<Formula> parts);
Formula lnot(const Formula& a);

using Env = std::function<double(const std::string&)>;
Env env_from(const std::map<std::string, double>& values);

double eval_term(const Formula& f, const Env& env);
bool eval_bool(const Formula& f, const Env& env);

/// Constant folding; never changes the truth value under any assignment.
Formula fold(const Formula& f);

Formula substitute(const Formula& f, const std::map<std::string, Formula>& repl);

std::set<std::string> variables(const Formula& f);

/// Linear form c0 + sum coeff[v]*v, when the term is affine in its variables.
struct AffineForm {
  double constant = 0.0;
  std::map<std::string, double> coeffs;
};
std::optional<AffineForm> affine(const Formula& term);

/// True if the formula contains sin anywhere.
bool contains_sin(const Formula& f);

std::string to_string(const Formula& f);
std::string to_smtlib(const Formula& f);
std::string smtlib_number(double v);

}  // namespace smtilp
