#include "smtilp/rules.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <sstream>

namespace smtilp {

RuleStats RuleStats::from_counts(int cov_pos, int exc_neg, int n_pos, int n_neg, int body_len, int budget) {
  RuleStats s;
  s.cov_pos = cov_pos;
  s.exc_neg = exc_neg;
  s.n_pos = n_pos;
  s.n_neg = n_neg;
  int covered_neg = n_neg - exc_neg;
  s.precision = cov_pos + covered_neg > 0 ? double(cov_pos) / double(cov_pos + covered_neg) : 0.0;
  s.recall = n_pos > 0 ? double(cov_pos) / double(n_pos) : 0.0;
  s.f1 = s.precision + s.recall > 0 ? 2 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  s.support = s.recall;
  s.compression = budget > 0 ? std::clamp(1.0 - double(body_len) / double(budget), 0.0, 1.0) : 0.0;
  return s;
}

double score_fn(const RuleStats& s) {
  return 0.4 * s.f1 + 0.3 * s.precision + 0.2 * s.support + 0.1 * s.compression;
}

std::string_view to_string(Origin o) {
  switch (o) {
    case Origin::Arithmetic: return "arithmetic";
    case Origin::Structured: return "structured";
    case Origin::Other: return "other";
  }
  return "other";
}

std::optional<Origin> parse_origin(std::string_view s) {
  if (s == "arithmetic") return Origin::Arithmetic;
  if (s == "structured") return Origin::Structured;
  if (s == "other") return Origin::Other;
  return std::nullopt;
}

int priority(Origin o) { return static_cast<int>(o); }

std::string format_param(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v == 0 ? 0.0 : v);
  return buf;
}

namespace {

std::string params_text(const ParamAssignment& p) {
  std::string s = "{";
  bool first = true;
  for (const auto& [k, v] : p) {
    s += (first ? "" : ", ") + k + "=" + format_param(v);
    first = false;
  }
  return s + "}";
}

std::string trim(std::string_view s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

std::vector<std::string> split_top(std::string_view s, char sep) {
  std::vector<std::string> out;
  int depth = 0;
  size_t start = 0;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '(') ++depth;
    if (s[i] == ')') --depth;
    if (s[i] == sep && depth == 0) {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  std::string last = trim(s.substr(start));
  if (!last.empty() || !out.empty()) out.push_back(last);
  return out;
}

Term parse_term(const std::string& t) {
  if (t.empty()) throw Error("empty term");
  if (std::isupper(static_cast<unsigned char>(t[0]))) return Term::var(t);
  return Term::constant(t);
}

NumericArg parse_numeric_arg(const std::string& t) {
  size_t open = t.find('(');
  if (open != std::string::npos && t.back() == ')') {
    return {parse_term(trim(t.substr(open + 1, t.size() - open - 2))), trim(t.substr(0, open))};
  }
  char* end = nullptr;
  double v = std::strtod(t.c_str(), &end);
  if (!t.empty() && end == t.c_str() + t.size()) return {Term::constant(t, v), ""};
  throw Error("cannot parse numeric argument '" + t + "'");
}

// name(args...) -> name, args
std::pair<std::string, std::vector<std::string>> parse_call(const std::string& s) {
  size_t open = s.find('(');
  if (open == std::string::npos || s.back() != ')') throw Error("malformed literal '" + s + "'");
  std::string name = trim(s.substr(0, open));
  std::string inner = s.substr(open + 1, s.size() - open - 2);
  std::vector<std::string> args;
  if (!trim(inner).empty()) args = split_top(inner, ',');
  return {name, args};
}

ParamAssignment parse_params(std::string_view s) {
  std::string t = trim(s);
  if (t.size() < 2 || t.front() != '{' || t.back() != '}') throw Error("malformed parameter block '" + t + "'");
  ParamAssignment out;
  std::string inner = t.substr(1, t.size() - 2);
  if (trim(inner).empty()) return out;
  for (const auto& kv : split_top(inner, ',')) {
    size_t eq = kv.find('=');
    if (eq == std::string::npos) throw Error("malformed parameter '" + kv + "'");
    std::string v = trim(kv.substr(eq + 1));
    char* end = nullptr;
    double d = std::strtod(v.c_str(), &end);
    if (end != v.c_str() + v.size()) throw Error("bad parameter value '" + v + "'");
    out[trim(kv.substr(0, eq))] = d;
  }
  return out;
}

}  // namespace

std::string ScoredRule::to_string() const {
  return "rule " + format_param(score) + " " + std::string(smtilp::to_string(origin)) + ": " + clause.to_string() +
         " " + params_text(params);
}

Literal parse_literal(std::string_view text) {
  std::string s = trim(text);
  // parametric: id<pK>(args)
  size_t lt = s.find('<');
  size_t paren = s.find('(');
  if (lt != std::string::npos && paren != std::string::npos && lt < paren && s.compare(lt, 2, "<p") == 0) {
    size_t gt = s.find('>', lt);
    if (gt == std::string::npos || gt > paren) throw Error("malformed parametric literal '" + s + "'");
    std::string id = s.substr(0, lt);
    int slot = std::stoi(s.substr(lt + 2, gt - lt - 2));
    auto [name, args] = parse_call(id + s.substr(gt + 1));
    std::vector<NumericArg> nargs;
    for (const auto& a : args) nargs.push_back(parse_numeric_arg(a));
    if (!find_template(id)) throw Error("unknown template '" + id + "'");
    return Literal::parametric(id, slot, nargs);
  }
  // comparison at top level
  int depth = 0;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '(') ++depth;
    if (s[i] == ')') --depth;
    if (depth != 0) continue;
    size_t len = 0;
    if (s.compare(i, 2, "<=") == 0 || s.compare(i, 2, ">=") == 0) {
      len = 2;
    } else if (s.compare(i, 3, "≤") == 0 || s.compare(i, 3, "≥") == 0) {
      len = 3;
    } else if (s[i] == '<' || s[i] == '>' || s[i] == '=') {
      len = 1;
    }
    if (len == 0) continue;
    auto c = parse_comparator(s.substr(i, len));
    if (!c) throw Error("bad comparator in '" + s + "'");
    return Literal::comparison(parse_numeric_arg(trim(s.substr(0, i))), *c, parse_numeric_arg(trim(s.substr(i + len))));
  }
  auto [name, args] = parse_call(s);
  std::vector<Term> terms;
  for (const auto& a : args) terms.push_back(parse_term(a));
  return Literal::symbolic(name, terms);
}

Clause parse_clause(std::string_view text, int literal_budget) {
  std::string s(text);
  size_t arrow = s.find("←");
  size_t arrow_len = 3;
  if (arrow == std::string::npos) {
    arrow = s.find(":-");
    arrow_len = 2;
  }
  Clause c;
  if (arrow == std::string::npos) {
    c.head = parse_literal(s);
  } else {
    c.head = parse_literal(s.substr(0, arrow));
    std::string body = trim(s.substr(arrow + arrow_len));
    if (!body.empty())
      for (const auto& part : split_top(body, ',')) c.body.push_back(parse_literal(part));
  }
  c.literal_budget = std::max<int>(literal_budget, std::max<int>(1, static_cast<int>(c.body.size())));
  return c;
}

ScoredRule parse_rule(std::string_view line) {
  std::string s = trim(line);
  if (s.rfind("rule ", 0) != 0) throw Error("not a rule line: " + s);
  std::istringstream is(s.substr(5));
  std::string score_text, origin_text;
  is >> score_text >> origin_text;
  if (origin_text.empty() || origin_text.back() != ':') throw Error("malformed rule header: " + s);
  origin_text.pop_back();
  auto origin = parse_origin(origin_text);
  if (!origin) throw Error("unknown origin '" + origin_text + "'");
  size_t colon = s.find(": ");
  size_t brace = s.rfind('{');
  if (colon == std::string::npos || brace == std::string::npos || brace < colon) throw Error("malformed rule: " + s);
  ScoredRule r;
  r.score = std::stod(score_text);
  r.origin = *origin;
  r.clause = parse_clause(s.substr(colon + 2, brace - colon - 2));
  r.params = parse_params(s.substr(brace));
  return r;
}

std::string serialize_rules(const RuleFile& f) {
  std::string out;
  for (const auto& d : f.definitions)
    out += "define " + d.name + ": " + d.definition.to_string() + " " + params_text(d.params) + "\n";
  for (const auto& r : f.rules) out += r.to_string() + "\n";
  return out;
}

RuleFile parse_rules(std::string_view text) {
  RuleFile f;
  std::istringstream is{std::string(text)};
  std::string line;
  while (std::getline(is, line)) {
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.rfind("define ", 0) == 0) {
      size_t colon = t.find(": ");
      size_t brace = t.rfind('{');
      if (colon == std::string::npos || brace == std::string::npos) throw Error("malformed define: " + t);
      DerivedPredicate d;
      d.name = trim(t.substr(7, colon - 7));
      d.definition = parse_clause(t.substr(colon + 2, brace - colon - 2));
      d.params = parse_params(t.substr(brace));
      f.definitions.push_back(std::move(d));
    } else {
      f.rules.push_back(parse_rule(t));
    }
  }
  return f;
}

Coverage coverage(const Clause& c, const ParamAssignment& params, const Dataset& d) {
  Coverage cov;
  for (const auto& e : d.positives) cov.pos.push_back(covers(c, params, e, d.background));
  for (const auto& e : d.negatives) cov.neg.push_back(covers(c, params, e, d.background));
  return cov;
}

RuleStats compute_stats(const Clause& c, const ParamAssignment& params, const Dataset& d) {
  return compute_stats(c, coverage(c, params, d), d);
}

RuleStats compute_stats(const Clause& c, const Coverage& cov, const Dataset& d) {
  int cp = static_cast<int>(std::count(cov.pos.begin(), cov.pos.end(), true));
  int cn = static_cast<int>(std::count(cov.neg.begin(), cov.neg.end(), true));
  return RuleStats::from_counts(cp, static_cast<int>(d.negatives.size()) - cn, static_cast<int>(d.positives.size()),
                                static_cast<int>(d.negatives.size()), static_cast<int>(c.body.size()),
                                c.literal_budget);
}

}  // namespace smtilp
