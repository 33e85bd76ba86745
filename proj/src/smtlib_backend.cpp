#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <mutex>
#include <numbers>
#include <sstream>

#include "smtilp/smt.hpp"

namespace smtilp {
namespace {

// ---------------------------------------------------------------------------
// s-expressions

struct Sexp {
  std::string atom;
  std::vector<Sexp> list;
  bool is_list = false;
};

class SexpReader {
 public:
  explicit SexpReader(std::string_view s) : s_(s) {}

  std::optional<Sexp> next() {
    skip();
    if (pos_ >= s_.size()) return std::nullopt;
    return read();
  }

 private:
  void skip() {
    while (pos_ < s_.size()) {
      if (std::isspace(static_cast<unsigned char>(s_[pos_]))) {
        ++pos_;
      } else if (s_[pos_] == ';') {
        while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  Sexp read() {
    Sexp e;
    if (s_[pos_] == '(') {
      e.is_list = true;
      ++pos_;
      for (;;) {
        skip();
        if (pos_ >= s_.size()) throw BackendError("unbalanced solver output");
        if (s_[pos_] == ')') {
          ++pos_;
          return e;
        }
        e.list.push_back(read());
      }
    }
    if (s_[pos_] == ')') throw BackendError("unexpected ')' in solver output");
    if (s_[pos_] == '"') {
      size_t start = pos_++;
      while (pos_ < s_.size()) {
        if (s_[pos_] == '"') {
          if (pos_ + 1 < s_.size() && s_[pos_ + 1] == '"') {
            pos_ += 2;
            continue;
          }
          break;
        }
        ++pos_;
      }
      ++pos_;
      e.atom = std::string(s_.substr(start, pos_ - start));
      return e;
    }
    if (s_[pos_] == '|') {
      size_t end = s_.find('|', pos_ + 1);
      if (end == std::string_view::npos) throw BackendError("unterminated quoted symbol");
      e.atom = std::string(s_.substr(pos_ + 1, end - pos_ - 1));
      pos_ = end + 1;
      return e;
    }
    size_t start = pos_;
    while (pos_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[pos_])) && s_[pos_] != '(' &&
           s_[pos_] != ')')
      ++pos_;
    e.atom = std::string(s_.substr(start, pos_ - start));
    return e;
  }

  std::string_view s_;
  size_t pos_ = 0;
};

double parse_real_atom(std::string a) {
  if (!a.empty() && a.back() == '?') a.pop_back();
  char* end = nullptr;
  double v = std::strtod(a.c_str(), &end);
  if (a.empty() || end != a.c_str() + a.size()) throw BackendError("bad numeral in model: " + a);
  return v;
}

double eval_value(const Sexp& e) {
  if (!e.is_list) return parse_real_atom(e.atom);
  if (e.list.empty() || e.list[0].is_list) throw BackendError("bad model value");
  const std::string& op = e.list[0].atom;
  if (op == "-" && e.list.size() == 2) return -eval_value(e.list[1]);
  if (op == "-" && e.list.size() == 3) return eval_value(e.list[1]) - eval_value(e.list[2]);
  if (op == "/" && e.list.size() == 3) return eval_value(e.list[1]) / eval_value(e.list[2]);
  if (op == "+") {
    double s = 0;
    for (size_t i = 1; i < e.list.size(); ++i) s += eval_value(e.list[i]);
    return s;
  }
  if (op == "*") {
    double s = 1;
    for (size_t i = 1; i < e.list.size(); ++i) s *= eval_value(e.list[i]);
    return s;
  }
  if (op == "to_real" && e.list.size() == 2) return eval_value(e.list[1]);
  throw BackendError("unsupported model value operator " + op);
}

void collect_defs(const Sexp& e, ParamAssignment& out) {
  if (!e.is_list) return;
  if (e.list.size() == 5 && !e.list[0].is_list && e.list[0].atom == "define-fun" && e.list[2].is_list &&
      e.list[2].list.empty() && !e.list[3].is_list && (e.list[3].atom == "Real" || e.list[3].atom == "Int")) {
    out[e.list[1].atom] = eval_value(e.list[4]);
    return;
  }
  if (e.list.size() == 5 && !e.list[0].is_list && e.list[0].atom == "define-fun" && !e.list[3].is_list &&
      e.list[3].atom == "Bool" && !e.list[4].is_list) {
    out[e.list[1].atom] = e.list[4].atom == "true" ? 1.0 : 0.0;
    return;
  }
  for (const auto& k : e.list) collect_defs(k, out);
}

// ---------------------------------------------------------------------------
// child process

void ignore_sigpipe() {
  static std::once_flag once;
  std::call_once(once, [] { ::signal(SIGPIPE, SIG_IGN); });
}

struct RunOutput {
  std::string out;
  bool timed_out = false;
  int exit_status = 0;
};

RunOutput run_process(const std::string& command, const std::string& input, double timeout) {
  ignore_sigpipe();
  int to_child[2], from_child[2];
  if (::pipe(to_child) != 0) throw BackendError("pipe failed");
  if (::pipe(from_child) != 0) {
    ::close(to_child[0]);
    ::close(to_child[1]);
    throw BackendError("pipe failed");
  }
  std::string shell_cmd = "exec " + command;
  pid_t pid = ::fork();
  if (pid < 0) throw BackendError("fork failed");
  if (pid == 0) {
    ::setpgid(0, 0);
    ::dup2(to_child[0], 0);
    ::dup2(from_child[1], 1);
    int devnull = ::open("/dev/null", O_WRONLY);
    if (devnull >= 0) ::dup2(devnull, 2);
    ::close(to_child[0]);
    ::close(to_child[1]);
    ::close(from_child[0]);
    ::close(from_child[1]);
    ::execl("/bin/sh", "sh", "-c", shell_cmd.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(to_child[0]);
  ::close(from_child[1]);
  int wfd = to_child[1], rfd = from_child[0];
  ::fcntl(wfd, F_SETFL, ::fcntl(wfd, F_GETFL) | O_NONBLOCK);

  RunOutput res;
  auto end = std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout);
  size_t written = 0;
  if (input.empty()) {
    ::close(wfd);
    wfd = -1;
  }
  char buf[65536];
  for (;;) {
    auto now = std::chrono::steady_clock::now();
    if (now >= end) {
      res.timed_out = true;
      break;
    }
    int ms = static_cast<int>(std::chrono::duration_cast<std::chrono::milliseconds>(end - now).count()) + 1;
    pollfd fds[2];
    int nf = 0;
    fds[nf++] = {rfd, POLLIN, 0};
    if (wfd >= 0) fds[nf++] = {wfd, POLLOUT, 0};
    int rc = ::poll(fds, nf, std::min(ms, 1000));
    if (rc < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (wfd >= 0 && (fds[1].revents & (POLLOUT | POLLERR | POLLHUP))) {
      ssize_t n = ::write(wfd, input.data() + written, input.size() - written);
      if (n > 0) written += static_cast<size_t>(n);
      if (n < 0 && errno != EAGAIN) written = input.size();
      if (written >= input.size()) {
        ::close(wfd);
        wfd = -1;
      }
    }
    if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
      ssize_t n = ::read(rfd, buf, sizeof buf);
      if (n > 0) {
        res.out.append(buf, static_cast<size_t>(n));
      } else if (n == 0 || errno != EAGAIN) {
        break;
      }
    }
  }
  if (wfd >= 0) ::close(wfd);
  ::close(rfd);
  if (res.timed_out) {
    ::kill(-pid, SIGKILL);
    ::kill(pid, SIGKILL);
  }
  int status = 0;
  ::waitpid(pid, &status, 0);
  res.exit_status = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return res;
}

// ---------------------------------------------------------------------------
// script construction

constexpr double kSinRange = 10 * std::numbers::pi;
constexpr int kSinSegments = 256;

std::string decimal(double v) { return smtlib_number(v); }

struct SinRewrite {
  std::vector<std::pair<std::string, Formula>> aux;  // aux var name, argument term
  std::map<std::string, std::string> by_arg;

  Formula rewrite(const Formula& f) {
    if (f.op() == Op::Var || f.op() == Op::Const || f.op() == Op::True || f.op() == Op::False) return f;
    std::vector<Formula> kids;
    for (const auto& k : f.kids()) kids.push_back(rewrite(k));
    if (f.op() == Op::Sin) {
      std::string key = to_smtlib(kids[0]);
      auto it = by_arg.find(key);
      if (it == by_arg.end()) {
        std::string name = "sin_aux_" + std::to_string(aux.size());
        aux.emplace_back(name, kids[0]);
        it = by_arg.emplace(key, name).first;
      }
      return Formula::var(it->second);
    }
    return Formula::make(f.op(), std::move(kids), f.comparator());
  }
};

// Envelope of sin on [-10pi, 10pi]: each chord widened by the maximal chord
// error h^2/8, so every true (u, sin u) pair stays feasible.
std::string sin_envelope(const std::string& s, const Formula& arg) {
  std::ostringstream os;
  std::string u = to_smtlib(arg);
  const double h = 2 * kSinRange / kSinSegments;
  const double err = h * h / 8 + 1e-12;
  os << "(assert (and (<= " << decimal(-1) << " " << s << ") (<= " << s << " 1.0)))\n";
  for (int i = 0; i < kSinSegments; ++i) {
    double a = -kSinRange + i * h, b = a + h;
    double sa = std::sin(a), sb = std::sin(b);
    double slope = (sb - sa) / h;
    double icpt = sa - slope * a;
    std::string chord = "(+ " + decimal(icpt) + " (* " + decimal(slope) + " " + u + "))";
    os << "(assert (=> (and (<= " << decimal(a) << " " << u << ") (<= " << u << " " << decimal(b) << ")) (and (<= (- "
       << chord << " " << decimal(err) << ") " << s << ") (<= " << s << " (+ " << chord << " " << decimal(err)
       << ")))))\n";
  }
  return os.str();
}

bool is_linear(const Formula& f) {
  if (f.op() == Op::Cmp) return affine(f.kids()[0] - f.kids()[1]).has_value();
  for (const auto& k : f.kids())
    if (!is_linear(k)) return false;
  return true;
}

std::string bounds_assert(const VarDecl& d) {
  std::ostringstream os;
  os << "(assert (and (" << (d.lo_open ? "<" : "<=") << " " << decimal(d.lo) << " " << d.name << ") (<= " << d.name
     << " " << decimal(d.hi) << ")))\n";
  return os.str();
}

struct Script {
  std::string text;
  std::vector<std::string> indicator_names;  // soft_ind_i, one per soft constraint
};

Script build_script(const MaxSmtInstance& inst, bool use_assert_soft, bool approximate_sin, bool indicators) {
  SinRewrite rw;
  std::vector<Formula> hard, soft;
  for (const auto& h : inst.hard) hard.push_back(approximate_sin ? rw.rewrite(fold(h)) : fold(h));
  for (const auto& s : inst.soft) soft.push_back(approximate_sin ? rw.rewrite(fold(s.formula)) : fold(s.formula));
  bool linear = true;
  for (const auto& f : hard) linear = linear && is_linear(f);
  for (const auto& f : soft) linear = linear && is_linear(f);
  for (const auto& [name, arg] : rw.aux) linear = linear && affine(arg).has_value();

  Script sc;
  std::ostringstream os;
  os << "(set-option :produce-models true)\n";
  os << "(set-option :pp.decimal true)\n(set-option :pp.decimal_precision 30)\n";
  if (!use_assert_soft) os << "(set-logic " << (linear ? "QF_LRA" : "QF_NRA") << ")\n";
  for (const auto& d : inst.declarations) os << "(declare-const " << d.name << " Real)\n";
  for (const auto& [name, arg] : rw.aux) os << "(declare-const " << name << " Real)\n";
  for (const auto& d : inst.declarations) os << bounds_assert(d);
  for (const auto& [name, arg] : rw.aux) os << sin_envelope(name, arg);
  for (const auto& f : hard) os << "(assert " << to_smtlib(f) << ")\n";
  for (size_t i = 0; i < soft.size(); ++i) {
    if (use_assert_soft && indicators) {
      std::string b = "soft_ind_" + std::to_string(i);
      sc.indicator_names.push_back(b);
      os << "(declare-const " << b << " Bool)\n(assert (= " << b << " " << to_smtlib(soft[i]) << "))\n";
      os << "(assert-soft " << b << " :weight " << decimal(inst.soft[i].weight) << ")\n";
    } else if (use_assert_soft) {
      os << "(assert-soft " << to_smtlib(soft[i]) << " :weight " << decimal(inst.soft[i].weight) << ")\n";
    } else if (indicators) {
      std::string b = "soft_ind_" + std::to_string(i);
      sc.indicator_names.push_back(b);
      os << "(declare-const " << b << " Bool)\n(assert (=> " << b << " " << to_smtlib(soft[i]) << "))\n";
    }
  }
  sc.text = os.str();
  return sc;
}

struct Verdict {
  SolveStatus status = SolveStatus::Unknown;
  ParamAssignment model;
};

Verdict interpret(const RunOutput& ro) {
  Verdict v;
  if (ro.timed_out) {
    v.status = SolveStatus::Timeout;
    return v;
  }
  SexpReader rd(ro.out);
  bool got_status = false;
  while (auto e = rd.next()) {
    if (!e->is_list) {
      if (e->atom == "sat" || e->atom == "unsat" || e->atom == "unknown") {
        v.status = e->atom == "sat" ? SolveStatus::Sat : e->atom == "unsat" ? SolveStatus::Unsat : SolveStatus::Unknown;
        got_status = true;
      }
      continue;
    }
    if (got_status && v.status == SolveStatus::Sat) collect_defs(*e, v.model);
  }
  if (!got_status) {
    std::string head = ro.out.substr(0, 200);
    throw BackendError("solver produced no verdict (exit " + std::to_string(ro.exit_status) + "): " + head);
  }
  return v;
}

ParamAssignment complete_model(ParamAssignment m, const std::vector<VarDecl>& decls) {
  ParamAssignment out;
  for (const auto& d : decls) {
    auto it = m.find(d.name);
    if (it != m.end()) {
      out[d.name] = it->second;
    } else {
      double v = std::clamp(0.0, d.lo, d.hi);
      if (d.lo_open && v <= d.lo) v = d.lo + 0.5 * (std::min(d.hi, d.lo + 1.0) - d.lo);
      out[d.name] = v;
    }
  }
  return out;
}

bool hard_ok(const MaxSmtInstance& inst, const ParamAssignment& m) {
  for (const auto& h : inst.hard)
    if (!holds(h, m, inst.declarations)) return false;
  return true;
}

double soft_weight(const MaxSmtInstance& inst, const ParamAssignment& m) {
  double w = 0;
  for (const auto& s : inst.soft)
    if (holds(s.formula, m, inst.declarations)) w += s.weight;
  return w;
}

}  // namespace

std::string smtlib_script(const MaxSmtInstance& inst, bool use_assert_soft, bool approximate_sin) {
  return build_script(inst, use_assert_soft, approximate_sin, false).text;
}

ParamAssignment parse_smtlib_model(const std::string& text) {
  ParamAssignment out;
  SexpReader rd(text);
  while (auto e = rd.next()) collect_defs(*e, out);
  return out;
}

std::string default_solver_command() {
  if (const char* env = std::getenv("SMTILP_SOLVER_CMD"); env && *env) return env;
  return "z3 -in";
}

bool solver_available(const std::string& command) {
  try {
    RunOutput ro = run_process(command, "(check-sat)\n(exit)\n", 10.0);
    return !ro.timed_out && ro.out.find("sat") != std::string::npos;
  } catch (const Error&) {
    return false;
  }
}

SmtLibBackend::SmtLibBackend(SmtLibOptions opts) : opts_(std::move(opts)) {
  if (opts_.command.empty()) opts_.command = default_solver_command();
}

bool SmtLibBackend::native_sin() {
  if (opts_.sin_mode == SmtLibOptions::SinMode::Native) return true;
  if (opts_.sin_mode == SmtLibOptions::SinMode::PiecewiseLinear) return false;
  if (!sin_ok_) {
    RunOutput ro = run_process(opts_.command,
                               "(declare-const x Real)\n(assert (> (sin x) 0.5))\n(assert (< 0.0 x 1.5))\n"
                               "(check-sat)\n(exit)\n",
                               10.0);
    Verdict v;
    try {
      v = interpret(ro);
    } catch (const BackendError&) {
      v.status = SolveStatus::Unknown;
    }
    sin_ok_ = v.status == SolveStatus::Sat;
  }
  return *sin_ok_;
}

bool SmtLibBackend::native_assert_soft() {
  if (opts_.soft_mode == SmtLibOptions::SoftMode::AssertSoft) return true;
  if (opts_.soft_mode == SmtLibOptions::SoftMode::Cardinality) return false;
  if (!soft_ok_) {
    RunOutput ro = run_process(opts_.command,
                               "(declare-const x Real)\n(assert (< x 1.0))\n(assert-soft (> x 2.0) :weight 1)\n"
                               "(check-sat)\n(exit)\n",
                               10.0);
    soft_ok_ = !ro.timed_out && ro.out.find("error") == std::string::npos &&
               ro.out.find("unsupported") == std::string::npos && ro.out.find("sat") != std::string::npos;
  }
  return *soft_ok_;
}

SolveResult SmtLibBackend::check_sat(const std::vector<VarDecl>& decls, const Formula& f, double timeout) {
  MaxSmtInstance inst;
  inst.declarations = decls;
  inst.hard.push_back(f);
  inst.timeout = timeout;
  SolveResult r = run(inst, false);
  r.satisfied_soft_weight.reset();
  return r;
}

SolveResult SmtLibBackend::solve_maxsmt(const MaxSmtInstance& inst) {
  inst.validate();
  return run(inst, !inst.soft.empty());
}

SolveResult SmtLibBackend::run(const MaxSmtInstance& inst, bool maxsmt) {
  bool uses_sin = false;
  for (const auto& h : inst.hard) uses_sin = uses_sin || contains_sin(h);
  for (const auto& s : inst.soft) uses_sin = uses_sin || contains_sin(s.formula);
  const bool approx = uses_sin && !native_sin();
  const auto start = std::chrono::steady_clock::now();
  auto remaining = [&] {
    double used = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return inst.timeout - used;
  };

  // Exact runs take the soft weight from the solver's indicators: a model
  // printed in decimals can sit on a constraint boundary and evaluate the
  // wrong way in doubles. Relaxed runs are checked concretely instead.
  auto finish = [&](Verdict v, SolveResult r) {
    r.status = v.status;
    if (v.status == SolveStatus::Sat) {
      ParamAssignment m = complete_model(v.model, inst.declarations);
      if (approx && !hard_ok(inst, m)) {
        r.status = SolveStatus::Unknown;
        r.note = "relaxed sin model failed concrete check";
        return r;
      }
      double w = 0;
      bool have_indicators = !approx;
      for (size_t i = 0; i < inst.soft.size() && have_indicators; ++i) {
        auto it = v.model.find("soft_ind_" + std::to_string(i));
        if (it == v.model.end()) have_indicators = false;
        else if (it->second > 0.5) w += inst.soft[i].weight;
      }
      r.satisfied_soft_weight = have_indicators ? w : soft_weight(inst, m);
      r.model = std::move(m);
    }
    return r;
  };

  if (!maxsmt || native_assert_soft()) {
    Script sc = build_script(inst, maxsmt, approx, maxsmt);
    sc.text += "(check-sat)\n(get-model)\n(exit)\n";
    RunOutput ro = run_process(opts_.command, sc.text, std::max(0.01, remaining()));
    SolveResult r;
    r.heuristic = approx && maxsmt;
    if (approx && maxsmt) r.note = "sin relaxed; optimum is over the relaxation";
    return finish(interpret(ro), r);
  }

  // Cardinality search: raise the required soft weight until infeasible.
  Script base = build_script(inst, false, approx, true);
  SolveResult best;
  best.status = SolveStatus::Unsat;
  std::optional<double> floor;
  for (;;) {
    std::string text = base.text;
    if (floor) {
      text += "(assert (> (+ 0.0";
      for (size_t i = 0; i < base.indicator_names.size(); ++i)
        text += " (ite " + base.indicator_names[i] + " " + decimal(inst.soft[i].weight) + " 0.0)";
      text += ") " + decimal(*floor) + "))\n";
    }
    text += "(check-sat)\n(get-model)\n(exit)\n";
    double left = remaining();
    if (left <= 0) {
      if (best.model) best.note = "best-so-far at timeout";
      best.status = SolveStatus::Timeout;
      best.heuristic = true;
      return best;
    }
    Verdict v = interpret(run_process(opts_.command, text, left));
    if (v.status == SolveStatus::Unsat) {
      if (floor) best.status = SolveStatus::Sat;
      return best;
    }
    if (v.status != SolveStatus::Sat) {
      if (best.model) {
        best.status = v.status;
        best.heuristic = true;
        best.note = "best-so-far: " + std::string(to_string(v.status));
        return best;
      }
      best.status = v.status;
      return best;
    }
    SolveResult r = finish(v, SolveResult{});
    if (r.status != SolveStatus::Sat) {
      if (best.model) {
        best.status = SolveStatus::Sat;
        best.heuristic = true;
        return best;
      }
      return r;
    }
    double w = *r.satisfied_soft_weight;
    if (best.model && w <= *best.satisfied_soft_weight) {
      best.status = SolveStatus::Sat;
      return best;
    }
    best = r;
    floor = w;
    if (w >= inst.total_soft_weight()) return best;
  }
}

}  // namespace smtilp
