#include "compiled.hpp"

#include <cmath>

namespace smtilp::detail {

CompiledTerm CompiledTerm::compile(const Formula& t, const std::unordered_map<std::string, int>& vars) {
  CompiledTerm out;
  std::function<void(const Formula&)> rec = [&](const Formula& f) {
    switch (f.op()) {
      case Op::Var: {
        auto it = vars.find(f.name());
        if (it == vars.end()) throw Error("undeclared variable " + f.name());
        out.prog_.push_back({Code::Var, it->second, 0.0});
        return;
      }
      case Op::Const: out.prog_.push_back({Code::Const, 0, f.value()}); return;
      default: break;
    }
    for (const auto& k : f.kids()) rec(k);
    switch (f.op()) {
      case Op::Add: out.prog_.push_back({Code::Add}); break;
      case Op::Sub: out.prog_.push_back({Code::Sub}); break;
      case Op::Mul: out.prog_.push_back({Code::Mul}); break;
      case Op::Div: out.prog_.push_back({Code::Div}); break;
      case Op::Neg: out.prog_.push_back({Code::Neg}); break;
      case Op::Abs: out.prog_.push_back({Code::Abs}); break;
      case Op::Sin: out.prog_.push_back({Code::Sin}); break;
      default: throw Error("boolean node inside term");
    }
  };
  rec(t);
  return out;
}

double CompiledTerm::eval(std::span<const double> x) const {
  double stack[128];
  int sp = 0;
  for (const auto& in : prog_) {
    switch (in.code) {
      case Code::Var: stack[sp++] = x[in.index]; break;
      case Code::Const: stack[sp++] = in.value; break;
      case Code::Add: --sp; stack[sp - 1] += stack[sp]; break;
      case Code::Sub: --sp; stack[sp - 1] -= stack[sp]; break;
      case Code::Mul: --sp; stack[sp - 1] *= stack[sp]; break;
      case Code::Div:
        --sp;
        stack[sp - 1] = stack[sp] == 0.0 ? std::nan("") : stack[sp - 1] / stack[sp];
        break;
      case Code::Neg: stack[sp - 1] = -stack[sp - 1]; break;
      case Code::Abs: stack[sp - 1] = std::fabs(stack[sp - 1]); break;
      case Code::Sin: stack[sp - 1] = std::sin(stack[sp - 1]); break;
    }
  }
  return stack[0];
}

double Atom::value(std::span<const double> x) const {
  if (!affine) return diff.eval(x);
  double v = offset;
  for (size_t i = 0; i < coeffs.size(); ++i) v += coeffs[i] * x[i];
  return v;
}

bool Atom::truth(double v) const { return compare(v, cmp, 0.0); }

bool BoolProgram::eval(std::span<const uint8_t> truth) const {
  uint8_t stack[256];
  int sp = 0;
  for (const auto& in : prog) {
    switch (in.code) {
      case Code::Atom: stack[sp++] = truth[in.arg]; break;
      case Code::True: stack[sp++] = 1; break;
      case Code::False: stack[sp++] = 0; break;
      case Code::Not: stack[sp - 1] = !stack[sp - 1]; break;
      case Code::And: {
        uint8_t r = 1;
        for (int i = 0; i < in.arg; ++i) r &= stack[sp - 1 - i];
        sp -= in.arg;
        stack[sp++] = r;
        break;
      }
      case Code::Or: {
        uint8_t r = 0;
        for (int i = 0; i < in.arg; ++i) r |= stack[sp - 1 - i];
        sp -= in.arg;
        stack[sp++] = r;
        break;
      }
    }
  }
  return stack[0] != 0;
}

Problem Problem::build(const MaxSmtInstance& inst) {
  Problem p;
  p.vars = inst.declarations;
  std::unordered_map<std::string, int> index;
  for (size_t i = 0; i < p.vars.size(); ++i) {
    index[p.vars[i].name] = static_cast<int>(i);
    double lo = p.vars[i].lo;
    if (p.vars[i].lo_open) lo += 1e-9 * std::max(1.0, std::fabs(lo));
    p.lo.push_back(lo);
    p.hi.push_back(p.vars[i].hi);
  }
  std::unordered_map<std::string, int> atom_index;

  auto add_atom = [&](const Formula& cmpf) -> int {
    Formula diff = cmpf.kids()[0] - cmpf.kids()[1];
    std::string key = to_smtlib(diff) + "|" + std::string(to_string(cmpf.comparator()));
    auto it = atom_index.find(key);
    if (it != atom_index.end()) return it->second;
    Atom a;
    a.diff = CompiledTerm::compile(diff, index);
    a.cmp = cmpf.comparator();
    if (auto af = affine(diff)) {
      a.affine = true;
      a.coeffs.assign(p.vars.size(), 0.0);
      a.offset = af->constant;
      for (const auto& [v, c] : af->coeffs) {
        auto vi = index.find(v);
        if (vi == index.end()) throw Error("undeclared variable " + v);
        a.coeffs[vi->second] = c;
      }
    }
    int id = static_cast<int>(p.atoms.size());
    p.atoms.push_back(std::move(a));
    atom_index.emplace(std::move(key), id);
    return id;
  };

  auto compile_bool = [&](const Formula& f) {
    BoolProgram bp;
    std::function<void(const Formula&)> rec = [&](const Formula& g) {
      switch (g.op()) {
        case Op::True: bp.prog.push_back({BoolProgram::Code::True}); return;
        case Op::False: bp.prog.push_back({BoolProgram::Code::False}); return;
        case Op::Cmp: {
          int a = add_atom(g);
          bp.prog.push_back({BoolProgram::Code::Atom, a});
          if (std::find(bp.atoms.begin(), bp.atoms.end(), a) == bp.atoms.end()) bp.atoms.push_back(a);
          return;
        }
        case Op::Not:
          rec(g.kids()[0]);
          bp.prog.push_back({BoolProgram::Code::Not});
          return;
        case Op::And:
        case Op::Or:
          for (const auto& k : g.kids()) rec(k);
          bp.prog.push_back({g.op() == Op::And ? BoolProgram::Code::And : BoolProgram::Code::Or,
                             static_cast<int>(g.kids().size())});
          return;
        default: throw Error("term where formula expected");
      }
    };
    rec(f);
    return bp;
  };

  for (const auto& h : inst.hard) p.hard.push_back(compile_bool(fold(h)));
  for (const auto& s : inst.soft) {
    p.soft.push_back(compile_bool(fold(s.formula)));
    p.weights.push_back(s.weight);
  }
  p.atom_users.assign(p.atoms.size(), {});
  for (size_t i = 0; i < p.hard.size(); ++i)
    for (int a : p.hard[i].atoms) p.atom_users[a].push_back(static_cast<int>(i));
  for (size_t i = 0; i < p.soft.size(); ++i)
    for (int a : p.soft[i].atoms) p.atom_users[a].push_back(static_cast<int>(p.hard.size() + i));
  return p;
}

bool Problem::all_affine() const {
  for (const auto& a : atoms)
    if (!a.affine) return false;
  return true;
}

double Problem::total_weight() const {
  double s = 0;
  for (double w : weights) s += w;
  return s;
}

Objective evaluate(const Problem& p, std::span<const double> x, std::vector<uint8_t>& truth,
                   int cutoff_violations) {
  truth.resize(p.atoms.size());
  for (size_t i = 0; i < p.atoms.size(); ++i) truth[i] = p.atoms[i].truth(p.atoms[i].value(x));
  Objective o;
  for (const auto& h : p.hard) {
    if (!h.eval(truth)) {
      ++o.violations;
      if (cutoff_violations >= 0 && o.violations > cutoff_violations) return o;
    }
  }
  for (size_t i = 0; i < p.soft.size(); ++i)
    if (p.soft[i].eval(truth)) o.soft += p.weights[i];
  return o;
}

}  // namespace smtilp::detail
