#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <random>
#include <unordered_map>
#include <unordered_set>

#include <Eigen/Dense>

#include "compiled.hpp"
#include "smtilp/smt.hpp"

namespace smtilp {
namespace {

using detail::Atom;
using detail::Objective;
using detail::Problem;
using Clock = std::chrono::steady_clock;

constexpr double kEqTol = 1e-9;

class Deadline {
 public:
  explicit Deadline(double seconds)
      : end_(Clock::now() + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(seconds))) {}
  bool passed() const { return Clock::now() >= end_; }

 private:
  Clock::time_point end_;
};

bool atom_truth(const Atom& a, double v) {
  if (std::isnan(v)) return false;
  if (a.cmp == Comparator::Eq) return std::fabs(v) <= kEqTol;
  return a.truth(v);
}

// Like detail::evaluate, with the tolerant equality used throughout the fitter.
Objective full_eval(const Problem& p, std::span<const double> x, std::vector<uint8_t>& truth, int cutoff = -1) {
  truth.resize(p.atoms.size());
  for (size_t i = 0; i < p.atoms.size(); ++i) truth[i] = atom_truth(p.atoms[i], p.atoms[i].value(x));
  Objective o;
  for (const auto& h : p.hard) {
    if (!h.eval(truth)) {
      ++o.violations;
      if (cutoff >= 0 && o.violations > cutoff) return o;
    }
  }
  for (size_t i = 0; i < p.soft.size(); ++i)
    if (p.soft[i].eval(truth)) o.soft += p.weights[i];
  return o;
}

bool has_eq(const Problem& p) {
  for (const auto& a : p.atoms)
    if (a.cmp == Comparator::Eq) return true;
  return false;
}

struct Outcome {
  std::vector<double> x;
  Objective obj;
  bool found = false;
  bool exhaustive = false;
  bool timed_out = false;
};

double binom(size_t n, size_t k) {
  if (k > n) return 0;
  double r = 1;
  for (size_t i = 0; i < k; ++i) r = r * double(n - i) / double(i + 1);
  return r;
}

// ---------------------------------------------------------------------------
// Exact enumeration for affine instances. Every cell of the arrangement
// formed by the atoms' zero sets and the box faces is reached from one of its
// vertices by a small step along some sign pattern of the incident planes.

struct Plane {
  std::vector<double> n;
  double b;
};

std::vector<Plane> arrangement_planes(const Problem& p) {
  const size_t n = p.dim();
  std::vector<Plane> planes;
  std::unordered_set<std::string> seen;
  auto add = [&](std::vector<double> row, double b) {
    double m = 0;
    for (double c : row) m = std::max(m, std::fabs(c));
    if (m == 0) return;
    // normalize so the first nonzero coefficient is +1 in max-norm scale
    double sign = 1;
    for (double c : row)
      if (c != 0) {
        sign = c > 0 ? 1 : -1;
        break;
      }
    for (double& c : row) c = c / m * sign;
    b = b / m * sign;
    std::string key;
    char buf[32];
    for (double c : row) {
      std::snprintf(buf, sizeof buf, "%.12g,", c == 0 ? 0.0 : c);
      key += buf;
    }
    std::snprintf(buf, sizeof buf, "%.12g", b == 0 ? 0.0 : b);
    key += buf;
    if (seen.insert(key).second) planes.push_back({std::move(row), b});
  };
  for (const auto& a : p.atoms) add(a.coeffs, -a.offset);
  for (size_t i = 0; i < n; ++i) {
    std::vector<double> e(n, 0.0);
    e[i] = 1;
    add(e, p.lo[i]);
    add(e, p.hi[i]);
  }
  return planes;
}

struct CellGroup {
  std::vector<double> sum;
  std::vector<double> sample;
  int count = 0;
};

Outcome enumerate_vertices(const Problem& p, const Deadline& deadline) {
  const size_t n = p.dim();
  Outcome out;
  auto planes = arrangement_planes(p);
  const size_t H = planes.size();

  std::vector<uint8_t> truth;
  std::map<std::vector<uint8_t>, CellGroup> best_cells;
  std::vector<double> cand(n);

  auto in_box = [&](std::span<const double> v) {
    for (size_t i = 0; i < n; ++i) {
      double tol = 1e-9 * std::max(1.0, std::fabs(v[i]));
      if (v[i] < p.lo[i] - tol || v[i] > p.hi[i] + tol) return false;
    }
    return true;
  };

  auto consider = [&](std::span<const double> v) {
    if (!in_box(v)) return;
    int cutoff = out.found ? out.obj.violations : -1;
    Objective o = full_eval(p, v, truth, cutoff);
    if (out.found && out.obj.better_than(o)) return;
    if (!out.found || o.better_than(out.obj)) {
      out.found = true;
      out.obj = o;
      best_cells.clear();
    }
    auto& g = best_cells[truth];
    if (g.count == 0) {
      g.sum.assign(n, 0.0);
      g.sample.assign(v.begin(), v.end());
    }
    for (size_t i = 0; i < n; ++i) g.sum[i] += v[i];
    ++g.count;
  };

  std::unordered_set<std::string> vertices;
  std::vector<size_t> idx(n);
  for (size_t i = 0; i < n; ++i) idx[i] = i;
  Eigen::MatrixXd A(n, n);
  Eigen::VectorXd b(n);
  size_t patterns = 1;
  for (size_t i = 0; i < n; ++i) patterns *= 3;
  size_t counter = 0;
  bool done = H < n;
  while (!done) {
    if ((++counter & 1023) == 0 && deadline.passed()) {
      out.timed_out = true;
      break;
    }
    for (size_t r = 0; r < n; ++r) {
      for (size_t c = 0; c < n; ++c) A(r, c) = planes[idx[r]].n[c];
      b(r) = planes[idx[r]].b;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    lu.setThreshold(1e-10);
    if (lu.rank() == static_cast<Eigen::Index>(n)) {
      Eigen::VectorXd v = lu.solve(b);
      std::vector<double> vx(v.data(), v.data() + n);
      if (in_box(vx)) {
        for (size_t i = 0; i < n; ++i) vx[i] = std::clamp(vx[i], p.lo[i], p.hi[i]);
        std::string key;
        char buf[32];
        for (double c : vx) {
          std::snprintf(buf, sizeof buf, "%.11g,", c == 0 ? 0.0 : c);
          key += buf;
        }
        if (vertices.insert(key).second) {
          Eigen::MatrixXd inv = lu.inverse();
          double scale = 1;
          for (double c : vx) scale = std::max(scale, std::fabs(c));
          const double eps = 1e-7 * scale;
          Eigen::VectorXd s(n);
          for (size_t code = 0; code < patterns; ++code) {
            size_t c = code;
            for (size_t i = 0; i < n; ++i) {
              s(i) = double(int(c % 3) - 1);
              c /= 3;
            }
            Eigen::VectorXd step = inv * s;
            for (size_t i = 0; i < n; ++i) cand[i] = vx[i] + eps * step(i);
            consider(cand);
          }
        }
      }
    }
    // next combination
    int i = static_cast<int>(n) - 1;
    while (i >= 0 && idx[i] == H - n + i) --i;
    if (i < 0) {
      done = true;
    } else {
      ++idx[i];
      for (size_t j = i + 1; j < n; ++j) idx[j] = idx[j - 1] + 1;
    }
  }
  if (!out.found) {
    // no vertex inside the box (cannot happen for a nonempty box, kept for safety)
    std::vector<double> mid(n);
    for (size_t i = 0; i < n; ++i) mid[i] = 0.5 * (p.lo[i] + p.hi[i]);
    consider(mid);
  }
  const CellGroup* pick = nullptr;
  for (const auto& [pat, g] : best_cells)
    if (!pick || g.count > pick->count) pick = &g;
  out.x = pick->sample;
  std::vector<double> centroid(n);
  for (size_t i = 0; i < n; ++i) centroid[i] = pick->sum[i] / pick->count;
  if (full_eval(p, centroid, truth).same_as(out.obj)) out.x = centroid;
  out.exhaustive = !out.timed_out;
  return out;
}

// ---------------------------------------------------------------------------
// Line sweeps: along x + t d every atom changes truth only at its zero
// crossings, so the objective is piecewise constant and each piece can be
// probed once.

struct Breaks {
  std::vector<double> ts;
  bool exact = true;
};

// Real roots of sum c[k] t^k in (lo, hi).
std::vector<double> poly_roots(std::vector<double> c, double lo, double hi) {
  double m = 0;
  for (double v : c) m = std::max(m, std::fabs(v));
  while (c.size() > 1 && std::fabs(c.back()) <= 1e-12 * m) c.pop_back();
  std::vector<double> r;
  if (c.size() <= 1) return r;
  if (c.size() == 2) {
    r.push_back(-c[0] / c[1]);
  } else if (c.size() == 3) {
    double a = c[2], b = c[1], cc = c[0];
    double disc = b * b - 4 * a * cc;
    if (disc < 0 && disc > -1e-12 * (b * b + std::fabs(4 * a * cc))) disc = 0;
    if (disc >= 0) {
      double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
      if (q != 0) {
        r.push_back(q / a);
        r.push_back(cc / q);
      } else {
        r.push_back(0.0);
      }
    }
  } else {
    const int deg = static_cast<int>(c.size()) - 1;
    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(deg, deg);
    for (int i = 1; i < deg; ++i) comp(i, i - 1) = 1;
    for (int i = 0; i < deg; ++i) comp(i, deg - 1) = -c[i] / c[deg];
    Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
    for (int i = 0; i < deg; ++i) {
      auto z = es.eigenvalues()(i);
      if (std::fabs(z.imag()) <= 1e-7 * std::max(1.0, std::fabs(z.real()))) r.push_back(z.real());
    }
  }
  std::vector<double> in;
  for (double t : r)
    if (std::isfinite(t) && t > lo && t < hi) in.push_back(t);
  return in;
}

class Sweeper {
 public:
  Sweeper(const Problem& p, const Deadline& d) : p_(p), deadline_(d) {
    point_.resize(p.dim());
    dirty_stamp_.assign(p.hard.size() + p.soft.size(), 0);
    atom_stamp_.assign(p.atoms.size(), 0);
  }

  bool polynomial_everywhere = true;  // set false once any atom needed grid search

  // One sweep from x along d. Returns the new point and its objective; the
  // current point is always a candidate so the result is never worse.
  Objective sweep(std::vector<double>& x, std::span<const double> d, const Objective& current) {
    const size_t n = p_.dim();
    double tmin = -INFINITY, tmax = INFINITY;
    for (size_t i = 0; i < n; ++i) {
      if (d[i] == 0) continue;
      double a = (p_.lo[i] - x[i]) / d[i], b = (p_.hi[i] - x[i]) / d[i];
      if (a > b) std::swap(a, b);
      tmin = std::max(tmin, a);
      tmax = std::min(tmax, b);
    }
    tmin = std::min(tmin, 0.0);
    tmax = std::max(tmax, 0.0);
    if (!(tmax > tmin)) return current;

    // events: (t, atom)
    events_.clear();
    dynamic_.clear();
    for (size_t a = 0; a < p_.atoms.size(); ++a) {
      Breaks br = breaks(p_.atoms[a], x, d, tmin, tmax);
      if (!br.exact) {
        dynamic_.push_back(static_cast<int>(a));
        polynomial_everywhere = false;
      }
      for (double t : br.ts) events_.push_back({t, static_cast<int>(a)});
    }
    std::sort(events_.begin(), events_.end());

    cands_.clear();
    cands_.push_back(tmin);
    cands_.push_back(tmax);
    cands_.push_back(0.0);
    for (const auto& e : events_) cands_.push_back(e.t);
    std::sort(cands_.begin(), cands_.end());
    cands_.erase(std::unique(cands_.begin(), cands_.end()), cands_.end());
    const size_t nb = cands_.size();
    for (size_t i = 0; i + 1 < nb; ++i) cands_.push_back(0.5 * (cands_[i] + cands_[i + 1]));
    std::sort(cands_.begin(), cands_.end());

    objs_.assign(cands_.size(), {});
    std::vector<uint8_t>& truth = truth_;
    // first candidate: full evaluation
    set_point(x, d, cands_[0]);
    full_eval(p_, point_, truth);
    formula_ok_.resize(p_.hard.size() + p_.soft.size());
    Objective o;
    for (size_t i = 0; i < p_.hard.size(); ++i) {
      formula_ok_[i] = p_.hard[i].eval(truth);
      if (!formula_ok_[i]) ++o.violations;
    }
    for (size_t i = 0; i < p_.soft.size(); ++i) {
      formula_ok_[p_.hard.size() + i] = p_.soft[i].eval(truth);
      if (formula_ok_[p_.hard.size() + i]) o.soft += p_.weights[i];
    }
    objs_[0] = o;
    size_t ev_lo = 0;
    for (size_t k = 1; k < cands_.size(); ++k) {
      const double t0 = cands_[k - 1], t1 = cands_[k];
      const double tol = 1e-9 * std::max(1.0, std::max(std::fabs(t0), std::fabs(t1)));
      set_point(x, d, t1);
      ++stamp_;
      changed_.clear();
      auto touch = [&](int a) {
        if (atom_stamp_[a] == stamp_) return;
        atom_stamp_[a] = stamp_;
        uint8_t v = atom_truth(p_.atoms[a], p_.atoms[a].value(point_));
        if (v != truth[a]) {
          truth[a] = v;
          changed_.push_back(a);
        }
      };
      while (ev_lo < events_.size() && events_[ev_lo].t < t0 - tol) ++ev_lo;
      for (size_t e = ev_lo; e < events_.size() && events_[e].t <= t1 + tol; ++e) touch(events_[e].atom);
      for (int a : dynamic_) touch(a);
      for (int a : changed_) {
        for (int f : p_.atom_users[a]) {
          if (dirty_stamp_[f] == stamp_) continue;
          dirty_stamp_[f] = stamp_;
          const size_t nh = p_.hard.size();
          bool ok = f < static_cast<int>(nh) ? p_.hard[f].eval(truth) : p_.soft[f - nh].eval(truth);
          if (ok != bool(formula_ok_[f])) {
            formula_ok_[f] = ok;
            if (f < static_cast<int>(nh)) {
              o.violations += ok ? -1 : 1;
            } else {
              o.soft += ok ? p_.weights[f - nh] : -p_.weights[f - nh];
            }
          }
        }
      }
      objs_[k] = o;
    }

    // best objective, then the widest run of consecutive optimal candidates
    Objective best = objs_[0];
    for (const auto& ob : objs_)
      if (ob.better_than(best)) best = ob;
    size_t run_s = 0, run_e = 0;
    double run_len = -1;
    for (size_t k = 0; k < objs_.size();) {
      if (!objs_[k].same_as(best)) {
        ++k;
        continue;
      }
      size_t e = k;
      while (e + 1 < objs_.size() && objs_[e + 1].same_as(best)) ++e;
      double len = cands_[e] - cands_[k];
      if (len > run_len) {
        run_len = len;
        run_s = k;
        run_e = e;
      }
      k = e + 1;
    }
    std::vector<double> trial(n);
    auto try_t = [&](double t) {
      for (size_t i = 0; i < n; ++i) trial[i] = std::clamp(x[i] + t * d[i], p_.lo[i], p_.hi[i]);
      return full_eval(p_, trial, truth_scratch_);
    };
    Objective got = try_t(0.5 * (cands_[run_s] + cands_[run_e]));
    if (!got.same_as(best)) got = try_t(cands_[(run_s + run_e) / 2]);
    if (current.better_than(got)) return current;
    x = trial;
    return got;
  }

 private:
  struct Event {
    double t;
    int atom;
    bool operator<(const Event& o) const { return t < o.t || (t == o.t && atom < o.atom); }
  };

  void set_point(std::span<const double> x, std::span<const double> d, double t) {
    for (size_t i = 0; i < x.size(); ++i) point_[i] = x[i] + t * d[i];
  }

  double value_at(const Atom& a, std::span<const double> x, std::span<const double> d, double t) {
    for (size_t i = 0; i < x.size(); ++i) scratch_[i] = x[i] + t * d[i];
    return a.value(scratch_);
  }

  Breaks breaks(const Atom& a, std::span<const double> x, std::span<const double> d, double lo, double hi) {
    Breaks out;
    scratch_.resize(x.size());
    if (a.affine) {
      double v0 = a.offset, s = 0;
      for (size_t i = 0; i < x.size(); ++i) {
        v0 += a.coeffs[i] * x[i];
        s += a.coeffs[i] * d[i];
      }
      if (s != 0) {
        double t = -v0 / s;
        if (t > lo && t < hi) out.ts.push_back(t);
      }
      return out;
    }
    // polynomial of degree <= 4 along the line? fit on 5 nodes, verify on 2
    const double span = std::isfinite(hi - lo) ? hi - lo : 2e6;
    const double h = std::max(1e-3, std::min(span, 200.0) / 8.0);
    double tc = std::clamp(0.0, lo, hi);
    double nodes[7] = {tc - 2 * h, tc - h, tc, tc + h, tc + 2 * h, tc + 0.5 * h, tc - 1.5 * h};
    double vals[7];
    double mag = 0;
    for (int k = 0; k < 7; ++k) {
      vals[k] = value_at(a, x, d, nodes[k]);
      if (!std::isfinite(vals[k])) {
        mag = NAN;
        break;
      }
      mag = std::max(mag, std::fabs(vals[k]));
    }
    if (std::isfinite(mag)) {
      Eigen::Matrix<double, 5, 5> V;
      Eigen::Matrix<double, 5, 1> y;
      for (int k = 0; k < 5; ++k) {
        double u = (nodes[k] - tc) / h, pw = 1;
        for (int j = 0; j < 5; ++j) {
          V(k, j) = pw;
          pw *= u;
        }
        y(k) = vals[k];
      }
      Eigen::Matrix<double, 5, 1> c = V.fullPivLu().solve(y);
      bool ok = true;
      for (int k = 5; k < 7 && ok; ++k) {
        double u = (nodes[k] - tc) / h, pw = 1, pv = 0;
        for (int j = 0; j < 5; ++j) {
          pv += c(j) * pw;
          pw *= u;
        }
        ok = std::fabs(pv - vals[k]) <= 1e-8 * std::max(1.0, mag);
      }
      if (ok) {
        std::vector<double> cc(c.data(), c.data() + 5);
        for (double u : poly_roots(cc, (lo - tc) / h, (hi - tc) / h)) out.ts.push_back(tc + u * h);
        return out;
      }
    }
    // general term: sampled sign changes refined by bisection
    out.exact = false;
    const int G = 256;
    double glo = lo, ghi = hi;
    if (!std::isfinite(glo)) glo = -1e6;
    if (!std::isfinite(ghi)) ghi = 1e6;
    double prev_t = glo, prev_v = value_at(a, x, d, glo);
    for (int k = 1; k <= G; ++k) {
      double t = glo + (ghi - glo) * k / G;
      double v = value_at(a, x, d, t);
      if (std::isfinite(v) && std::isfinite(prev_v) && ((prev_v < 0) != (v < 0) || v == 0)) {
        double l = prev_t, r = t, vl = prev_v;
        for (int it = 0; it < 60; ++it) {
          double m = 0.5 * (l + r), vm = value_at(a, x, d, m);
          if ((vm < 0) == (vl < 0)) {
            l = m;
            vl = vm;
          } else {
            r = m;
          }
        }
        out.ts.push_back(0.5 * (l + r));
      }
      prev_t = t;
      prev_v = v;
    }
    return out;
  }

  const Problem& p_;
  const Deadline& deadline_;
  std::vector<double> point_, scratch_, cands_;
  std::vector<Event> events_;
  std::vector<int> dynamic_, changed_;
  std::vector<Objective> objs_;
  std::vector<uint8_t> truth_, truth_scratch_, formula_ok_;
  std::vector<uint32_t> dirty_stamp_, atom_stamp_;
  uint32_t stamp_ = 0;
};

Outcome multistart(const Problem& p, const BuiltinOptions& opts, const Deadline& deadline) {
  const size_t n = p.dim();
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Sweeper sw(p, deadline);
  Outcome best;
  std::vector<uint8_t> truth;
  const double total = p.total_weight();
  auto perfect = [&](const Objective& o) { return o.violations == 0 && o.soft >= total - 1e-12; };

  for (int s = 0; s < std::max(1, opts.starts); ++s) {
    std::vector<double> x(n);
    for (size_t i = 0; i < n; ++i) {
      double lo = std::max(p.lo[i], -100.0), hi = std::min(p.hi[i], 100.0);
      if (lo > hi) {
        lo = p.lo[i];
        hi = std::min(p.hi[i], lo + 200.0);
      }
      if (s == 0) {
        x[i] = std::clamp(0.0, lo, hi);
      } else {
        x[i] = std::uniform_real_distribution<double>(lo, hi)(rng);
      }
    }
    Objective cur = full_eval(p, x, truth);
    std::vector<double> d(n);
    for (int it = 0; it < opts.iterations; ++it) {
      bool improved = false;
      for (size_t k = 0; k < 2 * n; ++k) {
        if (deadline.passed()) {
          best.timed_out = true;
          break;
        }
        if (k < n) {
          std::fill(d.begin(), d.end(), 0.0);
          d[k] = 1;
        } else {
          double norm = 0;
          for (auto& v : d) {
            v = gauss(rng);
            norm += v * v;
          }
          norm = std::sqrt(norm);
          if (norm == 0) continue;
          for (auto& v : d) v /= norm;
        }
        Objective next = sw.sweep(x, d, cur);
        if (next.better_than(cur)) improved = true;
        cur = next;
        if (s == 0 && it == 0 && k == 0 && n == 1 && sw.polynomial_everywhere) best.exhaustive = true;
      }
      if (!improved || best.timed_out) break;
    }
    if (!best.found || cur.better_than(best.obj)) {
      best.found = true;
      best.obj = cur;
      best.x = x;
    }
    if (best.timed_out || perfect(best.obj)) break;
  }
  if (!sw.polynomial_everywhere) best.exhaustive = false;
  return best;
}

Outcome solve_problem(const Problem& p, const BuiltinOptions& opts, double timeout) {
  Deadline deadline(timeout);
  std::vector<uint8_t> truth;
  if (p.dim() == 0) {
    Outcome o;
    o.found = true;
    o.obj = full_eval(p, std::span<const double>{}, truth);
    o.exhaustive = true;
    return o;
  }
  Outcome out;
  if (p.all_affine() && binom(arrangement_planes(p).size(), p.dim()) <= double(opts.vertex_cap)) {
    out = enumerate_vertices(p, deadline);
  } else {
    out = multistart(p, opts, deadline);
  }
  if (has_eq(p) && p.dim() >= 2) out.exhaustive = false;
  return out;
}

SolveResult to_result(const Problem& p, const Outcome& o) {
  SolveResult r;
  r.heuristic = !o.exhaustive;
  if (o.found && o.obj.violations == 0) {
    r.status = o.timed_out ? SolveStatus::Timeout : SolveStatus::Sat;
    ParamAssignment m;
    for (size_t i = 0; i < p.dim(); ++i) m[p.vars[i].name] = o.x[i];
    r.model = std::move(m);
    r.satisfied_soft_weight = o.obj.soft;
    if (o.timed_out) r.note = "best-so-far at timeout";
  } else if (o.exhaustive && !o.timed_out) {
    r.status = SolveStatus::Unsat;
  } else {
    r.status = o.timed_out ? SolveStatus::Timeout : SolveStatus::Unknown;
    r.note = "no feasible point found";
  }
  return r;
}

}  // namespace

SolveResult BuiltinBackend::solve_maxsmt(const MaxSmtInstance& inst) {
  inst.validate();
  Problem p = Problem::build(inst);
  return to_result(p, solve_problem(p, opts_, inst.timeout));
}

SolveResult BuiltinBackend::check_sat(const std::vector<VarDecl>& decls, const Formula& f, double timeout) {
  // Pin variables fixed by top-level `v = c` conjuncts before searching.
  std::map<std::string, double> fixed;
  std::vector<Formula> rest;
  std::vector<Formula> todo{fold(f)};
  bool conflict = false;
  while (!todo.empty()) {
    Formula g = todo.back();
    todo.pop_back();
    if (g.op() == Op::And) {
      for (const auto& k : g.kids()) todo.push_back(k);
      continue;
    }
    if (g.op() == Op::Cmp && g.comparator() == Comparator::Eq) {
      const Formula& l = g.kids()[0];
      const Formula& r = g.kids()[1];
      const Formula* v = nullptr;
      const Formula* c = nullptr;
      if (l.op() == Op::Var && r.is_const()) v = &l, c = &r;
      if (r.op() == Op::Var && l.is_const()) v = &r, c = &l;
      if (v) {
        auto [it, fresh] = fixed.emplace(v->name(), c->value());
        if (!fresh && it->second != c->value()) conflict = true;
        continue;
      }
    }
    rest.push_back(g);
  }
  std::vector<VarDecl> free_decls;
  for (const auto& d : decls) {
    auto it = fixed.find(d.name);
    if (it == fixed.end()) {
      free_decls.push_back(d);
      continue;
    }
    double v = it->second;
    if (v > d.hi || v < d.lo || (d.lo_open && v == d.lo)) conflict = true;
  }
  if (conflict) return SolveResult{SolveStatus::Unsat, std::nullopt, std::nullopt, false, "conflicting equalities"};

  std::map<std::string, Formula> repl;
  for (const auto& [k, v] : fixed) repl.emplace(k, Formula::constant(v));
  Formula g = fold(substitute(land(rest), repl));
  std::vector<Formula> parts;
  if (g.op() == Op::And) {
    parts = g.kids();
  } else {
    parts.push_back(g);
  }

  // Conjuncts sharing no variables are solved separately.
  std::map<std::string, std::string> parent;
  std::function<std::string(const std::string&)> find = [&](const std::string& v) -> std::string {
    auto it = parent.find(v);
    if (it == parent.end() || it->second == v) return v;
    return it->second = find(it->second);
  };
  std::vector<std::set<std::string>> part_vars;
  for (const auto& f2 : parts) {
    part_vars.push_back(variables(f2));
    const auto& vs = part_vars.back();
    for (const auto& v : vs) parent.emplace(v, v);
    for (const auto& v : vs) parent[find(v)] = find(*vs.begin());
  }
  std::map<std::string, std::vector<Formula>> groups;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (part_vars[i].empty()) {
      if (parts[i].is_false()) return SolveResult{SolveStatus::Unsat, std::nullopt, std::nullopt, false, ""};
      continue;
    }
    groups[find(*part_vars[i].begin())].push_back(parts[i]);
  }
  std::map<std::string, std::vector<VarDecl>> group_decls;
  ParamAssignment model;
  for (const auto& d : free_decls) {
    if (parent.count(d.name)) {
      group_decls[find(d.name)].push_back(d);
    } else {
      model[d.name] = std::clamp(0.0, d.lo, d.hi);
      if (d.lo_open && model[d.name] <= d.lo) model[d.name] = 0.5 * (d.lo + std::min(d.hi, d.lo + 1.0));
    }
  }
  auto start = Clock::now();
  SolveResult out{SolveStatus::Sat, std::nullopt, std::nullopt, false, ""};
  for (auto& [root, fs] : groups) {
    MaxSmtInstance inst;
    inst.declarations = group_decls[root];
    inst.hard = fs;
    double used = std::chrono::duration<double>(Clock::now() - start).count();
    inst.timeout = std::max(1e-3, timeout - used);
    SolveResult r = solve_maxsmt(inst);
    out.heuristic = out.heuristic || r.heuristic;
    if (r.status == SolveStatus::Unsat) return SolveResult{SolveStatus::Unsat, std::nullopt, std::nullopt, false, r.note};
    if (r.status != SolveStatus::Sat) {
      out.status = r.status;
      out.note = r.note;
      continue;
    }
    for (const auto& [k, v] : *r.model) model[k] = v;
  }
  if (out.status != SolveStatus::Sat) return out;
  for (const auto& [k, v] : fixed) model[k] = v;
  out.model = std::move(model);
  return out;
}

}  // namespace smtilp
