#include "smtilp/loop.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <functional>
#include <cmath>
#include <set>
#include <thread>

namespace smtilp {

void LoopConfig::validate() const {
  if (t_max < 1) throw Error("t_max must be at least 1");
  if (!(theta_conv > 0)) throw Error("theta_conv must be positive");
  if (literal_budget < 1) throw Error("literal budget must be at least 1");
  if (!(solver_timeout > 0)) throw Error("solver timeout must be positive");
  if (time_budget < 0) throw Error("time budget must be non-negative");
  if (top_k < 1) throw Error("top_k must be at least 1");
  if (workers < 1) throw Error("workers must be at least 1");
  if (max_background_additions < 0) throw Error("max_background_additions must be non-negative");
}

double quality(const std::vector<ScoredRule>& rules) {
  if (rules.empty()) return 0.0;
  double s = 0;
  for (const auto& r : rules) s += r.stats.f1;
  return s / double(rules.size());
}

bool is_degenerate(const ScoredRule& r) {
  if (r.degenerate) return true;
  auto collapsed = [&](const Literal& l, const char* lo, const char* hi) {
    auto a = r.params.find(param_key(l.slot, lo));
    auto b = r.params.find(param_key(l.slot, hi));
    return a != r.params.end() && b != r.params.end() && b->second - a->second <= 1e-9;
  };
  for (const auto& l : r.clause.body) {
    if (l.kind != Literal::Kind::Parametric) continue;
    if (l.template_id == "interval1d" && collapsed(l, "l", "u")) return true;
    if (l.template_id == "box2d" && (collapsed(l, "xmin", "xmax") || collapsed(l, "ymin", "ymax"))) return true;
    if (l.template_id == "annulus" && collapsed(l, "rmin", "rmax")) return true;
    if (l.template_id == "quad_strip" && collapsed(l, "l", "u")) return true;
  }
  return false;
}

std::vector<size_t> greedy_cover(const std::vector<Coverage>& cov) {
  std::vector<size_t> picked;
  if (cov.empty()) return picked;
  std::vector<bool> pos_done(cov[0].pos.size(), false), neg_done(cov[0].neg.size(), false);
  std::vector<bool> used(cov.size(), false);
  for (;;) {
    long best_gain = 0;
    size_t best = cov.size();
    for (size_t i = 0; i < cov.size(); ++i) {
      if (used[i]) continue;
      long g = 0;
      for (size_t k = 0; k < cov[i].pos.size(); ++k) g += (cov[i].pos[k] && !pos_done[k]) ? 1 : 0;
      for (size_t k = 0; k < cov[i].neg.size(); ++k) g -= (cov[i].neg[k] && !neg_done[k]) ? 1 : 0;
      if (g > best_gain) {
        best_gain = g;
        best = i;
      }
    }
    if (best == cov.size()) break;
    used[best] = true;
    picked.push_back(best);
    for (size_t k = 0; k < cov[best].pos.size(); ++k) pos_done[k] = pos_done[k] || cov[best].pos[k];
    for (size_t k = 0; k < cov[best].neg.size(); ++k) neg_done[k] = neg_done[k] || cov[best].neg[k];
  }
  return picked;
}

namespace {

std::vector<double> sorted_values(const ParamAssignment& p) {
  std::vector<double> v;
  for (const auto& [k, x] : p) v.push_back(x);
  std::sort(v.begin(), v.end());
  return v;
}

bool same_params(const ParamAssignment& a, const ParamAssignment& b) {
  auto va = sorted_values(a), vb = sorted_values(b);
  if (va.size() != vb.size()) return false;
  for (size_t i = 0; i < va.size(); ++i)
    if (std::fabs(va[i] - vb[i]) > 1e-9) return false;
  return true;
}

bool rule_order(const ScoredRule& a, const ScoredRule& b) {
  if (priority(a.origin) != priority(b.origin)) return priority(a.origin) < priority(b.origin);
  if (a.score != b.score) return a.score > b.score;
  return a.to_string() < b.to_string();
}

}  // namespace

std::vector<ScoredRule> post_process(std::vector<ScoredRule> rules, const Dataset& dataset, Selection selection,
                                     int top_k) {
  std::stable_sort(rules.begin(), rules.end(), rule_order);
  std::vector<ScoredRule> kept;
  std::vector<std::string> keys;
  std::vector<Coverage> covs;
  for (auto& r : rules) {
    std::string key = canonical_key(r.clause);
    bool dup = false;
    for (size_t i = 0; i < kept.size() && !dup; ++i) dup = keys[i] == key && same_params(kept[i].params, r.params);
    if (dup) continue;
    Coverage cov = coverage(r.clause, r.params, dataset);
    r.stats = compute_stats(r.clause, cov, dataset);
    r.score = score_fn(r.stats);
    if (is_degenerate(r) || r.stats.cov_pos == 0) continue;
    // same body asserted with other parameters but covering disjoint positives
    bool contradicts = false;
    for (size_t i = 0; i < kept.size() && !contradicts; ++i) {
      if (keys[i] != key || kept[i].clause.head.predicate != r.clause.head.predicate) continue;
      bool overlap = false;
      for (size_t k = 0; k < cov.pos.size(); ++k) overlap = overlap || (cov.pos[k] && covs[i].pos[k]);
      contradicts = !overlap;
    }
    if (contradicts) continue;
    kept.push_back(r);
    keys.push_back(key);
    covs.push_back(std::move(cov));
  }
  std::vector<ScoredRule> out;
  if (selection == Selection::TopK) {
    for (size_t i = 0; i < kept.size() && static_cast<int>(out.size()) < top_k; ++i) out.push_back(kept[i]);
    return out;
  }
  for (size_t i : greedy_cover(covs)) out.push_back(kept[i]);
  return out;
}

Polarity predict(const std::vector<ScoredRule>& rules, const Example& example, const Background& background) {
  for (const auto& r : rules)
    if (covers(r.clause, r.params, example, background)) return Polarity::Positive;
  return Polarity::Negative;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Candidate {
  Clause clause;
  Origin origin = Origin::Structured;
};

struct Outcome {
  std::optional<ScoredRule> rule;
  std::string prune_reason;
  int solver_calls = 0;
};

Outcome evaluate_candidate(const Candidate& cand, const Dataset& work, SmtBackend& backend, const LoopConfig& cfg,
                           const std::set<std::string>& skip, double remaining) {
  Outcome out;
  FitOptions fo;
  fo.timeout = std::max(0.05, std::min(cfg.solver_timeout, remaining));
  if (cfg.sequential_covering) fo.skip_positives = skip;

  std::optional<ScoredRule> rule;
  std::optional<ParamAssignment> frozen;
  if (cfg.param_policy && cand.clause.has_parameters()) frozen = cfg.param_policy(cand.clause, work);
  if (frozen) {
    ScoredRule r;
    r.clause = cand.clause;
    r.params = *frozen;
    r.stats = compute_stats(r.clause, r.params, work);
    r.score = score_fn(r.stats);
    rule = r;
  } else {
    InstantiateResult ir = instantiate(cand.clause, work, backend, fo);
    out.solver_calls += ir.solver_calls;
    if (ir.rule && ir.rule->score < cfg.theta && cfg.partial_fit_retry && !ir.rule->relaxed_fit &&
        cand.clause.has_parameters()) {
      FitOptions soft = fo;
      soft.positives_soft = true;
      soft.positive_weight = 1.0;
      InstantiateResult alt = instantiate(cand.clause, work, backend, soft);
      out.solver_calls += alt.solver_calls;
      if (alt.rule && alt.rule->score > ir.rule->score) ir = std::move(alt);
    }
    if (!ir.rule) {
      out.prune_reason = ir.reason;
      return out;
    }
    rule = std::move(ir.rule);
  }
  rule->origin = cand.origin;
  if (rule->relaxed_fit && rule->origin == Origin::Structured) rule->origin = Origin::Other;
  VerifyResult v = verify(*rule, work, backend, cfg.theta, fo.timeout);
  if (!v.keep) {
    out.prune_reason = v.reason;
    return out;
  }
  out.rule = std::move(rule);
  return out;
}

// A clause whose symbolic part grounds on at most one positive is overly
// specific whatever its parameters.
bool structurally_viable(const Clause& c, const Dataset& d) {
  if (d.positives.size() < 10) return true;
  bool symbolic = false;
  for (const auto& l : c.body) symbolic = symbolic || !l.is_numeric();
  if (!symbolic) return true;
  int hits = 0;
  for (const auto& e : d.positives) {
    if (!ground_clause(c, e, d.background).empty() && ++hits > 1) return true;
  }
  return false;
}

}  // namespace

LearnResult run_learning(const Dataset& dataset, LanguageBias bias, const LoopConfig& cfg,
                         const BackendFactory& backends) {
  cfg.validate();
  if (dataset.size() == 0) throw Error("dataset has no examples");
  const auto start = Clock::now();
  auto remaining = [&] {
    return cfg.time_budget > 0 ? cfg.time_budget - seconds_since(start) : std::numeric_limits<double>::infinity();
  };

  LearnResult res;
  Dataset work = dataset;
  bias.literal_budget = cfg.literal_budget;
  bias.predicate_invention = cfg.predicate_invention;
  if (cfg.predicate_invention) {
    auto inv = invent_predicates(work, bias);
    adopt_invented(work, bias, inv);
    for (const auto& ip : inv) res.definitions.push_back({ip.name, ip.definition, {}});
  }

  std::vector<std::unique_ptr<SmtBackend>> pool;
  for (int i = 0; i < cfg.workers; ++i) pool.push_back(backends());

  std::vector<ScoredRule> H;
  std::set<std::string> in_h;
  std::set<std::string> evaluated, last_skip;
  double q_prev = 0;
  double dq = std::numeric_limits<double>::infinity();
  int t = 0;
  while (dq > cfg.theta_conv && t < cfg.t_max) {
    if (remaining() <= 0) {
      res.hit_time_budget = true;
      break;
    }
    IterationLog log;
    log.t = t;
    const auto it_start = Clock::now();

    std::vector<Candidate> cands;
    for (auto& c : generate_clauses(work, bias)) {
      bool learned = false;
      for (const auto& l : c.body) learned = learned || l.predicate.rfind("learned_", 0) == 0;
      cands.push_back({std::move(c), learned ? Origin::Other : Origin::Structured});
    }
    if (t == 0 && cands.empty() && !cfg.arithmetic_step) throw Error("empty hypothesis space");
    log.search_s = seconds_since(it_start);

    std::vector<ScoredRule> Vt;
    const auto solve_start = Clock::now();
    auto admit = [&](ScoredRule r) {
      std::string key = canonical_key(r.clause);
      for (const auto& [k, v] : r.params) key += "|" + k + "=" + format_param(v);
      if (!in_h.insert(key).second) return;
      r.iteration = t;
      Vt.push_back(std::move(r));
    };

    if (cfg.arithmetic_step && t == 0) {
      SmtBackend& be = *pool[0];
      double to = std::max(0.05, std::min(cfg.solver_timeout, remaining()));
      auto arith = learn_range_relations(dataset, be, to, cfg.literal_budget);
      auto lin = learn_arithmetic_relations(dataset, be, to, cfg.arithmetic_3d, cfg.literal_budget);
      arith.insert(arith.end(), lin.begin(), lin.end());
      log.solver_calls += static_cast<int>(arith.size());
      for (auto& r : arith) {
        VerifyResult v = verify(r, dataset, be, cfg.theta, to);
        if (v.keep) {
          admit(std::move(r));
        } else {
          ++res.prune_reasons[v.reason];
        }
      }
    }

    std::set<std::string> skip;
    for (const auto& r : H) {
      if (r.stats.precision <= cfg.background_precision) continue;
      for (const auto& e : work.positives)
        if (!skip.count(e.id) && covers(r.clause, r.params, e, work.background)) skip.insert(e.id);
    }

    std::vector<Candidate> todo;
    // a clause fitted under the same covered set gives the same rule again
    const bool same_skip = t > 0 && skip == last_skip;
    last_skip = skip;
    // every positive is already covered by a precise rule: nothing left to fit
    const bool all_covered = cfg.sequential_covering && !work.positives.empty() && skip.size() >= work.positives.size();
    for (auto& c : cands) {
      if (all_covered) break;
      std::string key = canonical_key(c.clause);
      if (same_skip && evaluated.count(key)) continue;
      evaluated.insert(key);
      if (structurally_viable(c.clause, work)) {
        todo.push_back(std::move(c));
      } else {
        ++res.prune_reasons["overly specific"];
      }
    }
    log.candidates = cands.size();

    std::vector<Outcome> outcomes(todo.size());
    std::atomic<size_t> next{0};
    std::atomic<bool> out_of_time{false};
    auto worker = [&](SmtBackend& be) {
      for (;;) {
        size_t i = next.fetch_add(1);
        if (i >= todo.size()) return;
        double left = remaining();
        if (left <= 0) {
          out_of_time = true;
          return;
        }
        outcomes[i] = evaluate_candidate(todo[i], work, be, cfg, skip, left);
      }
    };
    if (pool.size() == 1) {
      worker(*pool[0]);
    } else {
      std::vector<std::thread> threads;
      for (auto& be : pool) threads.emplace_back(worker, std::ref(*be));
      for (auto& th : threads) th.join();
    }
    if (out_of_time) res.hit_time_budget = true;
    for (auto& o : outcomes) {
      log.solver_calls += o.solver_calls;
      if (o.rule) {
        admit(std::move(*o.rule));
      } else if (!o.prune_reason.empty()) {
        ++res.prune_reasons[o.prune_reason];
      }
    }
    log.solve_s = seconds_since(solve_start);

    // (4) accumulate and measure
    for (const auto& r : Vt) H.push_back(r);
    log.validated = Vt.size();
    log.quality = quality(Vt);
    dq = std::fabs(log.quality - q_prev);
    log.delta_q = dq;
    q_prev = log.quality;

    // (5) promote precise rules into the background early on
    if (t < cfg.background_iterations) {
      std::vector<const ScoredRule*> promote;
      for (const auto& r : Vt)
        if (r.stats.precision > cfg.background_precision) promote.push_back(&r);
      std::stable_sort(promote.begin(), promote.end(), [](const ScoredRule* a, const ScoredRule* b) {
        return a->score != b->score ? a->score > b->score : a->stats.precision > b->stats.precision;
      });
      if (static_cast<int>(promote.size()) > cfg.max_background_additions) promote.resize(cfg.max_background_additions);
      int k = 0;
      for (const ScoredRule* r : promote) {
        DerivedPredicate d;
        d.name = "learned_" + std::to_string(t) + "_" + std::to_string(k++);
        d.definition = r->clause;
        d.definition.head.predicate = d.name;
        d.params = r->params;
        work.background.add_derived(d);
        bias.predicates.push_back({d.name, bias.head_types, true});
        res.definitions.push_back(d);
        log.background_added.push_back(d.name);
        res.background_additions.push_back(d.name);
      }
    }
    log.wall_s = seconds_since(it_start);
    res.log.push_back(log);
    ++t;
    if (res.hit_time_budget) break;
  }

  res.hypothesis = H;
  res.final_rules = post_process(H, work, cfg.selection, cfg.top_k);
  // keep only definitions reachable from the final rules
  std::set<std::string> needed;
  std::function<void(const Clause&)> mark = [&](const Clause& c) {
    for (const auto& l : c.body) {
      if (l.is_numeric() || needed.count(l.predicate)) continue;
      for (const auto& d : res.definitions)
        if (d.name == l.predicate) {
          needed.insert(d.name);
          mark(d.definition);
        }
    }
  };
  for (const auto& r : res.final_rules) mark(r.clause);
  std::vector<DerivedPredicate> defs;
  for (const auto& d : res.definitions)
    if (needed.count(d.name)) defs.push_back(d);
  res.definitions = std::move(defs);
  return res;
}

}  // namespace smtilp
