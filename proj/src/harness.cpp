#include "smtilp/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace smtilp {

using ojson = nlohmann::ordered_json;

std::string_view to_string(AblationMode m) {
  switch (m) {
    case AblationMode::Full: return "full";
    case AblationMode::NoInvention: return "no_pi";
    case AblationMode::InventionOnly: return "pi_only";
  }
  return "full";
}

std::optional<AblationMode> parse_mode(std::string_view s) {
  for (auto m : {AblationMode::Full, AblationMode::NoInvention, AblationMode::InventionOnly})
    if (to_string(m) == s) return m;
  return std::nullopt;
}

void SuiteConfig::validate() const {
  for (const auto& [k, v] : literal_budget)
    if (v < 1) throw Error("literal budget for " + k + " must be at least 1");
  for (const auto* m : {&timeout, &ip_timeout})
    for (const auto& [k, v] : *m)
      if (!(v > 0)) throw Error("timeout for " + k + " must be positive");
  for (const auto& [k, v] : trials)
    if (v < 1) throw Error("trial count for " + k + " must be at least 1");
  if (workers < 1) throw Error("workers must be at least 1");
  if (n_examples < 0) throw Error("n_examples must be non-negative");
  if (!(solver_timeout > 0)) throw Error("solver timeout must be positive");
  if (trials_override < 0) throw Error("trial override must be non-negative");
}

namespace {

template <class T>
T lookup(const std::map<std::string, T>& m, const std::string& key, const char* what) {
  auto it = m.find(key);
  if (it == m.end()) throw Error(std::string("no ") + what + " configured for " + key);
  return it->second;
}

}  // namespace

int SuiteConfig::budget_for(const TaskInfo& t) const {
  return lookup(literal_budget, std::string(to_string(t.family)), "literal budget");
}

double SuiteConfig::timeout_for(const TaskInfo& t) const {
  if (t.family == Family::Ip) {
    auto it = ip_timeout.find(t.name);
    if (it != ip_timeout.end()) return it->second;
    auto fam = timeout.find("ip");
    if (fam != timeout.end()) return fam->second;
    throw Error("no timeout configured for " + t.name);
  }
  return lookup(timeout, std::string(to_string(t.family)), "timeout");
}

int SuiteConfig::trials_for(const TaskInfo& t) const {
  if (trials_override > 0) return trials_override;
  return lookup(trials, std::string(to_string(t.family)), "trial count");
}

SuiteConfig parse_suite_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw Error("config must be a JSON object");
  SuiteConfig c;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "literal_budget") {
        for (const auto& [k, x] : v.items()) c.literal_budget[k] = x.get<int>();
      } else if (key == "timeout") {
        for (const auto& [k, x] : v.items()) c.timeout[k] = x.get<double>();
      } else if (key == "ip_timeout") {
        for (const auto& [k, x] : v.items()) c.ip_timeout[k] = x.get<double>();
      } else if (key == "trials") {
        for (const auto& [k, x] : v.items()) c.trials[k] = x.get<int>();
      } else if (key == "backend") {
        auto s = v.get<std::string>();
        if (s == "builtin") {
          c.backend = BackendKind::Builtin;
        } else if (s == "external") {
          c.backend = BackendKind::External;
        } else {
          throw Error("unknown backend '" + s + "'");
        }
      } else if (key == "solver_command") {
        c.solver_command = v.get<std::string>();
      } else if (key == "output_dir") {
        c.output_dir = v.get<std::string>();
      } else if (key == "base_seed") {
        c.base_seed = v.get<uint64_t>();
      } else if (key == "workers") {
        c.workers = v.get<int>();
      } else if (key == "n_examples") {
        c.n_examples = v.get<int>();
      } else if (key == "solver_timeout") {
        c.solver_timeout = v.get<double>();
      } else if (key == "trials_override") {
        c.trials_override = v.get<int>();
      } else {
        throw Error("unknown config key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

SuiteConfig load_suite_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_suite_config(ss.str());
}

LoopConfig loop_config_for(const TaskInfo& t, const SuiteConfig& cfg, AblationMode mode) {
  LoopConfig lc;
  lc.literal_budget = cfg.budget_for(t);
  lc.time_budget = cfg.timeout_for(t);
  lc.solver_timeout = std::min(cfg.solver_timeout, lc.time_budget);
  lc.arithmetic_step = t.family == Family::Geometry0 || t.family == Family::Geometry1;
  lc.arithmetic_3d = t.family == Family::Geometry1;
  lc.predicate_invention = t.family == Family::Ip && mode != AblationMode::NoInvention;
  return lc;
}

BackendFactory backend_factory(const SuiteConfig& cfg, uint64_t seed) {
  BackendConfig bc;
  bc.kind = cfg.backend;
  bc.builtin.seed = seed;
  bc.external.command = cfg.solver_command;
  return [bc] { return make_backend(bc); };
}

double median_max_influence(const Dataset& train) {
  std::vector<double> v;
  for (const auto* list : {&train.positives, &train.negatives})
    for (const auto& e : *list) {
      if (!e.head || e.head->objects.empty()) continue;
      if (auto m = train.background.measurement(e.head->objects[0], "max_influence")) v.push_back(*m);
    }
  if (v.empty()) throw Error("no max_influence measurements on training heads");
  std::sort(v.begin(), v.end());
  size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double evaluate_rules(const RuleFile& rules, const Dataset& d, std::vector<Prediction>* predictions) {
  Background bg = d.background;
  for (const auto& def : rules.definitions)
    if (!bg.find_derived(def.name)) bg.add_derived(def);
  size_t correct = 0, total = 0;
  for (const auto* list : {&d.positives, &d.negatives})
    for (const auto& e : *list) {
      bool pred = predict(rules.rules, e, bg) == Polarity::Positive;
      correct += pred == e.positive() ? 1 : 0;
      ++total;
      if (predictions) predictions->push_back({e.id, e.positive(), pred});
    }
  return total ? double(correct) / double(total) : 0.0;
}

ResultRecord run_trial(const std::string& task, int trial, const SuiteConfig& cfg, AblationMode mode) {
  const TaskInfo& info = get_task(task);
  ResultRecord r;
  r.task = task;
  r.trial = trial;
  r.mode = mode;
  r.seed = cfg.base_seed + static_cast<uint64_t>(trial);
  const auto start = std::chrono::steady_clock::now();
  try {
    TaskSpec spec;
    spec.task = task;
    spec.seed = r.seed;
    spec.n_examples = cfg.n_examples;
    GeneratedTask g = generate(spec);
    LanguageBias bias = task_bias(task);
    bias.seed = r.seed;
    LoopConfig lc = loop_config_for(info, cfg, mode);
    if (mode == AblationMode::InventionOnly) {
      const double tau = median_max_influence(g.train);
      lc.param_policy = [tau](const Clause& c, const Dataset&) -> std::optional<ParamAssignment> {
        ParamAssignment p;
        for (const auto& l : c.body) {
          if (l.kind != Literal::Kind::Parametric) continue;
          if (l.template_id != "influence_threshold") return std::nullopt;
          p[param_key(l.slot, "tau")] = tau;
        }
        return p;
      };
    }
    r.learn = run_learning(g.train, bias, lc, backend_factory(cfg, r.seed));
    RuleFile rf{r.learn.definitions, r.learn.final_rules};
    r.rules_text = serialize_rules(rf);
    r.n_rules = rf.rules.size();
    r.hit_time_budget = r.learn.hit_time_budget;
    for (const auto& it : r.learn.log) {
      r.search_s += it.search_s;
      r.solve_s += it.solve_s;
    }
    r.accuracy = evaluate_rules(rf, g.test, &r.predictions);
  } catch (const Error& e) {
    r.failed = true;
    r.error = e.what();
    r.accuracy = 0;
  }
  r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

namespace {

struct Job {
  std::string task;
  int trial;
  AblationMode mode;
};

std::vector<ResultRecord> run_jobs(const std::vector<Job>& jobs, const SuiteConfig& cfg) {
  std::vector<ResultRecord> out(jobs.size());
  std::atomic<size_t> next{0};
  auto work = [&] {
    for (size_t i; (i = next.fetch_add(1)) < jobs.size();)
      out[i] = run_trial(jobs[i].task, jobs[i].trial, cfg, jobs[i].mode);
  };
  int n = std::min<int>(cfg.workers, static_cast<int>(std::max<size_t>(jobs.size(), 1)));
  if (n <= 1) {
    work();
  } else {
    std::vector<std::thread> threads;
    for (int i = 0; i < n; ++i) threads.emplace_back(work);
    for (auto& t : threads) t.join();
  }
  return out;
}

std::pair<double, double> mean_std(const std::vector<double>& v) {
  if (v.empty()) return {0, 0};
  double m = 0;
  for (double x : v) m += x;
  m /= double(v.size());
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return {m, v.size() > 1 ? std::sqrt(s / double(v.size() - 1)) : 0.0};
}

std::string pm(double m, double s) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.0f ± %.0f", m, s);
  return buf;
}

std::string pad(std::string s, size_t w) {
  // count code points so the ± sign does not skew columns
  size_t len = 0;
  for (unsigned char c : s) len += (c & 0xC0) != 0x80;
  if (len < w) s.append(w - len, ' ');
  return s;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write " + p.string());
  out << text;
}

std::string run_log(const std::vector<ResultRecord>& records) {
  std::ostringstream os;
  for (const auto& r : records) {
    os << r.task << " mode=" << to_string(r.mode) << " trial=" << r.trial << " seed=" << r.seed;
    if (r.failed) {
      os << " FAILED: " << r.error << "\n";
      continue;
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, " acc=%.4f time=%.2fs search=%.2fs solve=%.2fs rules=%zu%s\n", r.accuracy,
                  r.wall_time_s, r.search_s, r.solve_s, r.n_rules, r.hit_time_budget ? " (time budget hit)" : "");
    os << buf;
    for (const auto& it : r.learn.log) {
      std::snprintf(buf, sizeof buf, "  t=%d Q=%.4f dQ=%.4f candidates=%zu validated=%zu calls=%d wall=%.2fs", it.t,
                    it.quality, it.delta_q, it.candidates, it.validated, it.solver_calls, it.wall_s);
      os << buf;
      for (const auto& b : it.background_added) os << " +" << b;
      os << "\n";
    }
    for (const auto& [reason, n] : r.learn.prune_reasons) os << "  pruned " << reason << ": " << n << "\n";
    std::istringstream rules(r.rules_text);
    for (std::string line; std::getline(rules, line);) os << "  " << line << "\n";
  }
  return os.str();
}

void write_outputs(const SuiteConfig& cfg, const std::vector<ResultRecord>& records, const std::string& table,
                   const char* table_name) {
  namespace fs = std::filesystem;
  fs::path dir(cfg.output_dir);
  fs::create_directories(dir / "rules");
  write_file(dir / "results.jsonl", results_jsonl(records));
  write_file(dir / "timings.jsonl", timings_jsonl(records));
  write_file(dir / "predictions.jsonl", predictions_jsonl(records));
  write_file(dir / table_name, table);
  write_file(dir / "run.log", run_log(records));
  for (const auto& r : records) {
    if (r.failed) continue;
    write_file(dir / "rules" / (r.task + "." + std::string(to_string(r.mode)) + "." + std::to_string(r.trial) + ".rules"),
               r.rules_text);
  }
}

std::vector<TaskSummary> summaries_of(const std::vector<ResultRecord>& records) {
  std::vector<TaskSummary> out;
  std::vector<ResultRecord> group;
  for (size_t i = 0; i <= records.size(); ++i) {
    if (i == records.size() || (!group.empty() && (records[i].task != group[0].task || records[i].mode != group[0].mode))) {
      if (!group.empty()) out.push_back(summarize(group));
      group.clear();
    }
    if (i < records.size()) group.push_back(records[i]);
  }
  return out;
}

}  // namespace

std::vector<ResultRecord> run_task(const std::string& task, const SuiteConfig& cfg, AblationMode mode) {
  cfg.validate();
  const TaskInfo& info = get_task(task);
  std::vector<Job> jobs;
  for (int t = 0; t < cfg.trials_for(info); ++t) jobs.push_back({task, t, mode});
  return run_jobs(jobs, cfg);
}

TaskSummary summarize(const std::vector<ResultRecord>& records) {
  TaskSummary s;
  if (records.empty()) return s;
  s.task = records[0].task;
  s.mode = records[0].mode;
  std::vector<double> acc, time;
  double search = 0, solve = 0;
  for (const auto& r : records) {
    ++s.trials;
    if (r.failed) ++s.failed;
    acc.push_back(100 * r.accuracy);
    time.push_back(r.wall_time_s);
    search += r.search_s;
    solve += r.solve_s;
  }
  std::tie(s.acc_mean, s.acc_std) = mean_std(acc);
  std::tie(s.time_mean, s.time_std) = mean_std(time);
  s.search_mean = search / double(s.trials);
  s.solve_mean = solve / double(s.trials);
  return s;
}

std::string results_jsonl(const std::vector<ResultRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    ojson j;
    j["task"] = r.task;
    j["trial"] = r.trial;
    j["seed"] = r.seed;
    j["accuracy"] = r.accuracy;
    j["n_rules"] = r.n_rules;
    j["mode"] = std::string(to_string(r.mode));
    if (r.failed) j["error"] = r.error;
    out += j.dump() + "\n";
  }
  return out;
}

std::string timings_jsonl(const std::vector<ResultRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    ojson j;
    j["task"] = r.task;
    j["trial"] = r.trial;
    j["mode"] = std::string(to_string(r.mode));
    j["wall_time_s"] = r.wall_time_s;
    j["search_s"] = r.search_s;
    j["solve_s"] = r.solve_s;
    j["hit_time_budget"] = r.hit_time_budget;
    out += j.dump() + "\n";
  }
  return out;
}

std::string predictions_jsonl(const std::vector<ResultRecord>& records) {
  std::string out;
  for (const auto& r : records)
    for (const auto& p : r.predictions) {
      ojson j;
      j["task"] = r.task;
      j["trial"] = r.trial;
      j["mode"] = std::string(to_string(r.mode));
      j["example"] = p.example_id;
      j["label"] = p.label;
      j["predicted"] = p.predicted;
      out += j.dump() + "\n";
    }
  return out;
}

std::string results_table(const std::vector<TaskSummary>& rows) {
  std::string s = pad("Task", 22) + pad("Accuracy (%)", 16) + pad("Time (s)", 16) + pad("Search (s)", 12) +
                  "Solve (s)\n";
  s += std::string(76, '-') + "\n";
  for (const auto& r : rows) {
    char a[32], b[32];
    std::snprintf(a, sizeof a, "%.1f", r.search_mean);
    std::snprintf(b, sizeof b, "%.1f", r.solve_mean);
    std::string name = r.task + (r.failed ? " (" + std::to_string(r.failed) + " failed)" : "");
    s += pad(name, 22) + pad(pm(r.acc_mean, r.acc_std), 16) + pad(pm(r.time_mean, r.time_std), 16) + pad(a, 12) + b +
         "\n";
  }
  return s;
}

std::string ablation_table(const std::vector<TaskSummary>& rows) {
  std::vector<std::string> tasks;
  for (const auto& r : rows)
    if (std::find(tasks.begin(), tasks.end(), r.task) == tasks.end()) tasks.push_back(r.task);
  std::string s = pad("Task", 18) + pad("No PI", 12) + pad("PI Only", 12) + pad("PI+SMT", 12) + "Time (s)\n";
  s += std::string(64, '-') + "\n";
  for (const auto& t : tasks) {
    auto cell = [&](AblationMode m) -> const TaskSummary* {
      for (const auto& r : rows)
        if (r.task == t && r.mode == m) return &r;
      return nullptr;
    };
    auto acc = [&](AblationMode m) {
      const TaskSummary* c = cell(m);
      return c ? pm(c->acc_mean, c->acc_std) : std::string("-");
    };
    const TaskSummary* full = cell(AblationMode::Full);
    s += pad(t, 18) + pad(acc(AblationMode::NoInvention), 12) + pad(acc(AblationMode::InventionOnly), 12) +
         pad(acc(AblationMode::Full), 12) + (full ? pm(full->time_mean, full->time_std) : "-") + "\n";
  }
  return s;
}

SuiteOutput run_suite(const std::vector<Family>& families, const SuiteConfig& cfg) {
  cfg.validate();
  std::vector<Job> jobs;
  for (Family f : families)
    for (const auto& task : tasks_in(f))
      for (int t = 0; t < cfg.trials_for(get_task(task)); ++t) jobs.push_back({task, t, AblationMode::Full});
  SuiteOutput out;
  out.records = run_jobs(jobs, cfg);
  out.summaries = summaries_of(out.records);
  out.table = results_table(out.summaries);
  write_outputs(cfg, out.records, out.table, "table.txt");
  return out;
}

SuiteOutput run_ablation_ip(const SuiteConfig& cfg, const std::vector<std::string>& tasks) {
  cfg.validate();
  std::vector<std::string> names = tasks.empty() ? tasks_in(Family::Ip) : tasks;
  std::vector<Job> jobs;
  for (const auto& task : names) {
    const TaskInfo& info = get_task(task);
    if (info.family != Family::Ip) throw Error("ablation runs graph tasks only, not " + task);
    for (auto m : {AblationMode::NoInvention, AblationMode::InventionOnly, AblationMode::Full})
      for (int t = 0; t < cfg.trials_for(info); ++t) jobs.push_back({task, t, m});
  }
  SuiteOutput out;
  out.records = run_jobs(jobs, cfg);
  out.summaries = summaries_of(out.records);
  out.table = ablation_table(out.summaries);
  write_outputs(cfg, out.records, out.table, "ablation.txt");
  return out;
}

}  // namespace smtilp
