#include "cascadia/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <thread>
#include <tuple>

#include "cascadia/error.hpp"
#include "cascadia/evaluator.hpp"
#include "cascadia/rng.hpp"

namespace cascadia {

namespace {

std::vector<double> grid(double lo, double hi, double step) {
  std::vector<double> out;
  const int count = static_cast<int>(std::lround((hi - lo) / step)) + 1;
  for (int i = 0; i < count; ++i) {
    // round to 10 decimals so grid values print cleanly
    out.push_back(std::round((lo + step * i) * 1e10) / 1e10);
  }
  return out;
}

NamedPolicy named(std::string name, PolicySpec spec) { return {std::move(name), std::move(spec)}; }

PolicySpec simple_spec(PolicyKind kind) {
  PolicySpec s;
  s.kind = kind;
  return s;
}

std::string cell_text(const Cell& c) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "p+=%g c+=%g p-=%g c-=%g", c.p_plus, c.c_plus, c.p_minus,
                c.c_minus);
  return buf;
}

template <class T>
void maybe(const nlohmann::json& j, const char* key, T& target) {
  if (j.contains(key) && !j.at(key).is_null()) target = j.at(key).get<T>();
}

}  // namespace

const char* to_string(SuiteKind kind) noexcept {
  switch (kind) {
    case SuiteKind::sweep_fig1: return "sweep_fig1";
    case SuiteKind::benchmark_fig2: return "benchmark_fig2";
    case SuiteKind::ratio_table2: return "ratio_table2";
    case SuiteKind::ratio_table3: return "ratio_table3";
    case SuiteKind::pna_kappa: return "pna_kappa";
    case SuiteKind::custom: return "custom";
  }
  return "unknown";
}

SuiteKind parse_suite_kind(const std::string& text) {
  for (SuiteKind k : {SuiteKind::sweep_fig1, SuiteKind::benchmark_fig2, SuiteKind::ratio_table2,
                      SuiteKind::ratio_table3, SuiteKind::pna_kappa, SuiteKind::custom}) {
    if (text == to_string(k)) return k;
  }
  throw ConfigError("unknown suite '" + text + "'");
}

PolicySpec default_qss_spec() {
  PolicySpec s;
  s.kind = PolicyKind::alg2_general;
  // small rho lifts the reachability budget so long sequences stay reachable
  std::vector<double> sweep = {1e-12, 1e-9, 1e-6, 1e-4, 1e-3, 0.01, 0.05};
  for (double r : grid(0.1, 0.9, 0.1)) sweep.push_back(r);
  s.rho_sweep = sweep;
  s.inner.enum_depth = 1;
  s.inner.order = SubsetOrder::selection;
  return s;
}

ExperimentConfig suite_defaults(SuiteKind suite, bool full_scale) {
  ExperimentConfig cfg;
  cfg.suite = suite;
  cfg.instances_per_cell = full_scale ? 1000 : 50;
  const double step = full_scale ? 0.1 : 0.2;
  const auto coarse = grid(0.1, 0.9, step);
  const auto opt_name = std::string("opt");

  switch (suite) {
    case SuiteKind::sweep_fig1:
      cfg.p_plus = coarse;
      cfg.c_plus = coarse;
      cfg.p_minus = {0.1, 0.2, 0.3, 0.4};
      cfg.c_minus = {0.5};
      cfg.policies = {named("qss", default_qss_spec())};
      break;
    case SuiteKind::benchmark_fig2:
      cfg.p_plus = coarse;
      cfg.c_plus = {0.5};
      cfg.p_minus = {0.1, 0.2, 0.3, 0.4};
      cfg.c_minus = {0.5};
      cfg.policies = {named("qss", default_qss_spec()), named("max_ent", simple_spec(PolicyKind::max_ent)),
                      named("random", simple_spec(PolicyKind::random))};
      break;
    case SuiteKind::ratio_table2:
    case SuiteKind::ratio_table3:
      cfg.p_plus = coarse;
      cfg.c_plus = coarse;
      cfg.p_minus = full_scale ? coarse : std::vector<double>{0.1, 0.5};
      cfg.c_minus = full_scale ? coarse : std::vector<double>{0.1, 0.5};
      cfg.policies = {named("qss", default_qss_spec()),
                      named(opt_name, simple_spec(PolicyKind::exact_optimal))};
      cfg.reference_policy = opt_name;
      break;
    case SuiteKind::pna_kappa:
      cfg.cells = {{0.3, 0.3, 0.1, 0.1}, {0.35, 0.35, 0.3, 0.3}, {0.4, 0.4, 0.5, 0.5},
                   {0.5, 0.5, 0.3, 0.3}};
      cfg.kappa = {-0.9, -0.7, -0.5, -0.3, -0.1, 0.0, 0.1, 0.3, 0.5, 0.7, 0.9};
      cfg.policies = {named(opt_name, simple_spec(PolicyKind::exact_optimal))};
      break;
    case SuiteKind::custom:
      cfg.p_plus = {0.5};
      cfg.c_plus = {0.5};
      cfg.p_minus = {0.1};
      cfg.c_minus = {0.5};
      cfg.policies = {named("qss", default_qss_spec())};
      break;
  }
  return cfg;
}

PolicySpec policy_spec_from_json(const nlohmann::json& j) {
  try {
    PolicySpec s;
    if (j.is_string()) {
      s.kind = parse_policy_kind(j.get<std::string>());
      return s;
    }
    s.kind = parse_policy_kind(j.at("kind").get<std::string>());
    maybe(j, "rho", s.rho);
    if (j.contains("rho_sweep") && !j.at("rho_sweep").is_null()) {
      s.rho_sweep = j.at("rho_sweep").get<std::vector<double>>();
    }
    maybe(j, "enum_depth", s.inner.enum_depth);
    maybe(j, "local_search", s.inner.local_search);
    if (j.contains("v_mode")) s.inner.v_mode = parse_v_mode(j.at("v_mode").get<std::string>());
    maybe(j, "v_samples", s.inner.v_samples);
    maybe(j, "v_seed", s.inner.v_seed);
    if (j.contains("order")) s.inner.order = parse_subset_order(j.at("order").get<std::string>());
    maybe(j, "seed", s.seed);
    maybe(j, "compute_cap", s.compute_cap);
    if (j.contains("variant")) s.variant = parse_variant(j.at("variant").get<std::string>());
    if (!(s.rho > 0.0 && s.rho <= 1.0)) throw ConfigError("rho must lie in (0, 1]");
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad policy spec: ") + e.what());
  }
}

nlohmann::ordered_json policy_spec_to_json(const PolicySpec& s) {
  nlohmann::ordered_json j;
  j["kind"] = to_string(s.kind);
  j["rho"] = s.rho;
  j["rho_sweep"] = s.rho_sweep ? nlohmann::ordered_json(*s.rho_sweep) : nlohmann::ordered_json(nullptr);
  j["enum_depth"] = s.inner.enum_depth;
  j["local_search"] = s.inner.local_search;
  j["v_mode"] = to_string(s.inner.v_mode);
  j["v_samples"] = s.inner.v_samples;
  j["v_seed"] = s.inner.v_seed;
  j["order"] = to_string(s.inner.order);
  j["seed"] = s.seed;
  j["compute_cap"] = s.compute_cap;
  j["variant"] = to_string(s.variant);
  return j;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  try {
    const SuiteKind suite =
        j.contains("suite") ? parse_suite_kind(j.at("suite").get<std::string>()) : SuiteKind::custom;
    bool full_scale = false;
    maybe(j, "full_scale", full_scale);
    ExperimentConfig cfg = suite_defaults(suite, full_scale);
    maybe(j, "n_questions", cfg.n_questions);
    maybe(j, "n_choices", cfg.n_choices);
    maybe(j, "budget", cfg.budget);
    maybe(j, "instances_per_cell", cfg.instances_per_cell);
    maybe(j, "seed", cfg.seed);
    maybe(j, "p_plus", cfg.p_plus);
    maybe(j, "c_plus", cfg.c_plus);
    maybe(j, "p_minus", cfg.p_minus);
    maybe(j, "c_minus", cfg.c_minus);
    maybe(j, "kappa", cfg.kappa);
    maybe(j, "timing", cfg.timing);
    maybe(j, "threads", cfg.threads);
    maybe(j, "compute_cap", cfg.compute_cap);
    if (j.contains("cells")) {
      cfg.cells.clear();
      for (const auto& c : j.at("cells")) {
        const auto v = c.get<std::vector<double>>();
        if (v.size() != 4) throw ConfigError("a cell is [p_plus, c_plus, p_minus, c_minus]");
        cfg.cells.push_back({v[0], v[1], v[2], v[3]});
      }
    } else if (j.contains("p_plus") || j.contains("c_plus") || j.contains("p_minus") ||
               j.contains("c_minus")) {
      cfg.cells.clear();
    }
    if (j.contains("policies")) {
      cfg.policies.clear();
      for (const auto& p : j.at("policies")) {
        NamedPolicy np;
        np.spec = policy_spec_from_json(p);
        if (p.is_object() && p.contains("name")) {
          np.name = p.at("name").get<std::string>();
        } else {
          np.name = p.is_string() ? p.get<std::string>() : to_string(np.spec.kind);
        }
        if (p.is_string() && p.get<std::string>() == "qss") np.spec = default_qss_spec();
        cfg.policies.push_back(std::move(np));
      }
    }
    if (j.contains("reference_policy")) {
      if (j.at("reference_policy").is_null()) {
        cfg.reference_policy.reset();
      } else {
        cfg.reference_policy = j.at("reference_policy").get<std::string>();
      }
    }
    for (const auto* g : {&cfg.p_plus, &cfg.c_plus, &cfg.p_minus, &cfg.c_minus}) {
      for (double v : *g) {
        if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("grid values must lie in [0, 1]");
      }
    }
    for (double k : cfg.kappa) {
      if (!(k >= -1.0 && k <= 1.0)) throw ConfigError("kappa values must lie in [-1, 1]");
    }
    if (cfg.n_questions < 1 || cfg.n_choices < 1 || cfg.budget < 1) {
      throw ConfigError("n_questions, n_choices and budget must be positive");
    }
    if (cfg.policies.empty()) throw ConfigError("no policies configured");
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad experiment config: ") + e.what());
  }
}

nlohmann::ordered_json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  j["suite"] = to_string(cfg.suite);
  j["n_questions"] = cfg.n_questions;
  j["n_choices"] = cfg.n_choices;
  j["budget"] = cfg.budget;
  j["instances_per_cell"] = cfg.instances_per_cell;
  j["seed"] = cfg.seed;
  if (cfg.cells.empty()) {
    j["p_plus"] = cfg.p_plus;
    j["c_plus"] = cfg.c_plus;
    j["p_minus"] = cfg.p_minus;
    j["c_minus"] = cfg.c_minus;
  } else {
    j["cells"] = nlohmann::ordered_json::array();
    for (const Cell& c : cfg.cells) j["cells"].push_back({c.p_plus, c.c_plus, c.p_minus, c.c_minus});
  }
  if (!cfg.kappa.empty()) j["kappa"] = cfg.kappa;
  j["policies"] = nlohmann::ordered_json::array();
  for (const NamedPolicy& p : cfg.policies) {
    auto pj = policy_spec_to_json(p.spec);
    nlohmann::ordered_json named_json;
    named_json["name"] = p.name;
    for (auto it = pj.begin(); it != pj.end(); ++it) named_json[it.key()] = it.value();
    j["policies"].push_back(named_json);
  }
  j["reference_policy"] =
      cfg.reference_policy ? nlohmann::ordered_json(*cfg.reference_policy) : nlohmann::ordered_json(nullptr);
  j["timing"] = cfg.timing;
  j["threads"] = cfg.threads;
  j["compute_cap"] = cfg.compute_cap;
  return j;
}

std::vector<Cell> suite_cells(const ExperimentConfig& cfg) {
  std::vector<Cell> out;
  if (!cfg.cells.empty()) {
    for (const Cell& c : cfg.cells) {
      if (c.feasible()) out.push_back(c);
    }
    return out;
  }
  for (double pp : cfg.p_plus) {
    for (double cp : cfg.c_plus) {
      for (double pm : cfg.p_minus) {
        for (double cm : cfg.c_minus) {
          const Cell c{pp, cp, pm, cm};
          if (c.feasible()) out.push_back(c);
        }
      }
    }
  }
  return out;
}

Instance generate_instance(const ExperimentConfig& cfg, const Cell& cell, std::uint64_t seed) {
  if (!cell.feasible()) throw ConfigError("infeasible cell: " + cell_text(cell));
  Rng rng(seed);
  Instance inst;
  inst.budget = cfg.budget;
  inst.utility = UtilityKind::entropy;
  for (std::size_t i = 0; i < cfg.n_questions; ++i) {
    Attribute a;
    a.external_id = static_cast<std::int64_t>(i + 1);
    double total = 0.0;
    for (std::size_t k = 0; k < cfg.n_choices; ++k) {
      a.distribution.push_back(rng.uniform());
      total += a.distribution.back();
    }
    if (total <= 0.0) {
      std::fill(a.distribution.begin(), a.distribution.end(), 1.0);
      total = static_cast<double>(cfg.n_choices);
    }
    for (double& p : a.distribution) p /= total;
    inst.attributes.push_back(std::move(a));

    Question q;
    q.external_id = static_cast<std::int64_t>(i + 1);
    q.p_answer = cell.p_plus;
    q.c_answer = cell.c_plus;
    q.p_pna = cell.p_minus;
    q.c_pna = cell.c_minus;
    q.attributes = {i};
    inst.questions.push_back(std::move(q));
  }
  return inst;
}

Instance apply_kappa(const Instance& inst, double kappa) {
  if (!(kappa >= -1.0 && kappa <= 1.0)) throw ConfigError("kappa must lie in [-1, 1]");
  Instance out = inst;
  for (Question& q : out.questions) {
    q.p_answer = kappa > 0.0 ? (1.0 - q.p_answer) * kappa + q.p_answer : (1.0 + kappa) * q.p_answer;
    q.p_pna = 0.0;
  }
  return out;
}

std::uint64_t instance_seed(std::uint64_t master, std::size_t cell_index, std::size_t index) {
  return derive_seed(master, cell_index, index);
}

namespace {

constexpr std::uint64_t kPolicyStream = 0x706f6c696379ULL;

struct Task {
  std::size_t cell_index;
  std::size_t instance_index;
};

double run_and_score(const Instance& inst, const PolicySpec& spec, std::string& method) {
  const PolicyOutput out = run_policy(inst, spec);
  const Variant variant = spec.kind == PolicyKind::exact_optimal
                              ? spec.variant
                              : scoring_variant(spec.kind, inst);
  const EvalReport report = score_output(out, inst, variant);
  method = to_string(report.method);
  return report.value;
}

std::vector<ResultRow> run_task(const ExperimentConfig& cfg, const Cell& cell,
                                const Task& task) {
  const std::uint64_t seed = instance_seed(cfg.seed, task.cell_index, task.instance_index);
  const Instance inst = generate_instance(cfg, cell, seed);
  const std::string suite = to_string(cfg.suite);
  std::vector<ResultRow> rows;

  auto timed = [&](const Instance& in, PolicySpec spec, std::size_t policy_index,
                   std::optional<double> kappa, const std::string& name) {
    spec.seed = derive_seed(seed, kPolicyStream, policy_index);
    if (spec.kind == PolicyKind::exact_optimal) spec.compute_cap = cfg.compute_cap;
    ResultRow row;
    row.suite = suite;
    row.cell = cell;
    row.kappa = kappa;
    row.seed = seed;
    row.policy = name;
    const auto start = std::chrono::steady_clock::now();
    row.f_value = run_and_score(in, spec, row.method);
    if (cfg.timing) {
      row.runtime_ms =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
              .count();
    }
    rows.push_back(std::move(row));
  };

  for (std::size_t p = 0; p < cfg.policies.size(); ++p) {
    const NamedPolicy& np = cfg.policies[p];
    timed(inst, np.spec, p, std::nullopt, np.name);
    for (double k : cfg.kappa) timed(apply_kappa(inst, k), np.spec, p, k, np.name);
  }

  if (cfg.reference_policy) {
    for (ResultRow& row : rows) {
      if (row.policy == *cfg.reference_policy) continue;
      for (const ResultRow& ref : rows) {
        if (ref.policy == *cfg.reference_policy && ref.kappa == row.kappa && ref.f_value > 0.0) {
          row.ratio = row.f_value / ref.f_value;
        }
      }
    }
  }
  return rows;
}

}  // namespace

SuiteResult run_suite(const ExperimentConfig& cfg, const ProgressFn& progress) {
  if (cfg.policies.empty()) throw ConfigError("no policies configured");
  if (cfg.reference_policy) {
    const bool known = std::any_of(cfg.policies.begin(), cfg.policies.end(),
                                   [&](const NamedPolicy& p) { return p.name == *cfg.reference_policy; });
    if (!known) throw ConfigError("reference policy '" + *cfg.reference_policy + "' is not configured");
  }
  for (double k : cfg.kappa) {
    if (!(k >= -1.0 && k <= 1.0)) throw ConfigError("kappa must lie in [-1, 1]");
  }
  const std::vector<Cell> cells = suite_cells(cfg);
  std::vector<Task> tasks;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    for (std::size_t i = 0; i < cfg.instances_per_cell; ++i) tasks.push_back({c, i});
  }

  std::vector<std::vector<ResultRow>> per_task(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;

  auto worker = [&] {
    for (;;) {
      const std::size_t t = next.fetch_add(1);
      if (t >= tasks.size()) return;
      try {
        per_task[t] = run_task(cfg, cells[tasks[t].cell_index], tasks[t]);
      } catch (...) {
        errors[t] = std::current_exception();
      }
      const std::size_t d = done.fetch_add(1) + 1;
      if (progress) {
        std::lock_guard<std::mutex> lock(progress_mutex);
        progress(d, tasks.size());
      }
    }
  };

  std::size_t threads = cfg.threads == 0 ? std::thread::hardware_concurrency() : cfg.threads;
  threads = std::max<std::size_t>(1, std::min(threads, tasks.size()));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  for (std::size_t t = 0; t < tasks.size(); ++t) {
    if (!errors[t]) continue;
    const std::string where = "cell " + cell_text(cells[tasks[t].cell_index]) + ", instance " +
                              std::to_string(tasks[t].instance_index);
    try {
      std::rethrow_exception(errors[t]);
    } catch (const ComputeCapExceeded& e) {
      throw ComputeCapExceeded(where + ": " + e.what(), e.estimated_cost());
    } catch (const ConfigError& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }

  SuiteResult result;
  for (auto& rows : per_task) {
    for (auto& r : rows) result.rows.push_back(std::move(r));
  }
  result.aggregates = aggregate_rows(cfg.suite, result.rows);
  return result;
}

namespace {

struct Accumulator {
  std::size_t count = 0;
  double min = 0.0;
  double sum = 0.0;
  double max = 0.0;

  void add(double x) {
    if (count == 0) {
      min = max = x;
    } else {
      min = std::min(min, x);
      max = std::max(max, x);
    }
    sum += x;
    ++count;
  }
};

using GroupKey = std::tuple<std::optional<double>, std::optional<double>, std::optional<double>,
                            std::optional<double>, std::optional<double>, std::string, std::string>;

/// Groups in first-appearance order.
class Grouper {
 public:
  explicit Grouper(std::string suite) : suite_(std::move(suite)) {}

  void add(const GroupKey& key, double value) {
    auto [it, inserted] = index_.try_emplace(key, keys_.size());
    if (inserted) {
      keys_.push_back(key);
      acc_.emplace_back();
    }
    acc_[it->second].add(value);
  }

  void flush(std::vector<Aggregate>& out) const {
    for (std::size_t i = 0; i < keys_.size(); ++i) {
      const auto& [pp, cp, pm, cm, k, policy, metric] = keys_[i];
      const Accumulator& a = acc_[i];
      out.push_back({suite_, pp, cp, pm, cm, k, policy, metric, a.count, a.min,
                     a.sum / static_cast<double>(a.count), a.max});
    }
  }

 private:
  std::string suite_;
  std::map<GroupKey, std::size_t> index_;
  std::vector<GroupKey> keys_;
  std::vector<Accumulator> acc_;
};

}  // namespace

std::vector<Aggregate> aggregate_rows(SuiteKind suite, const std::vector<ResultRow>& rows) {
  std::vector<Aggregate> out;
  if (rows.empty()) return out;
  const std::string name = to_string(suite);
  const std::nullopt_t none = std::nullopt;

  Grouper per_cell(name);
  for (const ResultRow& r : rows) {
    const Cell& c = r.cell;
    if (suite == SuiteKind::pna_kappa) {
      per_cell.add({c.p_plus, c.c_plus, c.p_minus, c.c_minus, r.kappa, r.policy,
                    r.kappa ? "utility_without_pna" : "utility_with_pna"},
                   r.f_value);
      continue;
    }
    per_cell.add({c.p_plus, c.c_plus, c.p_minus, c.c_minus, r.kappa, r.policy, "f_value"},
                 r.f_value);
    if (r.ratio) {
      per_cell.add({c.p_plus, c.c_plus, c.p_minus, c.c_minus, r.kappa, r.policy, "ratio"},
                   *r.ratio);
    }
  }

  if (suite == SuiteKind::pna_kappa) {
    // pair each without-PNA row with the with-PNA row of the same instance
    std::map<std::tuple<std::uint64_t, std::string>, double> with_pna;
    for (const ResultRow& r : rows) {
      if (!r.kappa) with_pna[{r.seed, r.policy}] = r.f_value;
    }
    for (const ResultRow& r : rows) {
      if (!r.kappa) continue;
      const auto it = with_pna.find({r.seed, r.policy});
      if (it == with_pna.end()) continue;
      const Cell& c = r.cell;
      const double reduction = it->second - r.f_value;
      per_cell.add({c.p_plus, c.c_plus, c.p_minus, c.c_minus, r.kappa, r.policy, "utility_reduction"},
                   reduction);
      if (it->second > 0.0) {
        per_cell.add({c.p_plus, c.c_plus, c.p_minus, c.c_minus, r.kappa, r.policy,
                      "reduction_percentage"},
                     100.0 * reduction / it->second);
      }
    }
  }
  per_cell.flush(out);

  if (suite == SuiteKind::ratio_table2 || suite == SuiteKind::ratio_table3) {
    Grouper table(name);
    for (const ResultRow& r : rows) {
      if (!r.ratio) continue;
      const Cell& c = r.cell;
      if (suite == SuiteKind::ratio_table2) {
        table.add({c.p_plus, c.c_plus, none, none, r.kappa, r.policy, "ratio"}, *r.ratio);
      } else {
        table.add({none, none, c.p_minus, c.c_minus, r.kappa, r.policy, "ratio"}, *r.ratio);
      }
    }
    table.flush(out);
  }
  return out;
}

}  // namespace cascadia
