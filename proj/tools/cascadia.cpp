// cascadia: generate quiz instances, solve and score sequences, run suites.
//
// Exit codes: 0 ok, 2 invalid input, 3 compute cap refused, 1 anything else.
// Every flag can also be set through a CASCADIA_<FLAG> environment variable.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cascadia/assortment.hpp"
#include "cascadia/error.hpp"
#include "cascadia/evaluator.hpp"
#include "cascadia/harness.hpp"
#include "cascadia/instance_json.hpp"
#include "cascadia/policies.hpp"
#include "cascadia/utility.hpp"

namespace {

using namespace cascadia;
using nlohmann::ordered_json;

constexpr int kExitInvalid = 2;
constexpr int kExitCap = 3;

CLI::Option* env(CLI::Option* opt, const std::string& name) {
  return opt->envname("CASCADIA_" + name);
}

struct SolveArgs {
  std::string instance;
  std::string policy = "alg2";
  double rho = 0.5;
  bool sweep = false;
  int depth = 1;
  bool no_local_search = false;
  std::string order = "ascending_id";
  std::string v_mode = "automatic";
  std::uint64_t seed = 0;
  std::optional<double> kappa;
  std::string variant;
  std::string out;
};

ordered_json report_json(const EvalReport& r) {
  ordered_json j;
  j["value"] = r.value;
  j["method"] = to_string(r.method);
  j["std_error"] = r.std_error ? ordered_json(*r.std_error) : ordered_json(nullptr);
  j["samples"] = r.samples ? ordered_json(*r.samples) : ordered_json(nullptr);
  j["reachability"] = r.reachability;
  return j;
}

PolicySpec spec_from(const SolveArgs& a) {
  PolicySpec spec;
  spec.kind = parse_policy_kind(a.policy);
  spec.rho = a.rho;
  if (a.sweep) spec.rho_sweep = std::vector<double>{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  spec.inner.enum_depth = a.depth;
  spec.inner.local_search = !a.no_local_search;
  spec.inner.order = parse_subset_order(a.order);
  spec.inner.v_mode = parse_v_mode(a.v_mode);
  spec.seed = a.seed;
  if (!a.variant.empty()) spec.variant = parse_variant(a.variant);
  return spec;
}

void add_solve_flags(CLI::App* cmd, SolveArgs& a) {
  env(cmd->add_option("--policy", a.policy, "alg1..alg6, qss, random, maxent, opt"), "POLICY");
  env(cmd->add_option("--rho", a.rho, "minimum reachability in (0, 1]"), "RHO");
  env(cmd->add_flag("--rho-sweep", a.sweep, "try rho = 0.1 .. 0.9 and keep the best"), "RHO_SWEEP");
  env(cmd->add_option("--depth", a.depth, "partial enumeration depth 0..3"), "DEPTH");
  env(cmd->add_flag("--no-local-search", a.no_local_search), "NO_LOCAL_SEARCH");
  env(cmd->add_option("--order", a.order, "ascending_id or selection"), "ORDER");
  env(cmd->add_option("--v-mode", a.v_mode, "automatic, exact or sampled"), "V_MODE");
  env(cmd->add_option("--seed", a.seed, "seed for random and maxent"), "SEED");
  env(cmd->add_option("--variant", a.variant, "basic, no_pna, slot_decay or scrolling"), "VARIANT");
  env(cmd->add_option("--out", a.out, "write the result here"), "OUT");
}

int cmd_generate(const std::string& config, std::size_t cell_index, std::size_t index,
                 const std::string& out) {
  const ExperimentConfig cfg = config.empty() ? suite_defaults(SuiteKind::custom)
                                              : config_from_json(read_json_file(config));
  const auto cells = suite_cells(cfg);
  if (cell_index >= cells.size()) throw ConfigError("cell index out of range");
  const Instance inst =
      generate_instance(cfg, cells[cell_index], instance_seed(cfg.seed, cell_index, index));
  if (out.empty()) {
    std::cout << instance_to_json(inst).dump(2) << '\n';
  } else {
    save_instance(out, inst);
  }
  return 0;
}

int cmd_solve(const SolveArgs& a) {
  const Instance inst = load_instance(a.instance);
  ensure_valid(inst);
  const PolicySpec spec = spec_from(a);
  std::optional<Instance> without;
  if (spec.kind == PolicyKind::alg5_pna_decision) {
    if (!a.kappa) throw ConfigError("alg5 needs --kappa for the without-PNA answer rates");
    without = apply_kappa(inst, *a.kappa);
  }
  const PolicyOutput out = run_policy(inst, spec, without ? &*without : nullptr);
  const Variant variant = spec.kind == PolicyKind::exact_optimal
                              ? (a.variant.empty() ? natural_variant(inst) : spec.variant)
                              : scoring_variant(spec.kind, inst);
  const EvalReport report = score_output(out, inst, variant, without ? &*without : nullptr);

  ordered_json j = sequence_to_json(out.sequence, inst, out.pna);
  j["policy"] = to_string(spec.kind);
  j["expected_utility"] = report_json(report);
  j["surrogate_value"] = out.surrogate_value;
  ordered_json diag;
  const auto& d = out.diagnostics;
  diag["q_prime"] = d.q_prime ? ordered_json(inst.questions[*d.q_prime].external_id) : ordered_json(nullptr);
  diag["subset_size"] = d.subset_size ? ordered_json(*d.subset_size) : ordered_json(nullptr);
  diag["t_prime"] = d.t_prime ? ordered_json(*d.t_prime) : ordered_json(nullptr);
  diag["rho"] = d.rho ? ordered_json(*d.rho) : ordered_json(nullptr);
  diag["evaluations"] = d.evaluations;
  diag["inner_method"] = d.inner_method;
  j["diagnostics"] = diag;
  if (a.out.empty()) {
    std::cout << j.dump(2) << '\n';
  } else {
    write_json_file(a.out, j);
    std::printf("f = %.10g (%s)\n", report.value, to_string(report.method));
  }
  return 0;
}

int cmd_eval(const std::string& instance, const std::string& sequence, std::size_t mc,
             std::uint64_t seed, const std::string& variant_text) {
  const Instance inst = load_instance(instance);
  ensure_valid(inst);
  const nlohmann::json seq_json = read_json_file(sequence);
  const Sequence seq = sequence_from_json(seq_json, inst);
  const Variant variant = variant_text.empty() ? natural_variant(inst) : parse_variant(variant_text);
  const EvalReport report =
      mc > 0 ? eval_monte_carlo(seq, inst, variant, mc, seed) : evaluate(seq, inst, variant);
  std::cout << report_json(report).dump(2) << '\n';
  return 0;
}

int cmd_suite(const std::string& config, const std::string& out, std::size_t threads,
              bool timing, bool quiet) {
  ExperimentConfig cfg = config_from_json(read_json_file(config));
  if (threads != static_cast<std::size_t>(-1)) cfg.threads = threads;
  if (timing) cfg.timing = true;
  ProgressFn progress;
  if (!quiet) {
    progress = [](std::size_t done, std::size_t total) {
      if (done == total || done % 50 == 0) std::fprintf(stderr, "\r%zu/%zu", done, total);
      if (done == total) std::fputc('\n', stderr);
    };
  }
  const SuiteResult result = run_suite(cfg, progress);
  for (const auto& path : emit(result, out)) std::printf("wrote %s\n", path.string().c_str());
  return 0;
}

int cmd_check(const std::string& instance, std::size_t exhaustive_limit) {
  const nlohmann::json j = read_json_file(instance);
  const Instance inst = instance_from_json(j);
  const auto violations = validate_instance(inst);
  ordered_json out;
  out["questions"] = inst.size();
  out["budget"] = inst.budget;
  out["utility"] = to_string(inst.utility);
  out["violations"] = ordered_json::array();
  for (const auto& v : violations) out["violations"].push_back({{"code", v.code}, {"detail", v.detail}});
  if (violations.empty()) {
    const Utility g(inst);
    const SubmodularityReport rep = check_monotone_submodular(g, exhaustive_limit);
    out["submodular_by_construction"] = g.submodular_by_construction();
    out["monotone"] = rep.monotone;
    out["submodular"] = rep.submodular;
    out["exhaustive"] = rep.exhaustive;
    out["triples_checked"] = rep.triples_checked;
  }
  std::cout << out.dump(2) << '\n';
  return violations.empty() ? 0 : kExitInvalid;
}

int cmd_assort(const std::string& catalog, const SolveArgs& a) {
  const Catalog cat = load_catalog(catalog);
  const AssortmentResult res = optimize_assortment(cat, spec_from(a));
  const Instance inst = catalog_to_instance(cat);
  ordered_json j = sequence_to_json(res.output.sequence, inst);
  j["expected_revenue"] = res.expected_revenue;
  j["submodular"] = res.submodular;
  j["warnings"] = res.warnings;
  for (const auto& w : res.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  if (a.out.empty()) {
    std::cout << j.dump(2) << '\n';
  } else {
    write_json_file(a.out, j);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Question selection and sequencing under a cascade browse model"};
  app.require_subcommand(1);

  std::string config;
  std::string out;
  std::size_t cell_index = 0;
  std::size_t instance_index = 0;
  auto* gen = app.add_subcommand("generate", "write a synthetic instance");
  env(gen->add_option("--config", config, "experiment config JSON"), "CONFIG");
  env(gen->add_option("--cell", cell_index, "index into the config's feasible cells"), "CELL");
  env(gen->add_option("--index", instance_index, "instance number within the cell"), "INDEX");
  env(gen->add_option("--out", out, "output path (stdout when omitted)"), "OUT");

  SolveArgs solve_args;
  double kappa = 0.0;
  auto* solve = app.add_subcommand("solve", "run a policy on an instance");
  env(solve->add_option("--instance", solve_args.instance)->required(), "INSTANCE");
  add_solve_flags(solve, solve_args);
  auto* kappa_opt = env(solve->add_option("--kappa", kappa, "alg5: answer-rate shift without PNA"),
                        "KAPPA");

  std::string instance;
  std::string sequence;
  std::size_t mc = 0;
  std::uint64_t seed = 0;
  std::string variant;
  auto* ev = app.add_subcommand("eval", "expected utility of a sequence");
  env(ev->add_option("--instance", instance)->required(), "INSTANCE");
  env(ev->add_option("--sequence", sequence)->required(), "SEQUENCE");
  env(ev->add_option("--mc", mc, "Monte Carlo samples (exact when omitted)"), "MC");
  env(ev->add_option("--seed", seed), "SEED");
  env(ev->add_option("--variant", variant), "VARIANT");

  std::size_t threads = static_cast<std::size_t>(-1);
  bool timing = false;
  bool quiet = false;
  auto* suite = app.add_subcommand("suite", "run an experiment suite");
  env(suite->add_option("--config", config)->required(), "CONFIG");
  env(suite->add_option("--out", out, "output directory")->required(), "OUT");
  env(suite->add_option("--threads", threads, "worker threads, 0 = all cores"), "THREADS");
  env(suite->add_flag("--timing", timing, "record runtime_ms"), "TIMING");
  env(suite->add_flag("--quiet", quiet), "QUIET");

  std::size_t exhaustive_limit = 10;
  auto* check = app.add_subcommand("check", "validate an instance and test g for submodularity");
  env(check->add_option("--instance", instance)->required(), "INSTANCE");
  env(check->add_option("--exhaustive-limit", exhaustive_limit), "EXHAUSTIVE_LIMIT");

  std::string catalog;
  SolveArgs assort_args;
  auto* assort = app.add_subcommand("assort", "optimize a product display");
  env(assort->add_option("--catalog", catalog)->required(), "CATALOG");
  add_solve_flags(assort, assort_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInvalid;
  }

  try {
    if (*gen) return cmd_generate(config, cell_index, instance_index, out);
    if (*solve) {
      if (kappa_opt->count() > 0) solve_args.kappa = kappa;
      return cmd_solve(solve_args);
    }
    if (*ev) return cmd_eval(instance, sequence, mc, seed, variant);
    if (*suite) return cmd_suite(config, out, threads, timing, quiet);
    if (*check) return cmd_check(instance, exhaustive_limit);
    if (*assort) return cmd_assort(catalog, assort_args);
  } catch (const ComputeCapExceeded& e) {
    std::fprintf(stderr, "refused: %s\n", e.what());
    return kExitCap;
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kExitInvalid;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
