#pragma once

// Synthetic quiz instances and the experiment suites: utility sweeps,
// baseline comparison, ratio-to-optimum grids, and the PNA kappa study.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cascadia/model.hpp"
#include "cascadia/policies.hpp"

namespace cascadia {

enum class SuiteKind { sweep_fig1, benchmark_fig2, ratio_table2, ratio_table3, pna_kappa, custom };

const char* to_string(SuiteKind kind) noexcept;
SuiteKind parse_suite_kind(const std::string& text);

/// Shared behaviour parameters of every question in a cell.
struct Cell {
  double p_plus = 0.0;
  double c_plus = 0.0;
  double p_minus = 0.0;
  double c_minus = 0.0;

  bool feasible() const noexcept { return p_plus + p_minus <= 1.0 + 1e-12; }
  friend bool operator==(const Cell&, const Cell&) = default;
};

struct NamedPolicy {
  std::string name;
  PolicySpec spec;
};

struct ExperimentConfig {
  SuiteKind suite = SuiteKind::custom;
  std::size_t n_questions = 12;
  std::size_t n_choices = 5;
  std::size_t budget = 6;
  std::size_t instances_per_cell = 50;
  std::uint64_t seed = 1;
  std::vector<double> p_plus;
  std::vector<double> c_plus;
  std::vector<double> p_minus;
  std::vector<double> c_minus;
  /// Explicit cells; when non-empty the grids above are ignored.
  std::vector<Cell> cells;
  std::vector<double> kappa;  // pna_kappa only
  std::vector<NamedPolicy> policies;
  /// Name of the policy the others are divided by for the ratio column.
  std::optional<std::string> reference_policy;
  bool timing = false;      // fill runtime_ms (makes output nondeterministic)
  std::size_t threads = 1;  // 0 = hardware concurrency
  double compute_cap = kDefaultComputeCap;
};

/// Default QSS used by the suites: alg2 with a rho sweep over 0.1..0.9.
PolicySpec default_qss_spec();

/// Desk-scale defaults for a suite (instances_per_cell 50, grid step 0.2);
/// `full_scale` switches to 1000 instances per cell and a 0.1 grid step.
ExperimentConfig suite_defaults(SuiteKind suite, bool full_scale = false);

/// Suite defaults overridden by whatever keys the JSON object sets.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::ordered_json config_to_json(const ExperimentConfig& cfg);
PolicySpec policy_spec_from_json(const nlohmann::json& j);
nlohmann::ordered_json policy_spec_to_json(const PolicySpec& spec);

/// Feasible cells in grid order (p+, c+, p-, c- nested, p+ outermost).
std::vector<Cell> suite_cells(const ExperimentConfig& cfg);

/// n questions, each covering its own attribute whose distribution is
/// n_choices uniform draws normalized to sum 1. Deterministic in seed.
/// Throws ConfigError for an infeasible cell.
Instance generate_instance(const ExperimentConfig& cfg, const Cell& cell, std::uint64_t seed);

/// Answer rates when PNA is not offered: (1-p+)k + p+ for k > 0,
/// (1+k) p+ for k <= 0; p_pna becomes 0. Throws ConfigError outside [-1, 1].
Instance apply_kappa(const Instance& inst, double kappa);

/// Seed of instance `index` in cell `cell_index`.
std::uint64_t instance_seed(std::uint64_t master, std::size_t cell_index, std::size_t index);

struct ResultRow {
  std::string suite;
  Cell cell;
  std::optional<double> kappa;
  std::uint64_t seed = 0;
  std::string policy;
  double f_value = 0.0;
  std::string method;
  std::optional<double> ratio;
  std::optional<double> runtime_ms;

  friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

/// min / mean / max of one metric over a group of rows. Unset cell fields
/// mean the group spans all their values.
struct Aggregate {
  std::string suite;
  std::optional<double> p_plus;
  std::optional<double> c_plus;
  std::optional<double> p_minus;
  std::optional<double> c_minus;
  std::optional<double> kappa;
  std::string policy;
  std::string metric;
  std::size_t count = 0;
  double min = 0.0;
  double mean = 0.0;
  double max = 0.0;
};

struct SuiteResult {
  std::vector<ResultRow> rows;
  std::vector<Aggregate> aggregates;
};

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

/// Runs every (cell, instance) task, in parallel when cfg.threads != 1, and
/// returns rows in (cell, instance, policy) order. ComputeCapExceeded is
/// rethrown with the offending cell in the message.
SuiteResult run_suite(const ExperimentConfig& cfg, const ProgressFn& progress = {});

/// Summary statistics for `rows` according to the suite's grouping.
std::vector<Aggregate> aggregate_rows(SuiteKind suite, const std::vector<ResultRow>& rows);

// Emission.

inline constexpr const char* kResultsHeader =
    "suite,cell_p_plus,cell_c_plus,cell_p_minus,cell_c_minus,kappa,seed,policy,f_value,method,"
    "ratio,runtime_ms";
inline constexpr const char* kAggregatesHeader =
    "suite,cell_p_plus,cell_c_plus,cell_p_minus,cell_c_minus,kappa,policy,metric,count,min,mean,"
    "max";

std::string rows_to_csv(const std::vector<ResultRow>& rows);
std::string aggregates_to_csv(const std::vector<Aggregate>& aggregates);
/// {"rows": [...], "aggregates": [...]}, aggregates last.
nlohmann::ordered_json result_to_json(const SuiteResult& result);
std::vector<ResultRow> rows_from_json(const nlohmann::json& j);

enum class EmitFormat { csv, json };

/// Writes results.csv + aggregates.csv and/or results.json into `dir`.
/// Throws ConfigError when the directory cannot be written.
std::vector<std::filesystem::path> emit(const SuiteResult& result,
                                        const std::filesystem::path& dir,
                                        const std::vector<EmitFormat>& formats = {
                                            EmitFormat::csv, EmitFormat::json});

}  // namespace cascadia
