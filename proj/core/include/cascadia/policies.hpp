#pragma once

// Question selection and sequencing policies: the surrogate-maximizing
// algorithms for each behaviour variant, two baselines, and the exhaustive
// optimum.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cascadia/evaluator.hpp"
#include "cascadia/model.hpp"
#include "cascadia/solvers.hpp"

namespace cascadia {

enum class PolicyKind {
  alg1_no_pna,
  alg2_general,
  alg3_decay_no_pna,
  alg4_decay_pna,
  alg5_pna_decision,
  alg6_scrolling,
  random,
  max_ent,
  exact_optimal,
};

const char* to_string(PolicyKind kind) noexcept;
/// Accepts the enum names plus the short forms alg1..alg6, qss (= alg2),
/// maxent and opt.
PolicyKind parse_policy_kind(const std::string& text);

/// How v = E[g(R)] is computed inside solvers.
enum class VMode { automatic, exact, sampled };

/// Order of the selected set S' ahead of the trailing q'.
enum class SubsetOrder {
  ascending_id,  // question id
  selection,     // order in which the inner solver picked the items
};

const char* to_string(VMode mode) noexcept;
const char* to_string(SubsetOrder order) noexcept;
VMode parse_v_mode(const std::string& text);
SubsetOrder parse_subset_order(const std::string& text);

struct InnerConfig {
  int enum_depth = 1;  // partial-enumeration depth, 0..3
  bool local_search = true;
  VMode v_mode = VMode::automatic;
  std::size_t v_samples = kDefaultPanelSize;
  std::uint64_t v_seed = 0;
  SubsetOrder order = SubsetOrder::ascending_id;
};

inline constexpr double kDefaultComputeCap = 1e9;

struct PolicySpec {
  PolicyKind kind = PolicyKind::alg2_general;
  double rho = 0.5;
  /// When set, the policy runs once per value and keeps the output with the
  /// highest expected utility (first value wins ties).
  std::optional<std::vector<double>> rho_sweep;
  InnerConfig inner;
  std::uint64_t seed = 0;  // random and max_ent ordering
  double compute_cap = kDefaultComputeCap;
  Variant variant = Variant::basic;  // exact_optimal scoring model
};

struct PolicyDiagnostics {
  std::optional<QuestionId> q_prime;
  std::optional<std::size_t> subset_size;
  std::optional<std::size_t> t_prime;  // 1-based slot of q'
  std::optional<double> rho;
  std::size_t evaluations = 0;
  std::string inner_method;
};

struct PolicyOutput {
  Sequence sequence;
  /// alg5 only: true when the question is shown with the PNA option.
  std::optional<std::map<QuestionId, bool>> pna;
  double surrogate_value = 0.0;
  PolicyDiagnostics diagnostics;
};

/// Algorithm for the model without PNA: for each q solves
/// max u(q, S) s.t. sum -log(p+c+) <= -log rho, |S| <= b-1, q not in S.
/// p_pna is ignored (treated as zero).
PolicyOutput alg1_no_pna(const Instance& inst, double rho, const InnerConfig& inner = {});

/// QSS: as alg1 with objective v(q, S) and weights -log(c_q).
PolicyOutput alg2_general(const Instance& inst, double rho, const InnerConfig& inner = {});

/// Slot decay without PNA: outer loop over the slot t of q as well.
PolicyOutput alg3_decay_no_pna(const Instance& inst, double rho, const InnerConfig& inner = {});

/// Slot decay with PNA over virtual (question, slot) copies.
PolicyOutput alg4_decay_pna(const Instance& inst, double rho, const InnerConfig& inner = {});

/// Joint sequencing and PNA decision. `without_pna` holds each question's
/// parameters when PNA is not offered (same questions and utility).
PolicyOutput alg5_pna_decision(const Instance& with_pna, const Instance& without_pna,
                               double rho, const InnerConfig& inner = {});

/// Scrolling model: greedy over (question, slot) pairs, one per slot.
PolicyOutput alg6_scrolling(const Instance& inst, const InnerConfig& inner = {});

/// Uniform random min(b, n)-subset in uniform random order.
PolicyOutput baseline_random(const Instance& inst, std::uint64_t seed);

/// Max-g min(b, n)-subset (lexicographically first among ties) in a seeded
/// random order. At most 24 questions.
PolicyOutput baseline_max_ent(const Instance& inst, std::uint64_t seed);

/// Best ordered sequence of length min(b, n) under `variant`; ties go to
/// the lexicographically smallest sequence. Throws ComputeCapExceeded when
/// the estimated number of elementary steps exceeds `compute_cap`.
PolicyOutput exact_optimal(const Instance& inst, Variant variant = Variant::basic,
                           double compute_cap = kDefaultComputeCap);

/// Best sequence jointly with per-question PNA choices.
PolicyOutput exact_optimal_pna(const Instance& with_pna, const Instance& without_pna,
                               double compute_cap = kDefaultComputeCap);

/// Instance whose question q carries without_pna's parameters wherever
/// pna[q] is false.
Instance apply_pna_choices(const Instance& with_pna, const Instance& without_pna,
                           const std::map<QuestionId, bool>& pna);

/// Expected utility of a policy output: exact up to kMaxExactLength slots,
/// Monte Carlo beyond. alg5 outputs are scored on apply_pna_choices.
EvalReport score_output(const PolicyOutput& out, const Instance& inst, Variant variant,
                        const Instance* without_pna = nullptr);

/// Dispatches on spec.kind; applies spec.rho_sweep when present.
/// `without_pna` is required for alg5.
PolicyOutput run_policy(const Instance& inst, const PolicySpec& spec,
                        const Instance* without_pna = nullptr);

/// Variant a policy's output should be scored under.
Variant scoring_variant(PolicyKind kind, const Instance& inst) noexcept;

}  // namespace cascadia
