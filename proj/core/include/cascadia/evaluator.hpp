#pragma once

// Exact and Monte-Carlo evaluation of the sequence objective f(Q), the
// independent-inclusion expectation E[g(R(.))], and the surrogates u and v.

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "cascadia/model.hpp"
#include "cascadia/utility.hpp"

namespace cascadia {

enum class EvalMethod { exact, monte_carlo };

const char* to_string(EvalMethod method) noexcept;

struct EvalReport {
  double value = 0.0;
  std::optional<double> std_error;  // Monte Carlo only
  std::vector<double> reachability;
  EvalMethod method = EvalMethod::exact;
  std::optional<std::size_t> samples;
};

/// Longest sequence eval_exact accepts (2^22 answered-subset masses).
inline constexpr std::size_t kMaxExactLength = 22;
/// Largest set the exact v estimator enumerates (2^20 inclusion patterns).
inline constexpr std::size_t kMaxExactInclusion = 20;
inline constexpr std::size_t kDefaultPanelSize = 5000;

/// Probability mass on one answered subset of the stacked prefix.
struct MaskMass {
  Mask mask = 0;
  double mass = 0.0;
};

/// Expected g of the answered set when the questions stacked in `ws` are
/// read in order with per-position branch probabilities `branches`.
/// Sums, over positions i and answered subsets A of the earlier positions,
/// P(reach i with A) * P(answer i) * (g(A + i) - g(A)), which telescopes to
/// sum over terminal states of mass * g(answered). `scratch` is reused.
double branch_expectation(const UtilityWorkspace& ws, std::span<const SlotBranch> branches,
                          std::vector<MaskMass>& scratch);

/// Exact f(Q) under `variant`. Throws ComputeCapExceeded beyond
/// kMaxExactLength slots and ConfigError when variant data is missing.
EvalReport eval_exact(std::span<const QuestionId> seq, const Instance& inst,
                      Variant variant = Variant::basic);

/// Sample mean of g(J(Q)) over simulated scans; deterministic per seed.
EvalReport eval_monte_carlo(std::span<const QuestionId> seq, const Instance& inst,
                            Variant variant, std::size_t samples, std::uint64_t seed);

/// Exact when |Q| <= kMaxExactLength, otherwise Monte Carlo.
EvalReport evaluate(std::span<const QuestionId> seq, const Instance& inst,
                    Variant variant = Variant::basic, std::size_t mc_samples = 100000,
                    std::uint64_t seed = 0);

/// u(q, S) = a g(S + q) + (1 - a) g(S) with a = decay * p+_q.
/// Throws ConfigError when q is in S.
double eval_u(QuestionId q, std::span<const QuestionId> set, const Instance& inst,
              std::optional<double> decay = std::nullopt);

/// One candidate member of an independently included random set.
struct Inclusion {
  QuestionId question = 0;
  double probability = 0.0;
};

/// E[g(R)] where each distinct question is included independently. Several
/// inclusions of the same question (virtual copies) collapse to the largest
/// probability. The sampled mode draws one fixed uniform panel per
/// (question, sample) at construction and reuses it for every call, so
/// marginal comparisons inside a solver run share common random numbers.
///
/// Holds a mutable workspace: use one oracle per thread.
class VOracle {
 public:
  static VOracle exact(const Instance& inst);
  static VOracle sampled(const Instance& inst, std::size_t samples, std::uint64_t seed);
  /// Exact when sets stay within kMaxExactInclusion, sampled otherwise.
  static VOracle automatic(const Instance& inst, std::size_t max_set_size,
                           std::size_t samples = kDefaultPanelSize, std::uint64_t seed = 0);

  double expected(std::span<const Inclusion> items) const;
  bool is_exact() const noexcept { return panel_ == nullptr; }
  std::size_t calls() const noexcept { return calls_; }

 private:
  VOracle(const Instance& inst, std::size_t samples, std::uint64_t seed, bool sampled);

  std::shared_ptr<const Utility> g_;
  std::shared_ptr<const std::vector<double>> panel_;  // question-major uniforms
  std::size_t samples_ = 0;
  mutable std::unique_ptr<UtilityWorkspace> ws_;
  mutable std::vector<MaskMass> scratch_;
  mutable std::vector<Inclusion> merged_;
  mutable std::vector<SlotBranch> branches_;
  mutable std::size_t calls_ = 0;
};

/// v(q, S) = E[g(R(S + q))] with inclusion probabilities p+.
/// Throws ConfigError when q is in S, or when the exact oracle would need
/// more than kMaxExactInclusion items.
double eval_v(QuestionId q, std::span<const QuestionId> set, const Instance& inst,
              const VOracle& oracle);

/// Inclusion probability of the question at 0-based `slot`: p+ (basic and
/// no_pna), lambda_slot * p+ (slot_decay), or position_rates[q][slot].
double inclusion_probability(const Instance& inst, QuestionId q, std::size_t slot,
                             Variant variant);

/// E[g(R(Q))] with each Q[i] included at inclusion_probability(.., i, ..).
double expected_random_set(std::span<const QuestionId> seq, const Instance& inst,
                           Variant variant, const VOracle& oracle);

}  // namespace cascadia
