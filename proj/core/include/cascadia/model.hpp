#pragma once

// Core domain types for the cascade browse model: questions with their
// behaviour probabilities, instances, sequences, and reachability.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cascadia {

/// Dense question index 0..n-1. External ids are mapped at ingestion.
using QuestionId = std::size_t;
/// Dense attribute index 0..m-1.
using AttributeId = std::size_t;

/// An ordered arrangement of distinct question ids; slot i holds seq[i].
using Sequence = std::vector<QuestionId>;

struct Question {
  std::int64_t external_id = 0;
  double p_answer = 0.0;  // answer-through-rate
  double p_pna = 0.0;     // probability of "prefer not to answer"
  double c_answer = 0.0;  // continuation after answering
  double c_pna = 0.0;     // continuation after PNA
  std::vector<AttributeId> attributes;
  double weight = 1.0;   // MNL weight; also the per-question value of the modular utility
  double revenue = 1.0;  // MNL revenue
};

struct Attribute {
  std::int64_t external_id = 0;
  std::vector<double> distribution;
};

enum class UtilityKind { entropy, modular, mnl, callback };

/// User-supplied set function over question ids, for UtilityKind::callback.
/// Must be monotone, submodular and zero on the empty set for the
/// approximation guarantees to apply.
using SetCallback = std::function<double(std::span<const QuestionId>)>;

/// Which behaviour model a sequence is evaluated under.
enum class Variant {
  basic,       // answer / PNA / exit with continuation probabilities
  no_pna,      // p_pna treated as 0
  slot_decay,  // answer-through-rate at slot i scaled by decay[i]
  scrolling,   // independent inclusion at position_rates[q][slot], no cascade
};

struct Instance {
  std::vector<Question> questions;
  std::vector<Attribute> attributes;
  std::size_t budget = 1;
  UtilityKind utility = UtilityKind::entropy;
  std::optional<std::vector<double>> slot_decay;
  /// n x budget matrix of position-dependent answer rates.
  std::optional<std::vector<std::vector<double>>> position_rates;
  SetCallback callback;

  std::size_t size() const noexcept { return questions.size(); }
  /// Longest admissible sequence: min(budget, n).
  std::size_t max_length() const noexcept {
    return budget < questions.size() ? budget : questions.size();
  }
};

/// Outcome probabilities of reading one question at one slot. The remainder
/// 1 - (answer_continue + answer_stop + skip_continue) ends the scan without
/// an answer.
struct SlotBranch {
  double answer_continue = 0.0;
  double answer_stop = 0.0;
  double skip_continue = 0.0;

  double answer() const noexcept { return answer_continue + answer_stop; }
  double proceed() const noexcept { return answer_continue + skip_continue; }
};

/// p+c+ + p-c-, or lambda * p+c+ + p-c- under slot decay.
double agg_continuation(const Question& q, double decay = 1.0) noexcept;

/// Aggregated continuation at a 0-based slot using a decay vector.
double agg_continuation(const Question& q, std::size_t slot,
                        std::span<const double> decay);

/// Branch probabilities for question `q` placed at 0-based `slot`.
SlotBranch slot_branch(const Instance& inst, QuestionId q, std::size_t slot,
                       Variant variant);

/// Probability of each slot being read. Element 0 is 1; nonincreasing.
std::vector<double> reachability(std::span<const QuestionId> seq,
                                 const Instance& inst,
                                 Variant variant = Variant::basic);

/// Variant implied by the instance: slot_decay when a decay vector is
/// present, basic otherwise.
Variant natural_variant(const Instance& inst) noexcept;

/// Throws ConfigError when the data required by `variant` is missing or too
/// short for a sequence of `length` slots.
void require_variant_data(const Instance& inst, Variant variant,
                          std::size_t length);

struct Violation {
  std::string code;
  std::string detail;
};

/// Every violated instance invariant. Empty means the instance is valid.
std::vector<Violation> validate_instance(const Instance& inst);

/// Throws ValidationError listing all violations, if any.
void ensure_valid(const Instance& inst);

/// Throws ConfigError if `seq` has duplicates, unknown ids, or exceeds the
/// budget.
void check_sequence(std::span<const QuestionId> seq, const Instance& inst);

const char* to_string(UtilityKind kind) noexcept;
const char* to_string(Variant variant) noexcept;
UtilityKind parse_utility_kind(const std::string& text);
Variant parse_variant(const std::string& text);

}  // namespace cascadia
