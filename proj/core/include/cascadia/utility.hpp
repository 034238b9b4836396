#pragma once

// Monotone submodular set functions g over question subsets: coverage
// entropy, modular sums, MNL expected revenue, and a user callback.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "cascadia/model.hpp"

namespace cascadia {

/// Bitmask over workspace positions (not question ids).
using Mask = std::uint64_t;
inline constexpr std::size_t kMaxWorkspaceItems = 64;

/// Shannon entropy in nats; zero-probability entries contribute 0.
double attribute_entropy(std::span<const double> distribution);

class Utility {
 public:
  /// Throws ConfigError for unknown attribute ids, negative MNL weights, or
  /// a callback kind without a function.
  explicit Utility(const Instance& inst);

  UtilityKind kind() const noexcept { return kind_; }
  std::size_t ground_size() const noexcept { return attrs_.size(); }

  /// g(set). Repeated ids count once.
  double value(std::span<const QuestionId> set) const;

  /// False only for MNL revenue with unequal revenues, where submodularity
  /// (and every approximation guarantee) may fail.
  bool submodular_by_construction() const noexcept { return submodular_; }

 private:
  friend class UtilityWorkspace;

  UtilityKind kind_;
  std::vector<double> entropy_;
  std::vector<std::vector<AttributeId>> attrs_;
  std::vector<double> weight_;
  std::vector<double> revenue_;
  SetCallback callback_;
  bool submodular_ = true;
};

/// Stack of up to 64 questions with O(|attributes of q|) marginal gains over
/// subsets of the stack, addressed by position bitmask. Evaluators and
/// exhaustive searches push/pop questions as they walk a sequence tree.
class UtilityWorkspace {
 public:
  explicit UtilityWorkspace(const Utility& g);

  void push(QuestionId q);
  void pop();
  void clear();
  std::size_t size() const noexcept { return items_.size(); }
  QuestionId item(std::size_t pos) const { return items_[pos]; }

  /// g of the stacked questions selected by `mask`.
  double value(Mask mask) const;
  /// g(mask + pos) - g(mask); `pos` must not be in `mask`.
  double gain(Mask mask, std::size_t pos) const;

 private:
  const Utility* g_;
  std::vector<QuestionId> items_;
  std::vector<Mask> cover_;            // entropy: positions covering each attribute
  std::vector<AttributeId> touched_;   // entropy: attributes with nonzero cover, LIFO
  std::vector<std::size_t> touched_mark_;
  mutable std::vector<QuestionId> scratch_;
};

double eval_entropy(std::span<const QuestionId> set, const Instance& inst);
double eval_modular(std::span<const QuestionId> set, const Instance& inst);
double eval_mnl_revenue(std::span<const QuestionId> set, const Instance& inst);

/// Set function over items 0..n-1; the span is sorted ascending.
using SetFunction = std::function<double(std::span<const std::size_t>)>;

struct SubmodularityWitness {
  std::vector<std::size_t> smaller;  // Y1 (empty for monotonicity witnesses)
  std::vector<std::size_t> larger;   // Y2
  std::size_t element = 0;           // y
  double gain_smaller = 0.0;
  double gain_larger = 0.0;
  bool monotonicity = false;
};

struct SubmodularityReport {
  bool monotone = true;
  bool submodular = true;
  bool exhaustive = true;
  std::size_t triples_checked = 0;
  std::vector<SubmodularityWitness> witnesses;
};

/// Checks g(Y1+y)-g(Y1) >= g(Y2+y)-g(Y2) for Y1 in Y2, y not in Y2, and
/// g(Y) <= g(Y+y), within `tolerance`. Exhaustive when n <= exhaustive_limit,
/// otherwise over `samples` random triples.
SubmodularityReport check_monotone_submodular(const SetFunction& g, std::size_t n,
                                              std::size_t exhaustive_limit = 10,
                                              std::size_t samples = 20000,
                                              std::uint64_t seed = 1,
                                              double tolerance = 1e-9);

SubmodularityReport check_monotone_submodular(const Utility& g,
                                              std::size_t exhaustive_limit = 10,
                                              std::size_t samples = 20000,
                                              std::uint64_t seed = 1);

}  // namespace cascadia
