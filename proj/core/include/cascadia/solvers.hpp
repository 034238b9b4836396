#pragma once

// Monotone submodular maximizers under knapsack, cardinality and partition
// matroid constraints, plus an exhaustive oracle for testing.

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cascadia {

using Item = std::size_t;

/// Set objective over items. The span is sorted ascending.
using SetObjective = std::function<double(std::span<const Item>)>;

inline constexpr double kInfiniteWeight = std::numeric_limits<double>::infinity();

/// Knapsack on -log continuation, cardinality, optional partition classes,
/// and one optionally excluded item.
struct ConstraintSet {
  double log_budget = kInfiniteWeight;
  /// Weight per item id; items beyond the vector weigh 0. +inf is never
  /// admissible.
  std::vector<double> item_weights;
  std::size_t cardinality = std::numeric_limits<std::size_t>::max();
  /// Class per item id; negative or missing means unconstrained. Empty
  /// disables the partition matroid.
  std::vector<long> partition;
  /// Capacity per class; empty means every class holds at most one item.
  std::vector<std::size_t> class_capacity;
  std::optional<Item> excluded;

  double weight(Item item) const noexcept;
  long class_of(Item item) const noexcept;
  std::size_t capacity(long cls) const noexcept;
  bool admits(Item item) const noexcept;
  bool within_budget(double total_weight) const noexcept;
  bool feasible(std::span<const Item> items) const;
};

/// -log(rho) for rho in (0, 1].
double log_budget_for(double rho);
/// -log(x), +inf at 0.
double neg_log_weight(double continuation) noexcept;

struct SolverResult {
  std::vector<Item> items;            // ascending
  std::vector<Item> selection_order;  // order items entered the solution
  double objective = 0.0;
  std::size_t evaluations = 0;
  std::string method;
};

/// Best of plain marginal-gain greedy and density greedy (gain / weight,
/// zero-weight items first), each optionally seeded from every feasible
/// subset of size <= enum_depth. Ties go to the lowest item id.
SolverResult greedy_knapsack(const SetObjective& objective, std::span<const Item> ground,
                             const ConstraintSet& cons, int enum_depth = 1);

/// Greedy under partition classes + knapsack + cardinality, followed by
/// single-swap local search (at most 50 * |ground| accepted moves, each
/// improving by more than 1e-9) when `local_search` is set.
SolverResult greedy_matroid_knapsack(const SetObjective& objective,
                                     std::span<const Item> ground, const ConstraintSet& cons,
                                     bool local_search = true, int enum_depth = 0);

/// Max-marginal-gain greedy over a partition matroid; at most
/// `cons.cardinality` picks. Knapsack fields are honoured but normally
/// unset.
SolverResult greedy_partition(const SetObjective& objective, std::span<const Item> ground,
                              const ConstraintSet& cons);

/// Exact maximizer by enumerating every feasible subset of `ground`
/// (at most 24 items). Ties go to the lexicographically smallest set.
SolverResult brute_force_subset(const SetObjective& objective, std::span<const Item> ground,
                                const ConstraintSet& cons);

}  // namespace cascadia
