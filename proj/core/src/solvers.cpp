#include "cascadia/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "cascadia/error.hpp"

namespace cascadia {

namespace {

constexpr double kGainTolerance = 1e-12;
constexpr double kSwapImprovement = 1e-9;
constexpr double kBudgetSlack = 1e-9;
constexpr std::size_t kMaxBruteForceGround = 24;

enum class Rule { marginal, density };

/// A partial solution with its running feasibility bookkeeping.
class Candidate {
 public:
  explicit Candidate(const ConstraintSet& cons) : cons_(&cons) {}

  const std::vector<Item>& items() const noexcept { return items_; }
  const std::vector<Item>& order() const noexcept { return order_; }
  double value() const noexcept { return value_; }
  void set_value(double v) noexcept { value_ = v; }

  bool contains(Item x) const { return std::binary_search(items_.begin(), items_.end(), x); }

  bool can_add(Item x) const {
    if (contains(x) || !cons_->admits(x)) return false;
    if (items_.size() + 1 > cons_->cardinality) return false;
    if (!cons_->within_budget(weight_ + cons_->weight(x))) return false;
    const long cls = cons_->class_of(x);
    if (cls >= 0 && count_in(cls) + 1 > cons_->capacity(cls)) return false;
    return true;
  }

  void add(Item x) {
    items_.insert(std::upper_bound(items_.begin(), items_.end(), x), x);
    order_.push_back(x);
    weight_ += cons_->weight(x);
  }

  std::vector<Item> with(Item x) const {
    std::vector<Item> out;
    out.reserve(items_.size() + 1);
    auto pos = std::upper_bound(items_.begin(), items_.end(), x);
    out.insert(out.end(), items_.begin(), pos);
    out.push_back(x);
    out.insert(out.end(), pos, items_.end());
    return out;
  }

 private:
  std::size_t count_in(long cls) const {
    std::size_t n = 0;
    for (Item i : items_) n += cons_->class_of(i) == cls ? 1 : 0;
    return n;
  }

  const ConstraintSet* cons_;
  std::vector<Item> items_;
  std::vector<Item> order_;
  double weight_ = 0.0;
  double value_ = 0.0;
};

struct Evaluator {
  const SetObjective& objective;
  std::size_t calls = 0;

  double operator()(std::span<const Item> items) {
    ++calls;
    return objective(items);
  }
};

/// Extends `state` greedily until no admissible item has positive gain.
/// Density ranks zero-weight items ahead of all others.
void run_greedy(Evaluator& eval, std::span<const Item> ground, const ConstraintSet& cons,
                Candidate& state, Rule rule) {
  for (;;) {
    bool found = false;
    Item best = 0;
    bool best_free = false;
    double best_key = 0.0;
    double best_value = 0.0;
    for (Item x : ground) {
      if (!state.can_add(x)) continue;
      const double v = eval(state.with(x));
      const double gain = v - state.value();
      if (gain <= kGainTolerance) continue;
      bool is_free = false;
      double key = gain;
      if (rule == Rule::density) {
        const double w = cons.weight(x);
        is_free = w <= 0.0;
        if (!is_free) key = gain / w;
      }
      if (!found || (is_free && !best_free) || (is_free == best_free && key > best_key)) {
        found = true;
        best = x;
        best_free = is_free;
        best_key = key;
        best_value = v;
      }
    }
    if (!found) return;
    state.add(best);
    state.set_value(best_value);
  }
}

SolverResult to_result(const Candidate& c, std::size_t evaluations, std::string method) {
  SolverResult r;
  r.items = c.items();
  r.selection_order = c.order();
  r.objective = c.value();
  r.evaluations = evaluations;
  r.method = std::move(method);
  return r;
}

bool improves(double candidate, double incumbent) {
  return candidate > incumbent + kGainTolerance * std::max(1.0, std::abs(incumbent));
}

/// Every feasible subset of `ground` with 1..depth items, in lexicographic
/// order, passed to `visit` as a Candidate.
void for_each_seed(std::span<const Item> ground, const ConstraintSet& cons, int depth,
                   const std::function<void(const Candidate&)>& visit) {
  if (depth <= 0) return;
  std::function<void(std::size_t, const Candidate&, int)> rec =
      [&](std::size_t from, const Candidate& base, int left) {
        for (std::size_t i = from; i < ground.size(); ++i) {
          if (!base.can_add(ground[i])) continue;
          Candidate next = base;
          next.add(ground[i]);
          visit(next);
          if (left > 1) rec(i + 1, next, left - 1);
        }
      };
  rec(0, Candidate(cons), depth);
}

/// Best of greedy runs from the empty set and from every seed, under both
/// selection rules.
Candidate best_greedy(Evaluator& eval, std::span<const Item> ground, const ConstraintSet& cons,
                      int enum_depth, bool density) {
  Candidate best(cons);
  best.set_value(eval({}));
  const double empty_value = best.value();
  bool have = false;

  auto run_from = [&](const Candidate& seed) {
    for (Rule rule : {Rule::marginal, Rule::density}) {
      if (rule == Rule::density && !density) continue;
      Candidate c = seed;
      run_greedy(eval, ground, cons, c, rule);
      if (!have || improves(c.value(), best.value())) {
        best = c;
        have = true;
      }
    }
  };

  Candidate empty(cons);
  empty.set_value(empty_value);
  run_from(empty);
  for_each_seed(ground, cons, enum_depth, [&](const Candidate& seed) {
    Candidate s = seed;
    s.set_value(eval(s.items()));
    run_from(s);
  });
  return best;
}

void check_feasible(const SolverResult& r, const ConstraintSet& cons) {
  if (!cons.feasible(r.items)) {
    throw std::logic_error("solver produced an infeasible set (" + r.method + ")");
  }
}

std::vector<Item> sorted_ground(std::span<const Item> ground) {
  std::vector<Item> g(ground.begin(), ground.end());
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  return g;
}

/// Single add / swap moves, best improvement first, until no move improves
/// by more than kSwapImprovement or `budget` moves were made.
void local_search(Evaluator& eval, std::span<const Item> ground, const ConstraintSet& cons,
                  Candidate& state, std::size_t budget) {
  for (std::size_t moves = 0; moves < budget; ++moves) {
    const std::vector<Item> current = state.items();
    double best_value = state.value() + kSwapImprovement;
    bool swap = false;
    Item best_out = 0;
    std::optional<Item> best_in;
    std::vector<Item> trial;
    for (Item in : ground) {
      if (std::binary_search(current.begin(), current.end(), in) || !cons.admits(in)) continue;
      // additions
      trial = current;
      trial.insert(std::upper_bound(trial.begin(), trial.end(), in), in);
      if (cons.feasible(trial)) {
        const double v = eval(trial);
        if (v > best_value) {
          best_value = v;
          swap = false;
          best_in = in;
        }
      }
      for (Item out : current) {
        trial.clear();
        for (Item x : current) {
          if (x != out) trial.push_back(x);
        }
        trial.insert(std::upper_bound(trial.begin(), trial.end(), in), in);
        if (!cons.feasible(trial)) continue;
        const double v = eval(trial);
        if (v > best_value) {
          best_value = v;
          swap = true;
          best_out = out;
          best_in = in;
        }
      }
    }
    if (!best_in) return;
    Candidate next(cons);
    for (Item x : state.order()) {
      if (!swap || x != best_out) next.add(x);
    }
    next.add(*best_in);
    next.set_value(best_value);
    state = next;
  }
}

}  // namespace

double ConstraintSet::weight(Item item) const noexcept {
  return item < item_weights.size() ? item_weights[item] : 0.0;
}

long ConstraintSet::class_of(Item item) const noexcept {
  return item < partition.size() ? partition[item] : -1;
}

std::size_t ConstraintSet::capacity(long cls) const noexcept {
  if (class_capacity.empty()) return 1;
  return cls >= 0 && static_cast<std::size_t>(cls) < class_capacity.size()
             ? class_capacity[static_cast<std::size_t>(cls)]
             : 1;
}

bool ConstraintSet::admits(Item item) const noexcept {
  if (excluded && *excluded == item) return false;
  return std::isfinite(weight(item));
}

bool ConstraintSet::within_budget(double total_weight) const noexcept {
  if (!std::isfinite(total_weight)) return false;
  if (!std::isfinite(log_budget)) return true;
  return total_weight <= log_budget + kBudgetSlack * std::max(1.0, log_budget);
}

bool ConstraintSet::feasible(std::span<const Item> items) const {
  if (items.size() > cardinality) return false;
  double total = 0.0;
  std::vector<std::pair<long, std::size_t>> counts;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const Item x = items[i];
    if (!admits(x)) return false;
    for (std::size_t j = 0; j < i; ++j) {
      if (items[j] == x) return false;
    }
    total += weight(x);
    const long cls = class_of(x);
    if (cls < 0) continue;
    auto it = std::find_if(counts.begin(), counts.end(),
                           [cls](const auto& c) { return c.first == cls; });
    if (it == counts.end()) {
      counts.emplace_back(cls, 1);
    } else {
      ++it->second;
    }
  }
  for (const auto& [cls, n] : counts) {
    if (n > capacity(cls)) return false;
  }
  return within_budget(total);
}

double log_budget_for(double rho) {
  if (!(rho > 0.0 && rho <= 1.0)) throw ConfigError("rho must lie in (0, 1]");
  return -std::log(rho);
}

double neg_log_weight(double continuation) noexcept {
  if (!(continuation > 0.0)) return kInfiniteWeight;
  const double w = -std::log(continuation);
  return w > 0.0 ? w : 0.0;
}

SolverResult greedy_knapsack(const SetObjective& objective, std::span<const Item> ground,
                             const ConstraintSet& cons, int enum_depth) {
  if (enum_depth < 0 || enum_depth > 3) throw ConfigError("enum_depth must lie in [0, 3]");
  const auto items = sorted_ground(ground);
  Evaluator eval{objective};
  const Candidate best = best_greedy(eval, items, cons, enum_depth, true);
  auto r = to_result(best, eval.calls, "greedy_knapsack(depth=" + std::to_string(enum_depth) + ")");
  check_feasible(r, cons);
  return r;
}

SolverResult greedy_matroid_knapsack(const SetObjective& objective,
                                     std::span<const Item> ground, const ConstraintSet& cons,
                                     bool local_search_enabled, int enum_depth) {
  if (enum_depth < 0 || enum_depth > 3) throw ConfigError("enum_depth must lie in [0, 3]");
  const auto items = sorted_ground(ground);
  Evaluator eval{objective};
  Candidate best = best_greedy(eval, items, cons, enum_depth, true);
  if (local_search_enabled) local_search(eval, items, cons, best, 50 * items.size());
  auto r = to_result(best, eval.calls,
                     std::string("greedy_matroid_knapsack(") +
                         (local_search_enabled ? "local_search" : "greedy") +
                         ",depth=" + std::to_string(enum_depth) + ")");
  check_feasible(r, cons);
  return r;
}

SolverResult greedy_partition(const SetObjective& objective, std::span<const Item> ground,
                              const ConstraintSet& cons) {
  const auto items = sorted_ground(ground);
  Evaluator eval{objective};
  Candidate c(cons);
  c.set_value(eval({}));
  run_greedy(eval, items, cons, c, Rule::marginal);
  auto r = to_result(c, eval.calls, "greedy_partition");
  check_feasible(r, cons);
  return r;
}

SolverResult brute_force_subset(const SetObjective& objective, std::span<const Item> ground,
                                const ConstraintSet& cons) {
  const auto items = sorted_ground(ground);
  if (items.size() > kMaxBruteForceGround) {
    throw ConfigError("brute_force_subset supports at most 24 items");
  }
  Evaluator eval{objective};
  std::vector<Item> best;
  double best_value = eval({});
  std::vector<Item> trial;
  const std::uint64_t full = std::uint64_t{1} << items.size();
  for (std::uint64_t mask = 1; mask < full; ++mask) {
    trial.clear();
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (mask >> i & 1U) trial.push_back(items[i]);
    }
    if (!cons.feasible(trial)) continue;
    const double v = eval(trial);
    const double tol = kGainTolerance * std::max(1.0, std::abs(best_value));
    if (v > best_value + tol ||
        (v >= best_value - tol &&
         std::lexicographical_compare(trial.begin(), trial.end(), best.begin(), best.end()))) {
      best = trial;
      best_value = v;
    }
  }
  SolverResult r;
  r.items = best;
  r.selection_order = best;
  r.objective = best_value;
  r.evaluations = eval.calls;
  r.method = "brute_force_subset";
  check_feasible(r, cons);
  return r;
}

}  // namespace cascadia
