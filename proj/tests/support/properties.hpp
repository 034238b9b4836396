#pragma once

// Exhaustive property sweeps shared by the unit tests (small counts) and
// the acceptance binary (full counts). Each returns how many cases were
// checked and a description of the first failure.

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "cascadia/evaluator.hpp"
#include "cascadia/policies.hpp"
#include "cascadia/solvers.hpp"
#include "cascadia/utility.hpp"
#include "oracles.hpp"

namespace cascadia::testing {

struct PropertyResult {
  std::size_t checked = 0;
  std::size_t failures = 0;
  std::string first_failure;

  bool ok() const noexcept { return failures == 0 && checked > 0; }
  void fail(const std::string& what) {
    if (failures++ == 0) first_failure = what;
  }
  void merge(const PropertyResult& other) {
    checked += other.checked;
    if (other.failures && failures == 0) first_failure = other.first_failure;
    failures += other.failures;
  }
};

inline const double kOneMinusInvE = 1.0 - std::exp(-1.0);

/// Every subset of 0..n-1 as an ascending vector.
inline std::vector<std::vector<QuestionId>> all_subsets(std::size_t n) {
  std::vector<std::vector<QuestionId>> out;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    std::vector<QuestionId> s;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask >> i & 1) s.push_back(i);
    }
    out.push_back(std::move(s));
  }
  return out;
}

/// Every ordered sequence of distinct ids from 0..n-1 of length 1..max_len.
inline std::vector<std::vector<QuestionId>> all_sequences(std::size_t n, std::size_t max_len) {
  std::vector<std::vector<QuestionId>> out;
  std::vector<QuestionId> seq;
  std::vector<bool> used(n, false);
  std::function<void()> rec = [&] {
    if (!seq.empty()) out.push_back(seq);
    if (seq.size() == max_len) return;
    for (QuestionId q = 0; q < n; ++q) {
      if (used[q]) continue;
      used[q] = true;
      seq.push_back(q);
      rec();
      seq.pop_back();
      used[q] = false;
    }
  };
  rec();
  return out;
}

/// g, u(q, .) and v(q, .) are monotone submodular, exhaustively for n <= 6.
inline PropertyResult prop_submodular_surrogates(std::size_t instances, std::uint64_t seed) {
  PropertyResult r;
  const UtilityKind kinds[] = {UtilityKind::entropy, UtilityKind::modular, UtilityKind::mnl};
  for (std::size_t i = 0; i < instances; ++i) {
    RandomSpec spec;
    spec.n = 3 + i % 4;
    spec.utility = kinds[i % 3];
    const Instance inst = random_instance(derive_seed(seed, 1, i), spec);
    const Utility g(inst);
    const auto report = check_monotone_submodular(g, 10);
    ++r.checked;
    if (!report.monotone || !report.submodular) r.fail("g not monotone submodular, instance " + std::to_string(i));

    const VOracle oracle = VOracle::exact(inst);
    for (QuestionId q = 0; q < inst.size(); ++q) {
      // Items 0..n-2 map to the other questions.
      auto lift = [&](std::span<const std::size_t> items) {
        std::vector<QuestionId> s;
        for (std::size_t k : items) s.push_back(k < q ? k : k + 1);
        return s;
      };
      SetFunction u = [&](std::span<const std::size_t> items) { return eval_u(q, lift(items), inst); };
      SetFunction v = [&](std::span<const std::size_t> items) {
        return eval_v(q, lift(items), inst, oracle);
      };
      const auto ru = check_monotone_submodular(u, inst.size() - 1, 10);
      const auto rv = check_monotone_submodular(v, inst.size() - 1, 10);
      r.checked += 2;
      if (!ru.monotone || !ru.submodular) r.fail("u(q,.) fails, instance " + std::to_string(i));
      if (!rv.monotone || !rv.submodular) r.fail("v(q,.) fails, instance " + std::to_string(i));
    }
  }
  return r;
}

/// The longest prefix of the optimum with every reachability >= rho keeps
/// at least (1 - rho) of its value.
inline PropertyResult prop_prefix_bound(std::size_t instances, std::uint64_t seed) {
  PropertyResult r;
  for (std::size_t i = 0; i < instances; ++i) {
    RandomSpec spec;
    spec.n = 4 + i % 3;
    spec.budget = spec.n;
    const Instance inst = random_instance(derive_seed(seed, 2, i), spec);
    const PolicyOutput opt = exact_optimal(inst);
    const double f_opt = eval_exact(opt.sequence, inst).value;
    const auto reach = reachability(opt.sequence, inst);
    for (double rho = 0.05; rho < 1.0; rho += 0.05) {
      std::size_t k = 0;
      while (k < reach.size() && reach[k] >= rho) ++k;
      const std::span<const QuestionId> prefix(opt.sequence.data(), k);
      const double f_prefix = eval_exact(prefix, inst).value;
      ++r.checked;
      if (f_prefix < (1.0 - rho) * f_opt - 1e-9) {
        std::ostringstream msg;
        msg << "prefix bound: instance " << i << " rho " << rho << " prefix " << f_prefix
            << " < " << (1.0 - rho) * f_opt;
        r.fail(msg.str());
      }
    }
  }
  return r;
}

/// For every sequence of length <= 4 on n <= 5: f >= rho E[g(R)] with rho
/// the minimum reachability, f <= E[g(R)], and appending never lowers f.
inline PropertyResult prop_reach_sandwich(std::size_t instances, std::uint64_t seed) {
  PropertyResult r;
  for (std::size_t i = 0; i < instances; ++i) {
    RandomSpec spec;
    spec.n = 5;
    spec.budget = 5;
    const Instance inst = random_instance(derive_seed(seed, 3, i), spec);
    const VOracle oracle = VOracle::exact(inst);
    for (const auto& seq : all_sequences(inst.size(), 4)) {
      const double f = eval_exact(seq, inst).value;
      const auto reach = reachability(seq, inst);
      const double rho = *std::min_element(reach.begin(), reach.end());
      const double eg = expected_random_set(seq, inst, Variant::basic, oracle);
      r.checked += 3;
      if (f < rho * eg - 1e-12) r.fail("f < rho E[g(R)] on instance " + std::to_string(i));
      if (f > eg + 1e-12) r.fail("f > E[g(R)] on instance " + std::to_string(i));
      const std::span<const QuestionId> shorter(seq.data(), seq.size() - 1);
      if (eval_exact(shorter, inst).value > f + 1e-12) {
        r.fail("appending lowered f on instance " + std::to_string(i));
      }
    }
  }
  return r;
}

/// Raising any decay factor never lowers f.
inline PropertyResult prop_decay_monotone(std::size_t instances, std::uint64_t seed) {
  PropertyResult r;
  for (std::size_t i = 0; i < instances; ++i) {
    RandomSpec spec;
    spec.n = 5;
    spec.budget = 4;
    spec.decay = true;
    Instance inst = random_instance(derive_seed(seed, 4, i), spec);
    Rng rng(derive_seed(seed, 5, i));
    for (const auto& seq : all_sequences(inst.size(), 4)) {
      const double before = eval_exact(seq, inst, Variant::slot_decay).value;
      Instance raised = inst;
      auto& decay = *raised.slot_decay;
      for (std::size_t s = 1; s < decay.size(); ++s) {
        decay[s] = std::min(1.0, decay[s] + (1.0 - decay[s]) * rng.uniform());
      }
      const double after = eval_exact(seq, raised, Variant::slot_decay).value;
      ++r.checked;
      if (after < before - 1e-12) r.fail("decay increase lowered f on instance " + std::to_string(i));
    }
  }
  return r;
}

/// Random knapsack + cardinality problem over an entropy instance.
struct KnapsackCase {
  Instance inst;
  std::vector<Item> ground;
  ConstraintSet cons;
};

inline KnapsackCase knapsack_case(std::uint64_t seed, std::size_t n) {
  RandomSpec spec;
  spec.n = n;
  spec.budget = n;
  KnapsackCase c{random_instance(seed, spec), {}, {}};
  Rng rng(derive_seed(seed, 99));
  for (std::size_t q = 0; q < n; ++q) {
    c.ground.push_back(q);
    c.cons.item_weights.push_back(neg_log_weight(0.3 + 0.7 * rng.uniform()));
  }
  c.cons.log_budget = log_budget_for(0.05 + 0.6 * rng.uniform());
  c.cons.cardinality = 2 + rng.below(n - 2);
  return c;
}

/// Virtual (question, slot) copies; inclusion at the best chosen rate.
struct PartitionCase {
  Instance inst;
  std::size_t slots = 3;
  std::vector<Item> ground;
  ConstraintSet cons;

  double value(std::span<const Item> items) const {
    std::vector<double> best(inst.size(), 0.0);
    for (Item it : items) {
      const QuestionId q = it / slots;
      best[q] = std::max(best[q], (*inst.position_rates)[q][it % slots]);
    }
    std::vector<QuestionId> qs;
    std::vector<double> ps;
    for (QuestionId q = 0; q < inst.size(); ++q) {
      if (best[q] > 0.0) {
        qs.push_back(q);
        ps.push_back(best[q]);
      }
    }
    return inclusion_value(qs, ps, inst);
  }
};

inline PartitionCase partition_case(std::uint64_t seed, bool knapsack) {
  RandomSpec spec;
  spec.n = 6;
  spec.budget = 3;
  spec.scrolling = true;
  PartitionCase c{random_instance(seed, spec), 3, {}, {}};
  Rng rng(derive_seed(seed, 77));
  for (std::size_t q = 0; q < c.inst.size(); ++q) {
    for (std::size_t s = 0; s < c.slots; ++s) {
      c.ground.push_back(q * c.slots + s);
      c.cons.partition.push_back(static_cast<long>(s));
      if (knapsack) c.cons.item_weights.push_back(neg_log_weight(0.4 + 0.6 * rng.uniform()));
    }
  }
  if (knapsack) c.cons.log_budget = log_budget_for(0.1 + 0.5 * rng.uniform());
  return c;
}

/// Greedy solvers against brute force: knapsack at depth 2 keeps 1 - 1/e,
/// matroid greedy and partition greedy keep 1/2.
inline PropertyResult prop_solver_floors(std::size_t instances, std::uint64_t seed) {
  PropertyResult r;
  for (std::size_t i = 0; i < instances; ++i) {
    {
      const KnapsackCase c = knapsack_case(derive_seed(seed, 6, i), 8);
      SetObjective obj = [&](std::span<const Item> s) {
        return oracle_g(std::vector<QuestionId>(s.begin(), s.end()), c.inst);
      };
      const double greedy = greedy_knapsack(obj, c.ground, c.cons, 2).objective;
      const double opt = brute_force_subset(obj, c.ground, c.cons).objective;
      ++r.checked;
      if (greedy < kOneMinusInvE * opt - 1e-9) r.fail("knapsack floor, instance " + std::to_string(i));
    }
    for (bool knapsack : {true, false}) {
      const PartitionCase c = partition_case(derive_seed(seed, knapsack ? 7 : 8, i), knapsack);
      SetObjective obj = [&](std::span<const Item> s) { return c.value(s); };
      const double greedy = knapsack ? greedy_matroid_knapsack(obj, c.ground, c.cons).objective
                                     : greedy_partition(obj, c.ground, c.cons).objective;
      const double opt = brute_force_subset(obj, c.ground, c.cons).objective;
      ++r.checked;
      if (greedy < 0.5 * opt - 1e-9) {
        r.fail(std::string(knapsack ? "matroid" : "partition") + " floor, instance " +
               std::to_string(i));
      }
    }
  }
  return r;
}

}  // namespace cascadia::testing
