#include "cascadia/policies.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cascadia/error.hpp"
#include "cascadia/rng.hpp"
#include "cascadia/utility.hpp"

namespace cascadia {

namespace {

constexpr double kTieTolerance = 1e-12;

bool strictly_better(double candidate, double incumbent) {
  return candidate > incumbent + kTieTolerance * std::max(1.0, std::abs(incumbent));
}

bool ties(double a, double b) {
  return std::abs(a - b) <= kTieTolerance * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

/// Winner of the outer (t, q) enumeration: highest objective, then lowest
/// q, then lowest t.
struct Incumbent {
  bool set = false;
  double value = 0.0;
  Item q = 0;
  std::size_t t = 0;
  SolverResult inner;

  void offer(double v, Item cand_q, std::size_t cand_t, SolverResult&& res) {
    bool take = !set || strictly_better(v, value);
    if (!take && ties(v, value)) {
      take = cand_q < q || (cand_q == q && cand_t < t);
    }
    if (!take) return;
    set = true;
    value = v;
    q = cand_q;
    t = cand_t;
    inner = std::move(res);
  }
};

VOracle make_oracle(const Instance& inst, const InnerConfig& inner, std::size_t max_set) {
  switch (inner.v_mode) {
    case VMode::exact:
      return VOracle::exact(inst);
    case VMode::sampled:
      return VOracle::sampled(inst, inner.v_samples, inner.v_seed);
    case VMode::automatic:
      break;
  }
  return VOracle::automatic(inst, max_set, inner.v_samples, inner.v_seed);
}

std::vector<Item> iota_items(std::size_t n) {
  std::vector<Item> out(n);
  std::iota(out.begin(), out.end(), Item{0});
  return out;
}

std::vector<Item> ordered_subset(const SolverResult& res, SubsetOrder order) {
  return order == SubsetOrder::ascending_id ? res.items : res.selection_order;
}

void check_depth(const InnerConfig& inner) {
  if (inner.enum_depth < 0 || inner.enum_depth > 3) {
    throw ConfigError("enum_depth must lie in [0, 3]");
  }
}

/// Shared skeleton of the two set-based algorithms: for each trailing q,
/// maximize `objective(q, S)` under the knapsack given by `weights`.
template <class MakeObjective>
PolicyOutput outer_q_loop(const Instance& inst, double rho, const InnerConfig& inner,
                          const std::vector<double>& weights, MakeObjective make_objective) {
  check_depth(inner);
  PolicyOutput out;
  out.diagnostics.rho = rho;
  const double budget = log_budget_for(rho);
  const std::size_t length = inst.max_length();
  if (length == 0) return out;

  ConstraintSet cons;
  cons.log_budget = budget;
  cons.item_weights = weights;
  cons.cardinality = length - 1;
  const auto ground = iota_items(inst.size());

  Incumbent best;
  std::size_t evaluations = 0;
  for (QuestionId q = 0; q < inst.size(); ++q) {
    cons.excluded = q;
    SolverResult res = greedy_knapsack(make_objective(q), ground, cons, inner.enum_depth);
    evaluations += res.evaluations;
    const double v = res.objective;
    best.offer(v, q, 1, std::move(res));
  }

  out.sequence = ordered_subset(best.inner, inner.order);
  out.sequence.push_back(best.q);
  out.surrogate_value = best.value;
  out.diagnostics.q_prime = best.q;
  out.diagnostics.subset_size = best.inner.items.size();
  out.diagnostics.t_prime = out.sequence.size();
  out.diagnostics.evaluations = evaluations;
  out.diagnostics.inner_method = best.inner.method;
  return out;
}

/// Appends `q` to the questions of `items` with inclusion probabilities.
struct InclusionBuffer {
  std::vector<Inclusion> items;
};

}  // namespace

const char* to_string(PolicyKind kind) noexcept {
  switch (kind) {
    case PolicyKind::alg1_no_pna: return "alg1_no_pna";
    case PolicyKind::alg2_general: return "alg2_general";
    case PolicyKind::alg3_decay_no_pna: return "alg3_decay_no_pna";
    case PolicyKind::alg4_decay_pna: return "alg4_decay_pna";
    case PolicyKind::alg5_pna_decision: return "alg5_pna_decision";
    case PolicyKind::alg6_scrolling: return "alg6_scrolling";
    case PolicyKind::random: return "random";
    case PolicyKind::max_ent: return "max_ent";
    case PolicyKind::exact_optimal: return "exact_optimal";
  }
  return "unknown";
}

PolicyKind parse_policy_kind(const std::string& text) {
  static const std::pair<const char*, PolicyKind> names[] = {
      {"alg1_no_pna", PolicyKind::alg1_no_pna},
      {"alg1", PolicyKind::alg1_no_pna},
      {"alg2_general", PolicyKind::alg2_general},
      {"alg2", PolicyKind::alg2_general},
      {"qss", PolicyKind::alg2_general},
      {"alg3_decay_no_pna", PolicyKind::alg3_decay_no_pna},
      {"alg3", PolicyKind::alg3_decay_no_pna},
      {"alg4_decay_pna", PolicyKind::alg4_decay_pna},
      {"alg4", PolicyKind::alg4_decay_pna},
      {"alg5_pna_decision", PolicyKind::alg5_pna_decision},
      {"alg5", PolicyKind::alg5_pna_decision},
      {"alg6_scrolling", PolicyKind::alg6_scrolling},
      {"alg6", PolicyKind::alg6_scrolling},
      {"random", PolicyKind::random},
      {"max_ent", PolicyKind::max_ent},
      {"maxent", PolicyKind::max_ent},
      {"exact_optimal", PolicyKind::exact_optimal},
      {"opt", PolicyKind::exact_optimal},
  };
  for (const auto& [name, kind] : names) {
    if (text == name) return kind;
  }
  throw ConfigError("unknown policy '" + text + "'");
}

const char* to_string(VMode mode) noexcept {
  switch (mode) {
    case VMode::automatic: return "automatic";
    case VMode::exact: return "exact";
    case VMode::sampled: return "sampled";
  }
  return "unknown";
}

const char* to_string(SubsetOrder order) noexcept {
  return order == SubsetOrder::ascending_id ? "ascending_id" : "selection";
}

VMode parse_v_mode(const std::string& text) {
  if (text == "automatic" || text == "auto") return VMode::automatic;
  if (text == "exact") return VMode::exact;
  if (text == "sampled" || text == "mc") return VMode::sampled;
  throw ConfigError("unknown v mode '" + text + "'");
}

SubsetOrder parse_subset_order(const std::string& text) {
  if (text == "ascending_id" || text == "ascending") return SubsetOrder::ascending_id;
  if (text == "selection") return SubsetOrder::selection;
  throw ConfigError("unknown subset order '" + text + "'");
}

PolicyOutput alg1_no_pna(const Instance& inst, double rho, const InnerConfig& inner) {
  std::vector<double> weights;
  for (const Question& q : inst.questions) weights.push_back(neg_log_weight(q.p_answer * q.c_answer));

  const Utility g(inst);
  UtilityWorkspace ws(g);
  auto make_objective = [&](QuestionId q) -> SetObjective {
    const double a = inst.questions[q].p_answer;
    return [&ws, q, a](std::span<const Item> items) {
      ws.clear();
      for (Item s : items) ws.push(s);
      ws.push(q);
      const Mask full = (Mask{1} << ws.size()) - 1;
      const Mask without = full & ~(Mask{1} << items.size());
      return a * ws.value(full) + (1.0 - a) * ws.value(without);
    };
  };
  return outer_q_loop(inst, rho, inner, weights, make_objective);
}

PolicyOutput alg2_general(const Instance& inst, double rho, const InnerConfig& inner) {
  std::vector<double> weights;
  for (const Question& q : inst.questions) weights.push_back(neg_log_weight(agg_continuation(q)));

  const VOracle oracle = make_oracle(inst, inner, inst.max_length());
  InclusionBuffer buf;
  auto make_objective = [&](QuestionId q) -> SetObjective {
    return [&inst, &oracle, &buf, q](std::span<const Item> items) {
      buf.items.clear();
      for (Item s : items) buf.items.push_back({s, inst.questions[s].p_answer});
      buf.items.push_back({q, inst.questions[q].p_answer});
      return oracle.expected(buf.items);
    };
  };
  return outer_q_loop(inst, rho, inner, weights, make_objective);
}

PolicyOutput alg3_decay_no_pna(const Instance& inst, double rho, const InnerConfig& inner) {
  check_depth(inner);
  const std::size_t length = inst.max_length();
  require_variant_data(inst, Variant::slot_decay, length);
  const double base_budget = log_budget_for(rho);
  PolicyOutput out;
  out.diagnostics.rho = rho;
  if (length == 0) return out;

  const Utility g(inst);
  UtilityWorkspace ws(g);
  ConstraintSet cons;
  for (const Question& q : inst.questions) {
    cons.item_weights.push_back(neg_log_weight(q.p_answer * q.c_answer));
  }
  const auto ground = iota_items(inst.size());

  Incumbent best;
  std::size_t evaluations = 0;
  double log_lambda = 0.0;  // log of the product of decay over slots 1..t
  for (std::size_t t = 1; t <= length; ++t) {
    const double lambda_t = (*inst.slot_decay)[t - 1];
    log_lambda += std::log(lambda_t);
    const double budget = base_budget + log_lambda;
    if (budget < -1e-12) break;  // no S (not even the empty set) is feasible
    cons.log_budget = std::max(budget, 0.0);
    cons.cardinality = t - 1;
    for (QuestionId q = 0; q < inst.size(); ++q) {
      cons.excluded = q;
      const double a = lambda_t * inst.questions[q].p_answer;
      const SetObjective obj = [&ws, q, a](std::span<const Item> items) {
        ws.clear();
        for (Item s : items) ws.push(s);
        ws.push(q);
        const Mask full = (Mask{1} << ws.size()) - 1;
        const Mask without = full & ~(Mask{1} << items.size());
        return a * ws.value(full) + (1.0 - a) * ws.value(without);
      };
      SolverResult res = greedy_knapsack(obj, ground, cons, inner.enum_depth);
      evaluations += res.evaluations;
      const double v = res.objective;
      best.offer(v, q, t, std::move(res));
    }
  }

  out.sequence = ordered_subset(best.inner, inner.order);
  out.sequence.push_back(best.q);
  out.surrogate_value = best.value;
  out.diagnostics.q_prime = best.q;
  out.diagnostics.subset_size = best.inner.items.size();
  out.diagnostics.t_prime = best.t;
  out.diagnostics.evaluations = evaluations;
  out.diagnostics.inner_method = best.inner.method;
  return out;
}

PolicyOutput alg4_decay_pna(const Instance& inst, double rho, const InnerConfig& inner) {
  check_depth(inner);
  const std::size_t length = inst.max_length();
  require_variant_data(inst, Variant::slot_decay, length);
  const double budget = log_budget_for(rho);
  PolicyOutput out;
  out.diagnostics.rho = rho;
  if (length == 0) return out;

  const std::size_t n = inst.size();
  const auto& decay = *inst.slot_decay;
  // virtual copy (q, slot) is item q * length + slot
  ConstraintSet cons;
  cons.log_budget = budget;
  cons.item_weights.resize(n * length);
  cons.partition.resize(n * length);
  for (QuestionId q = 0; q < n; ++q) {
    for (std::size_t i = 0; i < length; ++i) {
      cons.item_weights[q * length + i] = neg_log_weight(agg_continuation(inst.questions[q], decay[i]));
      cons.partition[q * length + i] = static_cast<long>(i);
    }
  }

  const VOracle oracle = make_oracle(inst, inner, length);
  std::vector<Inclusion> buf;
  Incumbent best;
  std::size_t evaluations = 0;
  for (std::size_t t = 1; t <= length; ++t) {
    cons.cardinality = t - 1;
    for (QuestionId q = 0; q < n; ++q) {
      std::vector<Item> ground;
      for (QuestionId other = 0; other < n; ++other) {
        if (other == q) continue;
        for (std::size_t i = 0; i + 1 < t; ++i) ground.push_back(other * length + i);
      }
      const double q_rate = decay[t - 1] * inst.questions[q].p_answer;
      const SetObjective obj = [&, q, q_rate, length](std::span<const Item> items) {
        buf.clear();
        for (Item x : items) {
          const QuestionId s = x / length;
          buf.push_back({s, decay[x % length] * inst.questions[s].p_answer});
        }
        buf.push_back({q, q_rate});
        return oracle.expected(buf);
      };
      SolverResult res =
          greedy_matroid_knapsack(obj, ground, cons, inner.local_search, inner.enum_depth);
      evaluations += res.evaluations;
      const double v = res.objective;
      best.offer(v, q, t, std::move(res));
    }
  }

  // Keep the earliest copy of each question, then close the gaps.
  std::vector<std::optional<QuestionId>> slots(length);
  std::vector<bool> placed(n, false);
  std::vector<Item> copies = best.inner.items;
  std::sort(copies.begin(), copies.end(), [length](Item a, Item b) {
    return a % length != b % length ? a % length < b % length : a < b;
  });
  for (Item x : copies) {
    const QuestionId s = x / length;
    if (placed[s]) continue;
    placed[s] = true;
    slots[x % length] = s;
  }
  slots[best.t - 1] = best.q;
  for (const auto& s : slots) {
    if (s) out.sequence.push_back(*s);
  }
  out.surrogate_value = best.value;
  out.diagnostics.q_prime = best.q;
  out.diagnostics.subset_size = out.sequence.size() - 1;
  out.diagnostics.t_prime = best.t;
  out.diagnostics.evaluations = evaluations;
  out.diagnostics.inner_method = best.inner.method;
  return out;
}

namespace {

void check_pna_pair(const Instance& with_pna, const Instance& without_pna) {
  if (with_pna.size() != without_pna.size()) {
    throw ConfigError("without-PNA parameters must cover every question");
  }
}

}  // namespace

PolicyOutput alg5_pna_decision(const Instance& with_pna, const Instance& without_pna,
                               double rho, const InnerConfig& inner) {
  check_depth(inner);
  check_pna_pair(with_pna, without_pna);
  const double budget = log_budget_for(rho);
  PolicyOutput out;
  out.diagnostics.rho = rho;
  const std::size_t length = with_pna.max_length();
  out.pna.emplace();
  if (length == 0) return out;

  const std::size_t n = with_pna.size();
  // version item 2a shows the PNA option, 2a + 1 does not
  auto version = [&](Item e) -> const Question& {
    return (e % 2 == 0 ? with_pna : without_pna).questions[e / 2];
  };
  ConstraintSet cons;
  cons.log_budget = budget;
  cons.cardinality = length - 1;
  cons.item_weights.resize(2 * n);
  cons.partition.resize(2 * n);
  for (Item e = 0; e < 2 * n; ++e) {
    cons.item_weights[e] = neg_log_weight(agg_continuation(version(e)));
    cons.partition[e] = static_cast<long>(e / 2);
  }

  const VOracle oracle = make_oracle(with_pna, inner, length);
  std::vector<Inclusion> buf;
  Incumbent best;
  std::size_t evaluations = 0;
  for (Item qe = 0; qe < 2 * n; ++qe) {
    std::vector<Item> ground;
    for (Item e = 0; e < 2 * n; ++e) {
      if (e / 2 != qe / 2) ground.push_back(e);
    }
    const SetObjective obj = [&, qe](std::span<const Item> items) {
      buf.clear();
      for (Item e : items) buf.push_back({e / 2, version(e).p_answer});
      buf.push_back({qe / 2, version(qe).p_answer});
      return oracle.expected(buf);
    };
    SolverResult res = greedy_matroid_knapsack(obj, ground, cons, inner.local_search, inner.enum_depth);
    evaluations += res.evaluations;
    const double v = res.objective;
    best.offer(v, qe, 1, std::move(res));
  }

  std::vector<Item> picked = ordered_subset(best.inner, inner.order);
  picked.push_back(best.q);
  for (Item e : picked) {
    out.sequence.push_back(e / 2);
    (*out.pna)[e / 2] = e % 2 == 0;
  }
  out.surrogate_value = best.value;
  out.diagnostics.q_prime = best.q / 2;
  out.diagnostics.subset_size = best.inner.items.size();
  out.diagnostics.t_prime = out.sequence.size();
  out.diagnostics.evaluations = evaluations;
  out.diagnostics.inner_method = best.inner.method;
  return out;
}

PolicyOutput alg6_scrolling(const Instance& inst, const InnerConfig& inner) {
  const std::size_t length = inst.max_length();
  require_variant_data(inst, Variant::scrolling, length);
  PolicyOutput out;
  if (length == 0) return out;
  const std::size_t n = inst.size();
  const auto& rates = *inst.position_rates;

  ConstraintSet cons;
  cons.cardinality = length;
  cons.partition.resize(n * length);
  for (Item x = 0; x < n * length; ++x) cons.partition[x] = static_cast<long>(x % length);

  const VOracle oracle = make_oracle(inst, inner, length);
  std::vector<Inclusion> buf;
  const SetObjective obj = [&](std::span<const Item> items) {
    buf.clear();
    for (Item x : items) buf.push_back({x / length, rates[x / length][x % length]});
    return oracle.expected(buf);
  };
  const auto ground = iota_items(n * length);
  const SolverResult res = greedy_partition(obj, ground, cons);

  // Keep the highest-rate copy of each question (earliest slot on ties).
  std::vector<std::optional<QuestionId>> slots(length);
  std::vector<std::optional<std::size_t>> slot_of(n);
  for (Item x : res.items) {
    const QuestionId q = x / length;
    const std::size_t i = x % length;
    if (!slot_of[q] || rates[q][i] > rates[q][*slot_of[q]] ||
        (rates[q][i] == rates[q][*slot_of[q]] && i < *slot_of[q])) {
      slot_of[q] = i;
    }
  }
  for (QuestionId q = 0; q < n; ++q) {
    if (slot_of[q]) slots[*slot_of[q]] = q;
  }

  // Slots left empty (by the solver or by dropped copies) take the unused
  // question of largest marginal value; a sequence has no holes.
  std::size_t evaluations = res.evaluations;
  auto current_items = [&] {
    std::vector<Item> items;
    for (std::size_t i = 0; i < length; ++i) {
      if (slots[i]) items.push_back(*slots[i] * length + i);
    }
    return items;
  };
  for (std::size_t i = 0; i < length; ++i) {
    if (slots[i]) continue;
    std::vector<Item> items = current_items();
    std::optional<QuestionId> pick;
    double pick_value = 0.0;
    for (QuestionId q = 0; q < n; ++q) {
      if (slot_of[q]) continue;
      items.push_back(q * length + i);
      const double v = obj(items);
      ++evaluations;
      items.pop_back();
      if (!pick || strictly_better(v, pick_value)) {
        pick = q;
        pick_value = v;
      }
    }
    slots[i] = *pick;
    slot_of[*pick] = i;
  }
  for (const auto& s : slots) out.sequence.push_back(*s);
  out.surrogate_value = obj(current_items());
  out.diagnostics.subset_size = out.sequence.size();
  out.diagnostics.evaluations = evaluations + 1;
  out.diagnostics.inner_method = res.method;
  return out;
}

PolicyOutput baseline_random(const Instance& inst, std::uint64_t seed) {
  PolicyOutput out;
  std::vector<QuestionId> ids = iota_items(inst.size());
  Rng rng(seed);
  rng.shuffle(std::span<QuestionId>(ids));
  ids.resize(inst.max_length());
  out.sequence = std::move(ids);
  return out;
}

PolicyOutput baseline_max_ent(const Instance& inst, std::uint64_t seed) {
  const std::size_t n = inst.size();
  if (n > 24) throw ConfigError("max_ent enumerates subsets of at most 24 questions");
  const std::size_t k = inst.max_length();
  const Utility g(inst);

  // k-combinations in lexicographic order
  std::vector<QuestionId> comb = iota_items(k);
  std::vector<QuestionId> best = comb;
  double best_value = g.value(comb);
  for (;;) {
    std::size_t i = k;
    while (i > 0 && comb[i - 1] == n - k + i - 1) --i;
    if (i == 0) break;
    ++comb[i - 1];
    for (std::size_t j = i; j < k; ++j) comb[j] = comb[j - 1] + 1;
    const double v = g.value(comb);
    if (strictly_better(v, best_value)) {
      best_value = v;
      best = comb;
    }
  }

  PolicyOutput out;
  Rng rng(seed);
  rng.shuffle(std::span<QuestionId>(best));
  out.sequence = std::move(best);
  out.surrogate_value = best_value;
  return out;
}

namespace {

/// One placeable item of the exhaustive search: a question (or one of its
/// PNA versions) with its branch probabilities at every slot.
struct SearchItem {
  QuestionId question = 0;
  std::size_t cls = 0;
  std::vector<SlotBranch> branch;
};

/// Depth-first enumeration in lexicographic order with incremental
/// answered-subset states. When g is submodular, branches whose optimistic
/// completion (reach mass * best answer rate * largest singleton gains,
/// discounted by the best proceed rate) falls strictly below the incumbent
/// are skipped; ties are never pruned, so the lexicographic winner survives.
class SequenceSearch {
 public:
  SequenceSearch(const Utility& g, std::vector<SearchItem> items, std::size_t classes,
                 std::size_t length, bool prune)
      : ws_(g), items_(std::move(items)), used_(classes, false), states_(length + 1),
        length_(length), prune_(prune) {
    for (const SearchItem& it : items_) {
      const QuestionId q = it.question;
      singleton_.push_back(g.value(std::span<const QuestionId>(&q, 1)));
      for (const SlotBranch& b : it.branch) {
        max_answer_ = std::max(max_answer_, b.answer());
        max_proceed_ = std::max(max_proceed_, b.proceed());
      }
    }
    by_singleton_.resize(items_.size());
    std::iota(by_singleton_.begin(), by_singleton_.end(), std::size_t{0});
    std::stable_sort(by_singleton_.begin(), by_singleton_.end(),
                     [this](std::size_t a, std::size_t b) { return singleton_[a] > singleton_[b]; });
  }

  double estimated_cost() const {
    std::size_t per_class = 0;
    std::vector<std::size_t> count(used_.size(), 0);
    bool doubles = false;
    for (const SearchItem& it : items_) {
      per_class = std::max(per_class, ++count[it.cls]);
      for (const SlotBranch& b : it.branch) {
        if (b.answer_continue > 0.0 && b.skip_continue > 0.0) doubles = true;
      }
    }
    double cost = 0.0;
    double prefixes = 1.0;
    for (std::size_t k = 1; k <= length_; ++k) {
      prefixes *= static_cast<double>(used_.size() - (k - 1)) * static_cast<double>(per_class);
      cost += prefixes * std::ldexp(1.0, doubles ? static_cast<int>(k - 1) : 0);
    }
    return cost;
  }

  void run() {
    states_[0].assign(1, {0, 1.0});
    if (prune_) seed_incumbent();
    dfs(0, 0.0);
  }

  const std::vector<std::size_t>& best() const noexcept { return best_; }
  double best_value() const noexcept { return best_value_; }

 private:
  /// Contribution of placing item k at `depth`; fills the next states.
  double place(std::size_t k, std::size_t depth, bool fill_next) {
    const SearchItem& it = items_[k];
    const std::vector<MaskMass>& here = states_[depth];
    const SlotBranch& br = it.branch[depth];
    ws_.push(it.question);
    double gain = 0.0;
    if (br.answer() > 0.0) {
      for (const MaskMass& s : here) gain += s.mass * ws_.gain(s.mask, depth);
    }
    if (fill_next && depth + 1 < length_) {
      std::vector<MaskMass>& next = states_[depth + 1];
      const Mask bit = Mask{1} << depth;
      next.clear();
      for (const MaskMass& s : here) {
        if (br.skip_continue > 0.0) next.push_back({s.mask, s.mass * br.skip_continue});
        if (br.answer_continue > 0.0) next.push_back({s.mask | bit, s.mass * br.answer_continue});
      }
    }
    return br.answer() * gain;
  }

  /// Greedy sequence as a starting incumbent for pruning.
  void seed_incumbent() {
    double value = 0.0;
    for (std::size_t depth = 0; depth < length_; ++depth) {
      std::optional<std::size_t> pick;
      double pick_gain = 0.0;
      for (std::size_t k = 0; k < items_.size(); ++k) {
        if (used_[items_[k].cls]) continue;
        const double c = place(k, depth, false);
        ws_.pop();
        if (!pick || c > pick_gain) {
          pick = k;
          pick_gain = c;
        }
      }
      value += place(*pick, depth, true);
      used_[items_[*pick].cls] = true;
      path_.push_back(*pick);
    }
    best_ = path_;
    best_value_ = value;
    for (std::size_t k : path_) used_[items_[k].cls] = false;
    path_.clear();
    ws_.clear();
  }

  double optimistic_rest(std::size_t depth) const {
    double reach = 0.0;
    for (const MaskMass& s : states_[depth]) reach += s.mass;
    double bound = 0.0;
    double discount = reach * max_answer_;
    std::size_t slots = length_ - depth;
    for (std::size_t k : by_singleton_) {
      if (slots == 0) break;
      if (used_[items_[k].cls]) continue;
      bound += discount * singleton_[k];
      discount *= max_proceed_;
      --slots;
    }
    return bound;
  }

  void dfs(std::size_t depth, double value) {
    if (depth == length_) {
      const bool better = strictly_better(value, best_value_);
      if (best_.empty() || better ||
          (ties(value, best_value_) &&
           std::lexicographical_compare(path_.begin(), path_.end(), best_.begin(), best_.end()))) {
        best_value_ = value;
        best_ = path_;
      }
      return;
    }
    if (prune_ && !best_.empty() &&
        value + optimistic_rest(depth) <
            best_value_ - kTieTolerance * std::max(1.0, std::abs(best_value_))) {
      return;
    }
    for (std::size_t k = 0; k < items_.size(); ++k) {
      if (used_[items_[k].cls]) continue;
      const double v = value + place(k, depth, true);
      used_[items_[k].cls] = true;
      path_.push_back(k);
      dfs(depth + 1, v);
      path_.pop_back();
      used_[items_[k].cls] = false;
      ws_.pop();
    }
  }

  UtilityWorkspace ws_;
  std::vector<SearchItem> items_;
  std::vector<bool> used_;
  std::vector<std::vector<MaskMass>> states_;
  std::size_t length_;
  bool prune_;
  std::vector<double> singleton_;
  std::vector<std::size_t> by_singleton_;
  double max_answer_ = 0.0;
  double max_proceed_ = 0.0;
  std::vector<std::size_t> path_;
  std::vector<std::size_t> best_;
  double best_value_ = 0.0;
};

bool can_prune(const Utility& g) {
  return g.kind() != UtilityKind::callback && g.submodular_by_construction();
}

void enforce_cap(const SequenceSearch& search, double cap) {
  const double cost = search.estimated_cost();
  if (cost > cap) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "exhaustive search needs about %.3g steps, above the cap of %.3g", cost, cap);
    throw ComputeCapExceeded(buf, cost);
  }
}

}  // namespace

PolicyOutput exact_optimal(const Instance& inst, Variant variant, double compute_cap) {
  const std::size_t length = inst.max_length();
  require_variant_data(inst, variant, length);
  PolicyOutput out;
  if (length == 0) return out;
  if (length > kMaxWorkspaceItems) throw ConfigError("sequence too long for exhaustive search");

  std::vector<SearchItem> items;
  for (QuestionId q = 0; q < inst.size(); ++q) {
    SearchItem it{q, q, {}};
    for (std::size_t i = 0; i < length; ++i) it.branch.push_back(slot_branch(inst, q, i, variant));
    items.push_back(std::move(it));
  }
  const Utility g(inst);
  SequenceSearch search(g, std::move(items), inst.size(), length, can_prune(g));
  enforce_cap(search, compute_cap);
  search.run();
  out.sequence.assign(search.best().begin(), search.best().end());
  out.surrogate_value = search.best_value();
  out.diagnostics.inner_method = "exhaustive";
  return out;
}

PolicyOutput exact_optimal_pna(const Instance& with_pna, const Instance& without_pna,
                               double compute_cap) {
  check_pna_pair(with_pna, without_pna);
  const std::size_t length = with_pna.max_length();
  const Variant variant = natural_variant(with_pna);
  require_variant_data(with_pna, variant, length);
  require_variant_data(without_pna, variant, length);
  PolicyOutput out;
  out.pna.emplace();
  if (length == 0) return out;

  std::vector<SearchItem> items;
  for (QuestionId q = 0; q < with_pna.size(); ++q) {
    for (const Instance* src : {&with_pna, &without_pna}) {
      SearchItem it{q, q, {}};
      for (std::size_t i = 0; i < length; ++i) it.branch.push_back(slot_branch(*src, q, i, variant));
      items.push_back(std::move(it));
    }
  }
  const Utility g(with_pna);
  SequenceSearch search(g, std::move(items), with_pna.size(), length, can_prune(g));
  enforce_cap(search, compute_cap);
  search.run();
  for (std::size_t e : search.best()) {
    out.sequence.push_back(e / 2);
    (*out.pna)[e / 2] = e % 2 == 0;
  }
  out.surrogate_value = search.best_value();
  out.diagnostics.inner_method = "exhaustive";
  return out;
}

Instance apply_pna_choices(const Instance& with_pna, const Instance& without_pna,
                           const std::map<QuestionId, bool>& pna) {
  check_pna_pair(with_pna, without_pna);
  Instance mixed = with_pna;
  for (const auto& [q, offer] : pna) {
    if (q >= mixed.size()) throw ConfigError("PNA choice for unknown question");
    if (!offer) {
      const Question& w = without_pna.questions[q];
      Question& m = mixed.questions[q];
      m.p_answer = w.p_answer;
      m.p_pna = w.p_pna;
      m.c_answer = w.c_answer;
      m.c_pna = w.c_pna;
    }
  }
  return mixed;
}

EvalReport score_output(const PolicyOutput& out, const Instance& inst, Variant variant,
                        const Instance* without_pna) {
  if (out.pna && without_pna != nullptr) {
    return evaluate(out.sequence, apply_pna_choices(inst, *without_pna, *out.pna), variant);
  }
  return evaluate(out.sequence, inst, variant);
}

Variant scoring_variant(PolicyKind kind, const Instance& inst) noexcept {
  if (kind == PolicyKind::alg6_scrolling) return Variant::scrolling;
  return natural_variant(inst);
}

namespace {

PolicyOutput run_once(const Instance& inst, const PolicySpec& spec, double rho,
                      const Instance* without_pna) {
  switch (spec.kind) {
    case PolicyKind::alg1_no_pna:
      return alg1_no_pna(inst, rho, spec.inner);
    case PolicyKind::alg2_general:
      return alg2_general(inst, rho, spec.inner);
    case PolicyKind::alg3_decay_no_pna:
      return alg3_decay_no_pna(inst, rho, spec.inner);
    case PolicyKind::alg4_decay_pna:
      return alg4_decay_pna(inst, rho, spec.inner);
    case PolicyKind::alg5_pna_decision:
      if (without_pna == nullptr) throw ConfigError("alg5 needs without-PNA parameters");
      return alg5_pna_decision(inst, *without_pna, rho, spec.inner);
    case PolicyKind::alg6_scrolling:
      return alg6_scrolling(inst, spec.inner);
    case PolicyKind::random:
      return baseline_random(inst, spec.seed);
    case PolicyKind::max_ent:
      return baseline_max_ent(inst, spec.seed);
    case PolicyKind::exact_optimal:
      return exact_optimal(inst, spec.variant, spec.compute_cap);
  }
  throw ConfigError("unknown policy kind");
}

bool uses_rho(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::alg1_no_pna:
    case PolicyKind::alg2_general:
    case PolicyKind::alg3_decay_no_pna:
    case PolicyKind::alg4_decay_pna:
    case PolicyKind::alg5_pna_decision:
      return true;
    default:
      return false;
  }
}

}  // namespace

PolicyOutput run_policy(const Instance& inst, const PolicySpec& spec,
                        const Instance* without_pna) {
  if (!spec.rho_sweep || !uses_rho(spec.kind)) {
    if (uses_rho(spec.kind)) (void)log_budget_for(spec.rho);
    return run_once(inst, spec, spec.rho, without_pna);
  }
  if (spec.rho_sweep->empty()) throw ConfigError("rho_sweep is empty");
  const Variant variant = scoring_variant(spec.kind, inst);
  std::optional<PolicyOutput> best;
  double best_f = 0.0;
  std::size_t evaluations = 0;
  for (double rho : *spec.rho_sweep) {
    PolicyOutput out = run_once(inst, spec, rho, without_pna);
    evaluations += out.diagnostics.evaluations;
    const double f = score_output(out, inst, variant, without_pna).value;
    if (!best || strictly_better(f, best_f)) {
      best_f = f;
      best = std::move(out);
    }
  }
  best->diagnostics.evaluations = evaluations;
  return *best;
}

}  // namespace cascadia
