#include "cascadia/evaluator.hpp"

#include <algorithm>
#include <cmath>

#include "cascadia/error.hpp"
#include "cascadia/rng.hpp"

namespace cascadia {

const char* to_string(EvalMethod method) noexcept {
  return method == EvalMethod::exact ? "exact" : "monte_carlo";
}

double branch_expectation(const UtilityWorkspace& ws, std::span<const SlotBranch> branches,
                          std::vector<MaskMass>& states) {
  const std::size_t length = std::min(ws.size(), branches.size());
  states.clear();
  states.push_back({0, 1.0});
  double total = 0.0;
  for (std::size_t i = 0; i < length; ++i) {
    const SlotBranch& br = branches[i];
    const double answer = br.answer();
    if (answer > 0.0) {
      double gain = 0.0;
      for (const MaskMass& s : states) gain += s.mass * ws.gain(s.mask, i);
      total += answer * gain;
    }
    if (i + 1 == length) break;

    const Mask bit = Mask{1} << i;
    const double ac = br.answer_continue;
    const double sc = br.skip_continue;
    const std::size_t n = states.size();
    if (ac > 0.0 && sc > 0.0) {
      states.reserve(2 * n);
      for (std::size_t k = 0; k < n; ++k) {
        states.push_back({states[k].mask | bit, states[k].mass * ac});
        states[k].mass *= sc;
      }
    } else if (ac > 0.0) {
      for (MaskMass& s : states) {
        s.mask |= bit;
        s.mass *= ac;
      }
    } else if (sc > 0.0) {
      for (MaskMass& s : states) s.mass *= sc;
    } else {
      break;  // nobody reads past slot i
    }
  }
  return total;
}

namespace {

std::vector<SlotBranch> branches_for(std::span<const QuestionId> seq, const Instance& inst,
                                     Variant variant) {
  std::vector<SlotBranch> out;
  out.reserve(seq.size());
  for (std::size_t i = 0; i < seq.size(); ++i) out.push_back(slot_branch(inst, seq[i], i, variant));
  return out;
}

}  // namespace

EvalReport eval_exact(std::span<const QuestionId> seq, const Instance& inst, Variant variant) {
  check_sequence(seq, inst);
  require_variant_data(inst, variant, seq.size());
  if (seq.size() > kMaxExactLength) {
    throw ComputeCapExceeded("exact evaluation is limited to 22 slots; use Monte Carlo",
                             std::ldexp(1.0, static_cast<int>(seq.size())));
  }
  EvalReport report;
  report.method = EvalMethod::exact;
  report.reachability = reachability(seq, inst, variant);

  const Utility g(inst);
  UtilityWorkspace ws(g);
  for (QuestionId q : seq) ws.push(q);
  const auto branches = branches_for(seq, inst, variant);
  std::vector<MaskMass> scratch;
  report.value = branch_expectation(ws, branches, scratch);
  return report;
}

EvalReport eval_monte_carlo(std::span<const QuestionId> seq, const Instance& inst,
                            Variant variant, std::size_t samples, std::uint64_t seed) {
  if (samples < 1) throw ConfigError("Monte Carlo needs at least one sample");
  check_sequence(seq, inst);
  require_variant_data(inst, variant, seq.size());

  EvalReport report;
  report.method = EvalMethod::monte_carlo;
  report.samples = samples;
  report.reachability = reachability(seq, inst, variant);

  const Utility g(inst);
  // Sequences longer than a workspace are simulated through the set API.
  const bool use_workspace = seq.size() <= kMaxWorkspaceItems;
  std::optional<UtilityWorkspace> ws;
  if (use_workspace) {
    ws.emplace(g);
    for (QuestionId q : seq) ws->push(q);
  }
  const auto branches = branches_for(seq, inst, variant);

  Rng rng(seed);
  double mean = 0.0;
  double m2 = 0.0;
  std::vector<QuestionId> answered;
  for (std::size_t k = 0; k < samples; ++k) {
    Mask mask = 0;
    answered.clear();
    for (std::size_t i = 0; i < seq.size(); ++i) {
      const SlotBranch& br = branches[i];
      const double u = rng.uniform();
      bool answered_here = false;
      bool proceed = false;
      if (u < br.answer_continue) {
        answered_here = proceed = true;
      } else if (u < br.answer_continue + br.answer_stop) {
        answered_here = true;
      } else if (u < br.answer_continue + br.answer_stop + br.skip_continue) {
        proceed = true;
      }
      if (answered_here) {
        if (use_workspace) {
          mask |= Mask{1} << i;
        } else {
          answered.push_back(seq[i]);
        }
      }
      if (!proceed) break;
    }
    const double x = use_workspace ? ws->value(mask) : g.value(answered);
    const double delta = x - mean;
    mean += delta / static_cast<double>(k + 1);
    m2 += delta * (x - mean);
  }
  report.value = mean;
  const double variance = samples > 1 ? m2 / static_cast<double>(samples - 1) : 0.0;
  report.std_error = std::sqrt(std::max(variance, 0.0) / static_cast<double>(samples));
  return report;
}

EvalReport evaluate(std::span<const QuestionId> seq, const Instance& inst, Variant variant,
                    std::size_t mc_samples, std::uint64_t seed) {
  if (seq.size() <= kMaxExactLength) return eval_exact(seq, inst, variant);
  return eval_monte_carlo(seq, inst, variant, mc_samples, seed);
}

double eval_u(QuestionId q, std::span<const QuestionId> set, const Instance& inst,
              std::optional<double> decay) {
  if (std::find(set.begin(), set.end(), q) != set.end()) {
    throw ConfigError("eval_u: q must not belong to S");
  }
  const Utility g(inst);
  std::vector<QuestionId> with(set.begin(), set.end());
  with.push_back(q);
  const double a = decay.value_or(1.0) * inst.questions.at(q).p_answer;
  return a * g.value(with) + (1.0 - a) * g.value(set);
}

VOracle::VOracle(const Instance& inst, std::size_t samples, std::uint64_t seed, bool sampled)
    : g_(std::make_shared<const Utility>(inst)), samples_(samples) {
  ws_ = std::make_unique<UtilityWorkspace>(*g_);
  if (sampled) {
    if (samples < 1) throw ConfigError("sampled v needs at least one sample");
    auto panel = std::make_shared<std::vector<double>>(inst.size() * samples);
    for (QuestionId q = 0; q < inst.size(); ++q) {
      Rng rng(derive_seed(seed, q));
      for (std::size_t k = 0; k < samples; ++k) (*panel)[q * samples + k] = rng.uniform();
    }
    panel_ = std::move(panel);
  }
}

VOracle VOracle::exact(const Instance& inst) { return VOracle(inst, 0, 0, false); }

VOracle VOracle::sampled(const Instance& inst, std::size_t samples, std::uint64_t seed) {
  return VOracle(inst, samples, seed, true);
}

VOracle VOracle::automatic(const Instance& inst, std::size_t max_set_size, std::size_t samples,
                           std::uint64_t seed) {
  if (max_set_size <= kMaxExactInclusion) return exact(inst);
  return sampled(inst, samples, seed);
}

double VOracle::expected(std::span<const Inclusion> items) const {
  ++calls_;
  merged_.assign(items.begin(), items.end());
  std::sort(merged_.begin(), merged_.end(), [](const Inclusion& a, const Inclusion& b) {
    return a.question != b.question ? a.question < b.question : a.probability > b.probability;
  });
  merged_.erase(std::unique(merged_.begin(), merged_.end(),
                            [](const Inclusion& a, const Inclusion& b) {
                              return a.question == b.question;
                            }),
                merged_.end());

  if (panel_ == nullptr && merged_.size() > kMaxExactInclusion) {
    throw ConfigError("exact v supports at most 20 distinct questions; use sampled mode");
  }
  if (merged_.size() > kMaxWorkspaceItems) {
    throw ConfigError("v supports at most 64 distinct questions");
  }

  ws_->clear();
  for (const Inclusion& inc : merged_) ws_->push(inc.question);

  if (panel_ == nullptr) {
    branches_.clear();
    for (const Inclusion& inc : merged_) {
      branches_.push_back({inc.probability, 0.0, 1.0 - inc.probability});
    }
    return branch_expectation(*ws_, branches_, scratch_);
  }

  const std::vector<double>& panel = *panel_;
  double total = 0.0;
  for (std::size_t k = 0; k < samples_; ++k) {
    Mask mask = 0;
    for (std::size_t i = 0; i < merged_.size(); ++i) {
      if (panel[merged_[i].question * samples_ + k] < merged_[i].probability) {
        mask |= Mask{1} << i;
      }
    }
    total += ws_->value(mask);
  }
  return total / static_cast<double>(samples_);
}

double eval_v(QuestionId q, std::span<const QuestionId> set, const Instance& inst,
              const VOracle& oracle) {
  if (std::find(set.begin(), set.end(), q) != set.end()) {
    throw ConfigError("eval_v: q must not belong to S");
  }
  std::vector<Inclusion> items;
  items.reserve(set.size() + 1);
  for (QuestionId s : set) items.push_back({s, inst.questions.at(s).p_answer});
  items.push_back({q, inst.questions.at(q).p_answer});
  return oracle.expected(items);
}

double inclusion_probability(const Instance& inst, QuestionId q, std::size_t slot,
                             Variant variant) {
  switch (variant) {
    case Variant::slot_decay:
      return (*inst.slot_decay)[slot] * inst.questions[q].p_answer;
    case Variant::scrolling:
      return (*inst.position_rates)[q][slot];
    case Variant::basic:
    case Variant::no_pna:
      break;
  }
  return inst.questions[q].p_answer;
}

double expected_random_set(std::span<const QuestionId> seq, const Instance& inst,
                           Variant variant, const VOracle& oracle) {
  check_sequence(seq, inst);
  require_variant_data(inst, variant, seq.size());
  std::vector<Inclusion> items;
  items.reserve(seq.size());
  for (std::size_t i = 0; i < seq.size(); ++i) {
    items.push_back({seq[i], inclusion_probability(inst, seq[i], i, variant)});
  }
  return oracle.expected(items);
}

}  // namespace cascadia
