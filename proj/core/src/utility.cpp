#include "cascadia/utility.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "cascadia/error.hpp"
#include "cascadia/rng.hpp"

namespace cascadia {

namespace {

constexpr std::size_t kMaxWitnesses = 16;
constexpr std::size_t kNoMark = static_cast<std::size_t>(-1);

double mnl_revenue(double weight_sum, double weighted_revenue) {
  return weighted_revenue / (1.0 + weight_sum);
}

}  // namespace

double attribute_entropy(std::span<const double> distribution) {
  double h = 0.0;
  for (double p : distribution) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

Utility::Utility(const Instance& inst) : kind_(inst.utility), callback_(inst.callback) {
  entropy_.reserve(inst.attributes.size());
  for (const Attribute& a : inst.attributes) entropy_.push_back(attribute_entropy(a.distribution));

  attrs_.reserve(inst.size());
  weight_.reserve(inst.size());
  revenue_.reserve(inst.size());
  for (const Question& q : inst.questions) {
    std::vector<AttributeId> attrs = q.attributes;
    std::sort(attrs.begin(), attrs.end());
    attrs.erase(std::unique(attrs.begin(), attrs.end()), attrs.end());
    for (AttributeId a : attrs) {
      if (a >= entropy_.size()) {
        throw ConfigError("question " + std::to_string(q.external_id) +
                          " covers unknown attribute");
      }
    }
    attrs_.push_back(std::move(attrs));
    weight_.push_back(q.weight);
    revenue_.push_back(q.revenue);
  }

  if (kind_ == UtilityKind::mnl) {
    for (std::size_t i = 0; i < weight_.size(); ++i) {
      if (weight_[i] < 0.0) {
        throw ConfigError("negative MNL weight on question " +
                          std::to_string(inst.questions[i].external_id));
      }
      if (revenue_[i] != revenue_.front()) submodular_ = false;
    }
  }
  if (kind_ == UtilityKind::callback && !callback_) {
    throw ConfigError("callback utility without a function");
  }
}

double Utility::value(std::span<const QuestionId> set) const {
  std::vector<QuestionId> ids(set.begin(), set.end());
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  for (QuestionId q : ids) {
    if (q >= attrs_.size()) throw ConfigError("unknown question id in utility set");
  }

  switch (kind_) {
    case UtilityKind::entropy: {
      std::vector<AttributeId> covered;
      for (QuestionId q : ids) covered.insert(covered.end(), attrs_[q].begin(), attrs_[q].end());
      std::sort(covered.begin(), covered.end());
      covered.erase(std::unique(covered.begin(), covered.end()), covered.end());
      double h = 0.0;
      for (AttributeId a : covered) h += entropy_[a];
      return h;
    }
    case UtilityKind::modular: {
      double total = 0.0;
      for (QuestionId q : ids) total += weight_[q];
      return total;
    }
    case UtilityKind::mnl: {
      double w = 0.0;
      double wr = 0.0;
      for (QuestionId q : ids) {
        w += weight_[q];
        wr += weight_[q] * revenue_[q];
      }
      return mnl_revenue(w, wr);
    }
    case UtilityKind::callback:
      return callback_(ids);
  }
  return 0.0;
}

UtilityWorkspace::UtilityWorkspace(const Utility& g) : g_(&g) {
  if (g.kind_ == UtilityKind::entropy) {
    cover_.assign(g.entropy_.size(), 0);
    touched_mark_.assign(g.entropy_.size(), kNoMark);
  }
  items_.reserve(kMaxWorkspaceItems);
}

void UtilityWorkspace::push(QuestionId q) {
  if (items_.size() >= kMaxWorkspaceItems) {
    throw ConfigError("utility workspace holds at most 64 questions");
  }
  const Mask bit = Mask{1} << items_.size();
  items_.push_back(q);
  if (g_->kind_ == UtilityKind::entropy) {
    for (AttributeId a : g_->attrs_[q]) {
      if (cover_[a] == 0) {
        touched_mark_[a] = touched_.size();
        touched_.push_back(a);
      }
      cover_[a] |= bit;
    }
  }
}

void UtilityWorkspace::pop() {
  const std::size_t pos = items_.size() - 1;
  const QuestionId q = items_.back();
  items_.pop_back();
  if (g_->kind_ == UtilityKind::entropy) {
    const Mask bit = Mask{1} << pos;
    for (AttributeId a : g_->attrs_[q]) {
      cover_[a] &= ~bit;
      if (cover_[a] == 0) touched_mark_[a] = kNoMark;
    }
    while (!touched_.empty() && touched_mark_[touched_.back()] == kNoMark) touched_.pop_back();
  }
}

void UtilityWorkspace::clear() {
  while (!items_.empty()) pop();
}

double UtilityWorkspace::value(Mask mask) const {
  switch (g_->kind_) {
    case UtilityKind::entropy: {
      double h = 0.0;
      for (AttributeId a : touched_) {
        if (cover_[a] & mask) h += g_->entropy_[a];
      }
      return h;
    }
    case UtilityKind::modular: {
      double total = 0.0;
      for (Mask m = mask; m; m &= m - 1) total += g_->weight_[items_[std::countr_zero(m)]];
      return total;
    }
    case UtilityKind::mnl: {
      double w = 0.0;
      double wr = 0.0;
      for (Mask m = mask; m; m &= m - 1) {
        const QuestionId q = items_[std::countr_zero(m)];
        w += g_->weight_[q];
        wr += g_->weight_[q] * g_->revenue_[q];
      }
      return mnl_revenue(w, wr);
    }
    case UtilityKind::callback: {
      scratch_.clear();
      for (Mask m = mask; m; m &= m - 1) scratch_.push_back(items_[std::countr_zero(m)]);
      std::sort(scratch_.begin(), scratch_.end());
      scratch_.erase(std::unique(scratch_.begin(), scratch_.end()), scratch_.end());
      return g_->callback_(scratch_);
    }
  }
  return 0.0;
}

double UtilityWorkspace::gain(Mask mask, std::size_t pos) const {
  switch (g_->kind_) {
    case UtilityKind::entropy: {
      double h = 0.0;
      for (AttributeId a : g_->attrs_[items_[pos]]) {
        if ((cover_[a] & mask) == 0) h += g_->entropy_[a];
      }
      return h;
    }
    case UtilityKind::modular:
      return g_->weight_[items_[pos]];
    case UtilityKind::mnl:
    case UtilityKind::callback:
      return value(mask | (Mask{1} << pos)) - value(mask);
  }
  return 0.0;
}

double eval_entropy(std::span<const QuestionId> set, const Instance& inst) {
  Instance view = inst;
  view.utility = UtilityKind::entropy;
  return Utility(view).value(set);
}

double eval_modular(std::span<const QuestionId> set, const Instance& inst) {
  Instance view = inst;
  view.utility = UtilityKind::modular;
  return Utility(view).value(set);
}

double eval_mnl_revenue(std::span<const QuestionId> set, const Instance& inst) {
  Instance view = inst;
  view.utility = UtilityKind::mnl;
  return Utility(view).value(set);
}

namespace {

std::vector<std::size_t> members(Mask mask) {
  std::vector<std::size_t> out;
  for (Mask m = mask; m; m &= m - 1) out.push_back(static_cast<std::size_t>(std::countr_zero(m)));
  return out;
}

struct TripleChecker {
  const SetFunction& g;
  double tolerance;
  SubmodularityReport& report;

  double eval(Mask mask) const {
    const auto items = members(mask);
    return g(items);
  }

  void check(Mask smaller, Mask larger, std::size_t y, double g1, double g1y, double g2,
             double g2y) {
    ++report.triples_checked;
    const double gain1 = g1y - g1;
    const double gain2 = g2y - g2;
    if (gain2 < -tolerance || gain1 < -tolerance) {
      report.monotone = false;
      if (report.witnesses.size() < kMaxWitnesses) {
        const bool on_larger = gain2 < -tolerance;
        report.witnesses.push_back({{}, members(on_larger ? larger : smaller), y,
                                    on_larger ? gain2 : gain1, 0.0, true});
      }
    }
    if (gain1 < gain2 - tolerance) {
      report.submodular = false;
      if (report.witnesses.size() < kMaxWitnesses) {
        report.witnesses.push_back({members(smaller), members(larger), y, gain1, gain2, false});
      }
    }
  }
};

}  // namespace

SubmodularityReport check_monotone_submodular(const SetFunction& g, std::size_t n,
                                              std::size_t exhaustive_limit,
                                              std::size_t samples, std::uint64_t seed,
                                              double tolerance) {
  SubmodularityReport report;
  if (n > 62) throw ConfigError("submodularity check supports at most 62 items");
  TripleChecker checker{g, tolerance, report};

  if (n <= exhaustive_limit && n <= 24) {
    const Mask full = (Mask{1} << n) - 1;
    std::vector<double> table(std::size_t{1} << n);
    for (Mask m = 0; m <= full; ++m) table[m] = checker.eval(m);
    for (Mask larger = 0; larger <= full; ++larger) {
      for (std::size_t y = 0; y < n; ++y) {
        const Mask bit = Mask{1} << y;
        if (larger & bit) continue;
        // every submask of `larger`, including the empty set
        for (Mask smaller = larger;; smaller = (smaller - 1) & larger) {
          checker.check(smaller, larger, y, table[smaller], table[smaller | bit], table[larger],
                        table[larger | bit]);
          if (smaller == 0) break;
        }
      }
    }
    return report;
  }

  report.exhaustive = false;
  Rng rng(seed);
  for (std::size_t s = 0; s < samples; ++s) {
    Mask larger = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (rng.bernoulli(0.5)) larger |= Mask{1} << i;
    }
    const std::size_t outside = n - static_cast<std::size_t>(std::popcount(larger));
    if (outside == 0) continue;
    std::size_t pick = static_cast<std::size_t>(rng.below(outside));
    std::size_t y = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (larger & (Mask{1} << i)) continue;
      if (pick-- == 0) {
        y = i;
        break;
      }
    }
    Mask smaller = 0;
    for (Mask m = larger; m; m &= m - 1) {
      if (rng.bernoulli(0.5)) smaller |= m & (~m + 1);
    }
    const Mask bit = Mask{1} << y;
    checker.check(smaller, larger, y, checker.eval(smaller), checker.eval(smaller | bit),
                  checker.eval(larger), checker.eval(larger | bit));
  }
  return report;
}

SubmodularityReport check_monotone_submodular(const Utility& g, std::size_t exhaustive_limit,
                                              std::size_t samples, std::uint64_t seed) {
  const SetFunction fn = [&g](std::span<const std::size_t> items) {
    return g.value(std::span<const QuestionId>(items.data(), items.size()));
  };
  return check_monotone_submodular(fn, g.ground_size(), exhaustive_limit, samples, seed);
}

}  // namespace cascadia
