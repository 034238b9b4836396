#include "cascadia/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include "cascadia/error.hpp"

namespace cascadia {

namespace {

constexpr double kSumTolerance = 1e-9;

bool in_unit_interval(double x) { return x >= 0.0 && x <= 1.0; }

std::string id_text(const char* what, std::int64_t id) {
  std::ostringstream out;
  out << what << ' ' << id;
  return out.str();
}

}  // namespace

double agg_continuation(const Question& q, double decay) noexcept {
  return decay * q.p_answer * q.c_answer + q.p_pna * q.c_pna;
}

double agg_continuation(const Question& q, std::size_t slot,
                        std::span<const double> decay) {
  if (slot >= decay.size()) {
    throw ConfigError("decay vector does not cover slot " + std::to_string(slot + 1));
  }
  return agg_continuation(q, decay[slot]);
}

SlotBranch slot_branch(const Instance& inst, QuestionId q, std::size_t slot,
                       Variant variant) {
  const Question& question = inst.questions[q];
  SlotBranch br;
  switch (variant) {
    case Variant::scrolling: {
      const double p = (*inst.position_rates)[q][slot];
      br.answer_continue = p;
      br.skip_continue = 1.0 - p;
      return br;
    }
    case Variant::no_pna:
      br.answer_continue = question.p_answer * question.c_answer;
      br.answer_stop = question.p_answer * (1.0 - question.c_answer);
      return br;
    case Variant::slot_decay: {
      const double lambda = (*inst.slot_decay)[slot];
      br.answer_continue = lambda * question.p_answer * question.c_answer;
      br.answer_stop = lambda * question.p_answer * (1.0 - question.c_answer);
      br.skip_continue = question.p_pna * question.c_pna;
      return br;
    }
    case Variant::basic:
      break;
  }
  br.answer_continue = question.p_answer * question.c_answer;
  br.answer_stop = question.p_answer * (1.0 - question.c_answer);
  br.skip_continue = question.p_pna * question.c_pna;
  return br;
}

std::vector<double> reachability(std::span<const QuestionId> seq,
                                 const Instance& inst, Variant variant) {
  require_variant_data(inst, variant, seq.size());
  std::vector<double> out;
  out.reserve(seq.size());
  double reach = 1.0;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    out.push_back(reach);
    if (variant != Variant::scrolling) {
      reach *= slot_branch(inst, seq[i], i, variant).proceed();
    }
  }
  return out;
}

Variant natural_variant(const Instance& inst) noexcept {
  return inst.slot_decay ? Variant::slot_decay : Variant::basic;
}

void require_variant_data(const Instance& inst, Variant variant,
                          std::size_t length) {
  if (variant == Variant::slot_decay) {
    if (!inst.slot_decay) throw ConfigError("slot_decay variant requires a decay vector");
    if (inst.slot_decay->size() < length) {
      throw ConfigError("decay vector shorter than the sequence");
    }
  }
  if (variant == Variant::scrolling) {
    if (!inst.position_rates) {
      throw ConfigError("scrolling variant requires position_rates");
    }
    if (inst.position_rates->size() != inst.size()) {
      throw ConfigError("position_rates must have one row per question");
    }
    for (const auto& row : *inst.position_rates) {
      if (row.size() < length) {
        throw ConfigError("position_rates row shorter than the sequence");
      }
    }
  }
}

std::vector<Violation> validate_instance(const Instance& inst) {
  std::vector<Violation> out;
  auto add = [&out](std::string code, std::string detail) {
    out.push_back({std::move(code), std::move(detail)});
  };

  if (inst.budget < 1) add("budget<1", "budget must be a positive integer");

  std::unordered_set<std::int64_t> seen_questions;
  for (const Question& q : inst.questions) {
    const std::string who = id_text("question", q.external_id);
    if (!seen_questions.insert(q.external_id).second) add("duplicate question id", who);
    if (!in_unit_interval(q.p_answer)) add("p_answer out of [0,1]", who);
    if (!in_unit_interval(q.p_pna)) add("p_pna out of [0,1]", who);
    if (!in_unit_interval(q.c_answer)) add("c_answer out of [0,1]", who);
    if (!in_unit_interval(q.c_pna)) add("c_pna out of [0,1]", who);
    if (q.p_answer + q.p_pna > 1.0 + kSumTolerance) add("p_answer+p_pna>1", who);
    if (!(q.weight >= 0.0)) add("negative weight", who);
    if (!(q.revenue >= 0.0)) add("negative revenue", who);
    for (AttributeId a : q.attributes) {
      if (a >= inst.attributes.size()) add("unknown attribute", who);
    }
  }

  std::unordered_set<std::int64_t> seen_attributes;
  for (const Attribute& a : inst.attributes) {
    const std::string who = id_text("attribute", a.external_id);
    if (!seen_attributes.insert(a.external_id).second) add("duplicate attribute id", who);
    double total = 0.0;
    bool negative = false;
    for (double p : a.distribution) {
      negative |= !(p >= 0.0);
      total += p;
    }
    if (negative) add("negative probability", who);
    if (a.distribution.empty() || std::abs(total - 1.0) > kSumTolerance) {
      add("distribution does not sum to 1", who);
    }
  }

  if (inst.slot_decay) {
    const auto& decay = *inst.slot_decay;
    if (decay.size() < inst.budget) add("decay shorter than budget", "slot_decay");
    if (!decay.empty() && decay.front() != 1.0) add("decay[1] != 1", "slot_decay");
    for (std::size_t i = 0; i < decay.size(); ++i) {
      if (!(decay[i] > 0.0 && decay[i] <= 1.0)) {
        add("decay out of (0,1]", "slot " + std::to_string(i + 1));
      }
      if (i + 1 < decay.size() && decay[i] < decay[i + 1]) {
        add("decay not nonincreasing", "slot " + std::to_string(i + 1));
      }
    }
  }

  if (inst.position_rates) {
    const auto& rates = *inst.position_rates;
    if (rates.size() != inst.size()) add("position_rates rows != questions", "position_rates");
    for (std::size_t q = 0; q < rates.size(); ++q) {
      if (rates[q].size() < inst.budget) {
        add("position_rates row shorter than budget", "row " + std::to_string(q));
      }
      for (double p : rates[q]) {
        if (!in_unit_interval(p)) add("position rate out of [0,1]", "row " + std::to_string(q));
      }
    }
  }

  if (inst.utility == UtilityKind::callback && !inst.callback) {
    add("missing callback", "utility kind callback has no function");
  }
  return out;
}

void ensure_valid(const Instance& inst) {
  const auto violations = validate_instance(inst);
  if (violations.empty()) return;
  std::ostringstream msg;
  msg << "invalid instance:";
  for (const auto& v : violations) msg << "\n  " << v.code << " (" << v.detail << ')';
  throw ValidationError(msg.str());
}

void check_sequence(std::span<const QuestionId> seq, const Instance& inst) {
  if (seq.size() > inst.budget) throw ConfigError("sequence longer than budget");
  std::vector<bool> used(inst.size(), false);
  for (QuestionId q : seq) {
    if (q >= inst.size()) throw ConfigError("sequence references unknown question");
    if (used[q]) throw ConfigError("sequence repeats a question");
    used[q] = true;
  }
}

const char* to_string(UtilityKind kind) noexcept {
  switch (kind) {
    case UtilityKind::entropy: return "entropy";
    case UtilityKind::modular: return "modular";
    case UtilityKind::mnl: return "mnl";
    case UtilityKind::callback: return "callback";
  }
  return "?";
}

const char* to_string(Variant variant) noexcept {
  switch (variant) {
    case Variant::basic: return "basic";
    case Variant::no_pna: return "no_pna";
    case Variant::slot_decay: return "slot_decay";
    case Variant::scrolling: return "scrolling";
  }
  return "?";
}

UtilityKind parse_utility_kind(const std::string& text) {
  if (text == "entropy") return UtilityKind::entropy;
  if (text == "modular") return UtilityKind::modular;
  if (text == "mnl") return UtilityKind::mnl;
  throw ConfigError("unknown utility kind '" + text + "'");
}

Variant parse_variant(const std::string& text) {
  if (text == "basic") return Variant::basic;
  if (text == "no_pna") return Variant::no_pna;
  if (text == "slot_decay") return Variant::slot_decay;
  if (text == "scrolling") return Variant::scrolling;
  throw ConfigError("unknown variant '" + text + "'");
}

}  // namespace cascadia
