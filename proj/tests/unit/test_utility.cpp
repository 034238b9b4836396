#include "doctest.h"

#include <cmath>

#include "cascadia/error.hpp"
#include "cascadia/utility.hpp"
#include "oracles.hpp"

using namespace cascadia;
using namespace cascadia::testing;

namespace {

Instance entropy_pair() {
  Instance inst;
  inst.budget = 2;
  Attribute a;
  a.distribution = {0.2, 0.2, 0.2, 0.2, 0.2};
  inst.attributes = {a};
  Question q;
  q.attributes = {0};
  inst.questions = {q, q};
  inst.questions[1].external_id = 1;
  return inst;
}

Instance mnl_instance(std::vector<double> weights, std::vector<double> revenues) {
  Instance inst;
  inst.utility = UtilityKind::mnl;
  inst.budget = weights.size();
  for (std::size_t i = 0; i < weights.size(); ++i) {
    Question q;
    q.external_id = static_cast<std::int64_t>(i);
    q.weight = weights[i];
    q.revenue = revenues[i];
    inst.questions.push_back(q);
  }
  return inst;
}

}  // namespace

TEST_CASE("entropy") {
  const Instance inst = entropy_pair();
  CHECK(eval_entropy({}, inst) == 0.0);
  const std::vector<QuestionId> one{0}, both{0, 1};
  CHECK(eval_entropy(one, inst) == doctest::Approx(std::log(5.0)));
  CHECK(eval_entropy(both, inst) == doctest::Approx(eval_entropy(one, inst)));
  CHECK(attribute_entropy(std::vector<double>{1.0, 0.0}) == 0.0);
  CHECK(attribute_entropy(std::vector<double>{0.5, 0.5}) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("entropy is coverage-determined") {
  RandomSpec spec;
  spec.n = 8;
  spec.attributes = 4;
  const Instance inst = random_instance(3, spec);
  const Utility g(inst);
  for (std::uint64_t a = 0; a < 256; ++a) {
    for (std::uint64_t b = 0; b < 256; b += 7) {
      std::vector<QuestionId> sa, sb;
      std::uint64_t cover_a = 0, cover_b = 0;
      for (QuestionId q = 0; q < 8; ++q) {
        if (a >> q & 1) {
          sa.push_back(q);
          for (AttributeId x : inst.questions[q].attributes) cover_a |= 1u << x;
        }
        if (b >> q & 1) {
          sb.push_back(q);
          for (AttributeId x : inst.questions[q].attributes) cover_b |= 1u << x;
        }
      }
      if (cover_a == cover_b) CHECK(g.value(sa) == doctest::Approx(g.value(sb)));
    }
  }
}

TEST_CASE("modular") {
  Instance inst = adversarial_instance(4);
  CHECK(eval_modular({}, inst) == 0.0);
  CHECK(eval_modular(std::vector<QuestionId>{0, 1, 2, 3}, inst) == 4.0);
  inst.questions[0].weight = 2.0;
  inst.questions[1].weight = 3.0;
  CHECK(eval_modular(std::vector<QuestionId>{0, 1}, inst) == 5.0);
  CHECK(Utility(inst).value(std::vector<QuestionId>{1, 1, 0}) == 5.0);
}

TEST_CASE("mnl revenue") {
  const Instance inst = mnl_instance({1.0, 1.0}, {1.0, 1.0});
  CHECK(eval_mnl_revenue({}, inst) == 0.0);
  CHECK(eval_mnl_revenue(std::vector<QuestionId>{0}, inst) == doctest::Approx(0.5));
  CHECK(eval_mnl_revenue(std::vector<QuestionId>{0, 1}, inst) == doctest::Approx(2.0 / 3.0));
  CHECK(Utility(inst).submodular_by_construction());
  CHECK_FALSE(Utility(mnl_instance({1.0, 10.0}, {10.0, 1.0})).submodular_by_construction());
  CHECK_THROWS_AS(Utility(mnl_instance({-1.0}, {1.0})), ConfigError);
}

TEST_CASE("unknown attribute and missing callback are configuration errors") {
  Instance inst = entropy_pair();
  inst.questions[0].attributes = {5};
  CHECK_THROWS_AS(Utility{inst}, ConfigError);
  Instance cb = adversarial_instance(2);
  cb.utility = UtilityKind::callback;
  CHECK_THROWS_AS(Utility{cb}, ConfigError);
}

TEST_CASE("callback utility") {
  Instance inst = adversarial_instance(3);
  inst.utility = UtilityKind::callback;
  inst.callback = [](std::span<const QuestionId> s) { return std::sqrt(static_cast<double>(s.size())); };
  const Utility g(inst);
  CHECK(g.value(std::vector<QuestionId>{0, 2}) == doctest::Approx(std::sqrt(2.0)));
  CHECK(check_monotone_submodular(g).submodular);
}

TEST_CASE("check_monotone_submodular") {
  RandomSpec spec;
  spec.n = 6;
  const auto entropy = check_monotone_submodular(Utility(random_instance(5, spec)));
  CHECK(entropy.monotone);
  CHECK(entropy.submodular);
  CHECK(entropy.exhaustive);
  CHECK(entropy.witnesses.empty());
  CHECK(entropy.triples_checked > 0);

  const auto modular = check_monotone_submodular(Utility(adversarial_instance(5)));
  CHECK(modular.monotone);
  CHECK(modular.submodular);

  const auto mnl = check_monotone_submodular(Utility(mnl_instance({1.0, 10.0}, {10.0, 1.0})));
  CHECK_FALSE(mnl.monotone);
  REQUIRE_FALSE(mnl.witnesses.empty());

  // Supermodular: g(S) = |S|^2.
  SetFunction square = [](std::span<const std::size_t> s) {
    return static_cast<double>(s.size() * s.size());
  };
  const auto sq = check_monotone_submodular(square, 5);
  CHECK(sq.monotone);
  CHECK_FALSE(sq.submodular);
  REQUIRE_FALSE(sq.witnesses.empty());
  const auto& w = sq.witnesses.front();
  CHECK(w.gain_smaller < w.gain_larger);

  // Sampled mode beyond the exhaustive limit.
  const auto sampled = check_monotone_submodular(square, 14, 10, 500, 3);
  CHECK_FALSE(sampled.exhaustive);
  CHECK_FALSE(sampled.submodular);
}

TEST_CASE("entropy, modular and equal-revenue MNL pass exhaustively up to n = 10") {
  for (std::size_t n : {4u, 7u, 10u}) {
    RandomSpec spec;
    spec.n = n;
    spec.attributes = n / 2 + 1;
    for (UtilityKind kind : {UtilityKind::entropy, UtilityKind::modular, UtilityKind::mnl}) {
      spec.utility = kind;
      const auto report = check_monotone_submodular(Utility(random_instance(n * 13, spec)), 10);
      CHECK(report.exhaustive);
      CHECK(report.monotone);
      CHECK(report.submodular);
    }
  }
}

TEST_CASE("workspace gains match set values") {
  for (UtilityKind kind : {UtilityKind::entropy, UtilityKind::modular, UtilityKind::mnl}) {
    RandomSpec spec;
    spec.n = 7;
    spec.attributes = 4;
    spec.utility = kind;
    const Instance inst = random_instance(21, spec);
    const Utility g(inst);
    UtilityWorkspace ws(g);
    const std::vector<QuestionId> order{4, 1, 6, 0, 3};
    for (QuestionId q : order) ws.push(q);
    for (Mask mask = 0; mask < (Mask{1} << order.size()); ++mask) {
      std::vector<QuestionId> set;
      for (std::size_t i = 0; i < order.size(); ++i) {
        if (mask >> i & 1) set.push_back(order[i]);
      }
      CHECK(ws.value(mask) == doctest::Approx(oracle_g(set, inst)).epsilon(1e-12));
      for (std::size_t pos = 0; pos < order.size(); ++pos) {
        if (mask >> pos & 1) continue;
        CHECK(ws.gain(mask, pos) ==
              doctest::Approx(ws.value(mask | Mask{1} << pos) - ws.value(mask)).epsilon(1e-12));
      }
    }
    ws.pop();
    ws.pop();
    CHECK(ws.size() == 3);
    CHECK(ws.value(0b111) == doctest::Approx(oracle_g({4, 1, 6}, inst)));
    ws.clear();
    CHECK(ws.size() == 0);
  }
}
