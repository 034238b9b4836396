#include "doctest.h"

#include <cmath>

#include "cascadia/error.hpp"
#include "cascadia/evaluator.hpp"
#include "oracles.hpp"

using namespace cascadia;
using namespace cascadia::testing;

TEST_CASE("eval_exact basics") {
  const Instance adv = adversarial_instance(7);
  CHECK(eval_exact(Sequence{}, adv).value == 0.0);

  const Sequence first{0, 1, 2, 3, 4, 5, 6};
  const Sequence last{1, 2, 3, 4, 5, 6, 0};
  CHECK(eval_exact(first, adv).value == doctest::Approx(1.0));
  CHECK(eval_exact(last, adv).value == doctest::Approx(7.0));

  const EvalReport rep = eval_exact(last, adv);
  CHECK(rep.method == EvalMethod::exact);
  CHECK_FALSE(rep.std_error.has_value());
  CHECK(rep.reachability == reachability(last, adv));
}

TEST_CASE("eval_exact matches the branching tree") {
  const Variant variants[] = {Variant::basic, Variant::no_pna, Variant::slot_decay};
  for (std::uint64_t s = 0; s < 40; ++s) {
    RandomSpec spec;
    spec.n = 5 + s % 3;
    spec.budget = 5;
    spec.decay = true;
    spec.utility = s % 3 == 0 ? UtilityKind::mnl : UtilityKind::entropy;
    const Instance inst = random_instance(100 + s, spec);
    Sequence seq{4, 0, 3, 1, 2};
    Rng rng(s);
    rng.shuffle(std::span<QuestionId>(seq));
    for (Variant v : variants) {
      const double exact = eval_exact(seq, inst, v).value;
      CHECK(std::abs(exact - tree_value(seq, inst, v)) <= 1e-12);
    }
  }
}

TEST_CASE("scrolling variant is independent inclusion") {
  for (std::uint64_t s = 0; s < 10; ++s) {
    RandomSpec spec;
    spec.n = 6;
    spec.budget = 4;
    spec.scrolling = true;
    const Instance inst = random_instance(200 + s, spec);
    const Sequence seq{5, 2, 0, 3};
    CHECK(eval_exact(seq, inst, Variant::scrolling).value ==
          doctest::Approx(scrolling_value(seq, inst)).epsilon(1e-12));
  }
}

TEST_CASE("eval_exact refuses what it cannot do") {
  const Instance adv = adversarial_instance(4);
  CHECK_THROWS_AS(eval_exact(Sequence{0, 1}, adv, Variant::slot_decay), ConfigError);
  CHECK_THROWS_AS(eval_exact(Sequence{0, 1}, adv, Variant::scrolling), ConfigError);

  Instance big = adversarial_instance(30);
  Sequence seq;
  for (QuestionId q = 0; q < 23; ++q) seq.push_back(q);
  CHECK_THROWS_AS(eval_exact(seq, big), ComputeCapExceeded);
  const EvalReport rep = evaluate(seq, big, Variant::basic, 1000, 1);
  CHECK(rep.method == EvalMethod::monte_carlo);
}

TEST_CASE("Monte Carlo") {
  Instance det = adversarial_instance(5);
  det.questions[0].c_answer = 1.0;
  const Sequence seq{0, 1, 2, 3, 4};
  const EvalReport d = eval_monte_carlo(seq, det, Variant::basic, 1000, 9);
  CHECK(d.value == 5.0);
  REQUIRE(d.std_error.has_value());
  CHECK(*d.std_error == 0.0);
  CHECK(d.samples == std::size_t{1000});
  CHECK(eval_monte_carlo(Sequence{}, det, Variant::basic, 10, 1).value == 0.0);

  RandomSpec spec;
  spec.n = 6;
  spec.budget = 6;
  const Instance inst = random_instance(77, spec);
  const Sequence s{0, 1, 2, 3, 4, 5};
  const EvalReport a = eval_monte_carlo(s, inst, Variant::basic, 20000, 5);
  const EvalReport b = eval_monte_carlo(s, inst, Variant::basic, 20000, 5);
  CHECK(a.value == b.value);
  CHECK(std::abs(a.value - eval_exact(s, inst).value) <= 4.0 * *a.std_error);
  CHECK(eval_monte_carlo(s, inst, Variant::basic, 20000, 6).value != a.value);
}

TEST_CASE("eval_u") {
  RandomSpec spec;
  spec.n = 4;
  Instance inst = random_instance(4, spec);
  for (auto& q : inst.questions) q.attributes = {static_cast<AttributeId>(&q - &inst.questions[0])};
  const std::vector<QuestionId> set{0, 1};
  const double h_s = eval_entropy(set, inst);
  const double h_q = eval_entropy(std::vector<QuestionId>{2}, inst);

  inst.questions[2].p_answer = 1.0;
  CHECK(eval_u(2, set, inst) == doctest::Approx(h_s + h_q));
  inst.questions[2].p_answer = 0.0;
  CHECK(eval_u(2, set, inst) == doctest::Approx(h_s));
  inst.questions[2].p_answer = 0.5;
  CHECK(eval_u(2, set, inst) == doctest::Approx(h_s + 0.5 * h_q));
  CHECK(eval_u(2, set, inst, 0.5) == doctest::Approx(h_s + 0.25 * h_q));
  CHECK_THROWS_AS(eval_u(1, set, inst), ConfigError);
}

TEST_CASE("eval_v") {
  RandomSpec spec;
  spec.n = 6;
  const Instance inst = random_instance(8, spec);
  const VOracle exact = VOracle::exact(inst);
  CHECK(eval_v(3, {}, inst, exact) ==
        doctest::Approx(inst.questions[3].p_answer * oracle_g({3}, inst)));

  const std::vector<QuestionId> set{0, 2, 5};
  std::vector<double> probs;
  for (QuestionId q : {0, 2, 5, 1}) probs.push_back(inst.questions[q].p_answer);
  CHECK(std::abs(eval_v(1, set, inst, exact) - inclusion_value({0, 2, 5, 1}, probs, inst)) <= 1e-12);
  CHECK_THROWS_AS(eval_v(2, set, inst, exact), ConfigError);

  Instance sure = inst;
  for (auto& q : sure.questions) q.p_answer = 1.0;
  CHECK(eval_v(1, set, sure, VOracle::exact(sure)) == doctest::Approx(oracle_g({0, 1, 2, 5}, sure)));

  const VOracle sampled = VOracle::sampled(inst, 20000, 3);
  CHECK_FALSE(sampled.is_exact());
  CHECK(eval_v(1, set, inst, sampled) == doctest::Approx(eval_v(1, set, inst, exact)).epsilon(0.03));
  CHECK(eval_v(1, set, inst, sampled) == eval_v(1, set, inst, sampled));
}

TEST_CASE("VOracle copies collapse to the largest probability") {
  RandomSpec spec;
  spec.n = 4;
  const Instance inst = random_instance(12, spec);
  const VOracle exact = VOracle::exact(inst);
  const std::vector<Inclusion> copies{{1, 0.2}, {1, 0.7}, {3, 0.4}, {1, 0.5}};
  const std::vector<Inclusion> merged{{1, 0.7}, {3, 0.4}};
  CHECK(exact.expected(copies) == doctest::Approx(exact.expected(merged)));
  CHECK(exact.calls() == 2);
}

TEST_CASE("exact v refuses oversized sets") {
  Instance inst = adversarial_instance(25);
  const VOracle exact = VOracle::exact(inst);
  std::vector<QuestionId> set;
  for (QuestionId q = 1; q <= 20; ++q) set.push_back(q);
  CHECK_THROWS_AS(eval_v(0, set, inst, exact), ConfigError);
  set.pop_back();
  CHECK(eval_v(0, set, inst, exact) == doctest::Approx(20.0));
  CHECK_FALSE(VOracle::automatic(inst, 21).is_exact());
  CHECK(VOracle::automatic(inst, 20).is_exact());
}

TEST_CASE("inclusion probabilities per variant") {
  RandomSpec spec;
  spec.n = 3;
  spec.budget = 3;
  spec.decay = true;
  spec.scrolling = true;
  const Instance inst = random_instance(31, spec);
  CHECK(inclusion_probability(inst, 1, 2, Variant::basic) == inst.questions[1].p_answer);
  CHECK(inclusion_probability(inst, 1, 2, Variant::slot_decay) ==
        doctest::Approx((*inst.slot_decay)[2] * inst.questions[1].p_answer));
  CHECK(inclusion_probability(inst, 1, 2, Variant::scrolling) == (*inst.position_rates)[1][2]);

  const VOracle exact = VOracle::exact(inst);
  const Sequence seq{2, 0, 1};
  std::vector<double> probs;
  for (std::size_t i = 0; i < 3; ++i) probs.push_back((*inst.slot_decay)[i] * inst.questions[seq[i]].p_answer);
  CHECK(expected_random_set(seq, inst, Variant::slot_decay, exact) ==
        doctest::Approx(inclusion_value(seq, probs, inst)));
}
