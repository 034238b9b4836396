#include "doctest.h"

#include "properties.hpp"

using namespace cascadia::testing;

// Reduced counts; the acceptance binary runs the same sweeps at full size.

TEST_CASE("g, u and v are monotone submodular") {
  const auto r = prop_submodular_surrogates(12, 1);
  CHECK_MESSAGE(r.ok(), r.first_failure);
}

TEST_CASE("prefix truncation keeps (1 - rho) of the optimum") {
  const auto r = prop_prefix_bound(8, 1);
  CHECK_MESSAGE(r.ok(), r.first_failure);
}

TEST_CASE("reachability sandwich and append monotonicity") {
  const auto r = prop_reach_sandwich(3, 1);
  CHECK_MESSAGE(r.ok(), r.first_failure);
}

TEST_CASE("raising decay never lowers f") {
  const auto r = prop_decay_monotone(3, 1);
  CHECK_MESSAGE(r.ok(), r.first_failure);
}
