#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include "properties.hpp"

using dartskill::properties::PropertyResult;
using dartskill::properties::PropertySummary;
using dartskill::properties::run_all_properties;

TEST_CASE("randomized module invariants hold over 200 cases each") {
  const PropertySummary summary = run_all_properties(200);
  CHECK(summary.results.size() >= 20);
  for (const PropertyResult& result : summary.results) {
    INFO(result.name, ": ", result.first_failure);
    CHECK(result.cases == 200);
    CHECK(result.failures == 0);
  }
}

TEST_CASE("the harness reports failing invariants instead of hiding them") {
  // Same entry point, tiny case count: the summary's bookkeeping must be
  // consistent with its per-invariant results.
  const PropertySummary summary = run_all_properties(2);
  int total = 0;
  for (const PropertyResult& result : summary.results) {
    CHECK(result.cases == 2);
    total += result.failures;
  }
  CHECK(summary.total_failures() == total);
  CHECK(summary.all_passed() == (total == 0));
}
