#include <algorithm>
#include <fstream>

#include "doctest.h"
#include "helpers.hpp"
#include "zscan/model.hpp"

using namespace zscan;
using zscan_test::rec;

namespace {

// The two counting identities every arrangement must satisfy, recomputed
// from scratch: line pairs covered by multi-points, and conic incidences.
void check_count_identities(const Arrangement& a) {
  const int n = a.line_count();
  int pair_sum = 0;
  int conic_incidences = 0;
  int tangents = 0;
  for (const auto& p : a.points()) {
    int k = static_cast<int>(p.lines.size());
    pair_sum += k * (k - 1) / 2;
    if (p.on_conic) conic_incidences += k;
    if (p.tangent_line) ++tangents;
  }
  CHECK(pair_sum == n * (n - 1) / 2);
  CHECK(conic_incidences == 2 * n - tangents);
}

}  // namespace

TEST_CASE("four-line sample validates and normalizes") {
  Arrangement a = zscan_test::sample_4_1();
  CHECK(a.line_count() == 4);
  REQUIRE(a.points().size() == 7);
  CHECK(std::is_sorted(a.points().begin(), a.points().end()));
  CHECK(a.points().front().lines == std::vector<LineId>{1, 2});
  CHECK(a.points().front().tangent_line == 1);
  CHECK(a.points().back().lines == std::vector<LineId>{4});
  check_count_identities(a);
}

TEST_CASE("characteristics of the four-line sample") {
  Arrangement a = zscan_test::sample_4_1();
  CHECK(characteristic(a, 0) == CharTriple{1, 1, 1});  // P(1,2)
  CHECK(characteristic(a, 1) == CharTriple{0, 0, 2});  // P(1,3)
  CHECK(characteristic(a, 3) == CharTriple{0, 1, 2});  // P(2,3)
  CHECK(characteristic(a, 6) == CharTriple{0, 1, 1});  // P(4)
  CHECK(to_string(CharTriple{1, 1, 1}) == "(1, 1, 1)");
}

TEST_CASE("component counts and constraints") {
  Arrangement a = zscan_test::sample_4_1();
  CHECK(component_count(a.point(0)) == 3);  // two lines + conic
  CHECK(component_count(a.point(1)) == 2);
  CHECK(component_count(a.point(6)) == 2);  // one line + conic
  CHECK(constraints(a) == std::vector<PointIndex>{0, 3, 5});
}

TEST_CASE("point names use line lists and prime marks for twins") {
  Arrangement a = zscan_test::sample_4_1();
  CHECK(point_name(a, 0) == "P(1,2)");
  CHECK(point_name(a, 6) == "P(4)");
  Arrangement twins = zscan_test::load_fixture("transverse_line_1_1.json");
  CHECK(point_name(twins, 0) == "P(1)");
  CHECK(point_name(twins, 1) == "P(1)'");
}

TEST_CASE("line profiles summarize tangency, characteristics, constraints") {
  Arrangement a = zscan_test::sample_4_1();
  LineProfile l1 = line_profile(a, 1);
  CHECK(l1.is_tangent);
  CHECK(l1.constraint_count == 1);
  LineProfile l4 = line_profile(a, 4);
  CHECK_FALSE(l4.is_tangent);
  CHECK(l4.constraint_count == 1);
  std::vector<CharTriple> expected{{0, 0, 2}, {0, 0, 2}, {0, 1, 1}, {0, 1, 2}};
  CHECK(l4.chars == expected);
}

TEST_CASE("equality ignores input record order") {
  Arrangement a = zscan_test::sample_4_1();
  Arrangement b = zscan_test::load_fixture("sample_4_1.json");
  CHECK(a == b);
}

TEST_CASE("validation rejects duplicated line pairs") {
  try {
    validate(2, {rec({1, 2}), rec({1, 2}, true), rec({1}, true), rec({2}, true)});
    FAIL("duplicated pair accepted");
  } catch (const ValidationError& e) {
    CHECK(e.code() == ValidationCode::PairDuplicated);
  }
  // A repeated label inside one record is the same defect.
  try {
    validate(2, {rec({1, 1})});
    FAIL("repeated label accepted");
  } catch (const ValidationError& e) {
    CHECK(e.code() == ValidationCode::PairDuplicated);
  }
}

TEST_CASE("validation rejects uncovered line pairs") {
  try {
    validate(2, {rec({1}, true), rec({1}, true), rec({2}, true), rec({2}, true)});
    FAIL("missing pair accepted");
  } catch (const ValidationError& e) {
    CHECK(e.code() == ValidationCode::PairMissing);
  }
}

TEST_CASE("validation enforces conic degree per line") {
  // Tangent line with a second conic point.
  try {
    validate(1, {rec({1}, true, 1), rec({1}, true)});
    FAIL("tangent line with two conic points accepted");
  } catch (const ValidationError& e) {
    CHECK(e.code() == ValidationCode::TangentConicCount);
  }
  // Transverse line with a single conic point.
  try {
    validate(1, {rec({1}, true)});
    FAIL("transverse line with one conic point accepted");
  } catch (const ValidationError& e) {
    CHECK(e.code() == ValidationCode::TangentConicCount);
  }
}

TEST_CASE("validation rejects tangency designations off the conic") {
  try {
    validate(1, {rec({1}, false, 1)});
    FAIL("tangency off the conic accepted");
  } catch (const ValidationError& e) {
    CHECK(e.code() == ValidationCode::TangentNotOnConic);
  }
}

TEST_CASE("validation rejects bad line indices") {
  try {
    validate(2, {rec({1, 3})});
    FAIL("line index out of range accepted");
  } catch (const ValidationError& e) {
    CHECK(e.code() == ValidationCode::IndexOutOfRange);
  }
  // Tangent designation not incident to the point.
  try {
    validate(2, {rec({1}, true, 2), rec({1}, true), rec({2}, true),
                 rec({2}, true), rec({1, 2})});
    FAIL("non-incident tangent designation accepted");
  } catch (const ValidationError& e) {
    CHECK(e.code() == ValidationCode::IndexOutOfRange);
  }
}

TEST_CASE("validation rejects points with fewer than two components") {
  try {
    validate(1, {rec({1}, false)});
    FAIL("single-component point accepted");
  } catch (const ValidationError& e) {
    CHECK(e.code() == ValidationCode::TooFewComponents);
  }
}

TEST_CASE("point accessor rejects bad indices") {
  Arrangement a = zscan_test::conic_only();
  try {
    a.point(0);
    FAIL("out-of-range point accepted");
  } catch (const ValidationError& e) {
    CHECK(e.code() == ValidationCode::UnknownPoint);
  }
}

TEST_CASE("counting identities hold on all fixtures") {
  for (const char* name :
       {"conic_only_0_1.json", "tangent_line_1_1.json", "transverse_line_1_1.json",
        "two_tangents_2_1.json", "tangent_transverse_through_2_1.json",
        "tangent_transverse_apart_2_1.json", "transverse_shared_2_1.json",
        "transverse_apart_2_1.json", "tangent_triangle_3_1.json",
        "sample_4_1.json"}) {
    check_count_identities(zscan_test::load_fixture(name));
  }
}

TEST_CASE("fixture files are stored in normalized form") {
  for (const char* name :
       {"conic_only_0_1.json", "tangent_line_1_1.json", "transverse_line_1_1.json",
        "two_tangents_2_1.json", "tangent_transverse_through_2_1.json",
        "tangent_transverse_apart_2_1.json", "transverse_shared_2_1.json",
        "transverse_apart_2_1.json", "tangent_triangle_3_1.json",
        "sample_4_1.json"}) {
    std::ifstream in(zscan_test::fixture_path(name));
    REQUIRE(in);
    nlohmann::json stored = nlohmann::json::parse(in);
    Arrangement a = zscan::arrangement_from_json(stored);
    CHECK(to_json(a) == stored);
  }
}
