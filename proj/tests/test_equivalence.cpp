#include <algorithm>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "zscan/equivalence.hpp"

using namespace zscan;
using zscan_test::rec;

TEST_CASE("weak numerical type of the four-line sample") {
  WeakNumericalType t = weak_numerical_type(zscan_test::sample_4_1());
  WeakNumericalType expected{{0, 0, 2}, {0, 0, 2}, {0, 0, 2}, {0, 1, 1},
                             {0, 1, 2}, {0, 1, 2}, {1, 1, 1}};
  CHECK(t == expected);
  CHECK(to_string(t) ==
        "{(0, 0, 2)x3, (0, 1, 1)x1, (0, 1, 2)x2, (1, 1, 1)x1}");
}

TEST_CASE("pinned canonical keys") {
  CHECK(canonical_key(zscan_test::conic_only()) == "n=0:");
  CHECK(canonical_key(zscan_test::load_fixture("tangent_line_1_1.json")) ==
        "n=1:(1,1,[1])");
  CHECK(canonical_key(zscan_test::load_fixture("transverse_line_1_1.json")) ==
        "n=1:(1,0,[1]),(1,0,[1])");
}

TEST_CASE("keys are invariant under relabeling") {
  Arrangement a = zscan_test::sample_4_1();
  CanonicalKey key = canonical_key(a);
  std::mt19937 rng(20240817);
  Permutation sigma{1, 2, 3, 4};
  for (int trial = 0; trial < 20; ++trial) {
    std::shuffle(sigma.begin(), sigma.end(), rng);
    CHECK(canonical_key(relabel(a, sigma)) == key);
  }
}

TEST_CASE("key parsing inverts key construction") {
  for (const char* name :
       {"conic_only_0_1.json", "two_tangents_2_1.json", "transverse_shared_2_1.json",
        "tangent_triangle_3_1.json", "sample_4_1.json"}) {
    Arrangement a = zscan_test::load_fixture(name);
    CanonicalKey key = canonical_key(a);
    Arrangement back = arrangement_from_key(key);
    CHECK(canonical_key(back) == key);
    CHECK(are_equivalent(a, back).has_value());
  }
}

TEST_CASE("malformed keys are rejected") {
  CHECK_THROWS_AS(arrangement_from_key("garbage"), ValidationError);
  CHECK_THROWS_AS(arrangement_from_key("n=1:"), ValidationError);
  CHECK_THROWS_AS(arrangement_from_key("n=1:(9,9,[1])"), ValidationError);
  CHECK_THROWS_AS(arrangement_from_key("n=2:(1,1,[1])"), ValidationError);
  CHECK_THROWS_AS(arrangement_from_key("n=1:(1,1,[1]),"), ValidationError);
}

TEST_CASE("relabel validates the permutation") {
  Arrangement a = zscan_test::sample_4_1();
  try {
    relabel(a, {1, 1, 3, 4});
    FAIL("repeated image accepted");
  } catch (const ValidationError& e) {
    CHECK(e.code() == ValidationCode::NotAPermutation);
  }
  try {
    relabel(a, {1, 2, 3});
    FAIL("wrong-size permutation accepted");
  } catch (const ValidationError& e) {
    CHECK(e.code() == ValidationCode::NotAPermutation);
  }
}

TEST_CASE("are_equivalent agrees with key equality") {
  std::vector<Arrangement> samples{
      zscan_test::load_fixture("two_tangents_2_1.json"),
      zscan_test::load_fixture("tangent_transverse_through_2_1.json"),
      zscan_test::load_fixture("tangent_transverse_apart_2_1.json"),
      zscan_test::load_fixture("transverse_shared_2_1.json"),
      zscan_test::load_fixture("transverse_apart_2_1.json"),
      zscan_test::sample_4_1(),
      zscan_test::tangent_triangle_3_1()};
  std::mt19937 rng(7);
  for (const Arrangement& a : samples) {
    for (const Arrangement& b : samples) {
      bool keys_equal = canonical_key(a) == canonical_key(b);
      CHECK(are_equivalent(a, b).has_value() == keys_equal);
    }
    Permutation sigma(a.line_count());
    for (int l = 1; l <= a.line_count(); ++l) sigma[l - 1] = l;
    std::shuffle(sigma.begin(), sigma.end(), rng);
    Arrangement shuffled = relabel(a, sigma);
    CHECK(are_equivalent(a, shuffled).has_value());
    CHECK(canonical_key(shuffled) == canonical_key(a));
  }
}

TEST_CASE("equivalence witnesses are sound") {
  Arrangement a = zscan_test::sample_4_1();
  Permutation sigma{3, 1, 4, 2};
  Arrangement b = relabel(a, sigma);
  auto witness = are_equivalent(a, b);
  REQUIRE(witness.has_value());
  CHECK(relabel(a, witness->sigma) == b);
  REQUIRE(witness->point_map.size() == a.points().size());
  std::vector<bool> hit(b.points().size(), false);
  for (PointIndex i = 0; i < a.points().size(); ++i) {
    PointIndex j = witness->point_map[i];
    REQUIRE(j < b.points().size());
    CHECK_FALSE(hit[j]);
    hit[j] = true;
    PointRecord mapped = a.point(i);
    for (LineId& l : mapped.lines) l = witness->sigma[l - 1];
    std::sort(mapped.lines.begin(), mapped.lines.end());
    if (mapped.tangent_line) mapped.tangent_line = witness->sigma[*mapped.tangent_line - 1];
    CHECK(mapped == b.point(j));
  }
}

TEST_CASE("equivalence is reflexive, symmetric and transitive on samples") {
  Arrangement a = zscan_test::sample_4_1();
  Arrangement b = relabel(a, {2, 1, 4, 3});
  Arrangement c = relabel(a, {4, 3, 2, 1});
  CHECK(are_equivalent(a, a).has_value());
  CHECK(are_equivalent(a, b).has_value() == are_equivalent(b, a).has_value());
  CHECK((are_equivalent(a, b).has_value() && are_equivalent(b, c).has_value()));
  CHECK(are_equivalent(a, c).has_value());
}

TEST_CASE("equivalent arrangements share weak numerical types") {
  Arrangement a = zscan_test::tangent_triangle_3_1();
  Arrangement b = relabel(a, {3, 1, 2});
  CHECK(weak_numerical_type(a) == weak_numerical_type(b));
}
