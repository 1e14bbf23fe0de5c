#include <cmath>
#include <complex>

#include "doctest.h"
#include "helpers.hpp"
#include "zscan/equivalence.hpp"
#include "zscan/lm.hpp"
#include "zscan/realization.hpp"

using namespace zscan;
using cd = std::complex<double>;
using Eigen::Matrix3cd;
using Eigen::Vector3cd;

namespace {

const Tolerances kTol;

RealizedArrangement make_geometry(const std::vector<Vector3cd>& lines,
                                  Matrix3cd conic = reference_conic()) {
  RealizedArrangement g;
  g.conic = conic;
  for (const auto& l : lines) g.lines.push_back(normalize_projective(l));
  return g;
}

Matrix3cd sample_transform() {
  Matrix3cd m;
  m << cd(2.0, 0.3), cd(1.0, -0.4), cd(0.0, 0.7), cd(0.1, 1.1), cd(1.0, 0.0),
      cd(-1.0, 0.2), cd(1.0, -0.5), cd(0.0, 0.6), cd(1.5, 0.0);
  return m;
}

}  // namespace

TEST_CASE("damped least squares reaches the Rosenbrock minimum") {
  auto fn = [](const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd& J) {
    r.resize(2);
    J.resize(2, 2);
    r(0) = 10.0 * (x(1) - x(0) * x(0));
    r(1) = 1.0 - x(0);
    J(0, 0) = -20.0 * x(0);
    J(0, 1) = 10.0;
    J(1, 0) = -1.0;
    J(1, 1) = 0.0;
  };
  Eigen::VectorXd x0(2);
  x0 << -1.2, 1.0;
  LmOutcome out = lm_minimize(fn, x0);
  CHECK(std::abs(out.x(0) - 1.0) < 1e-8);
  CHECK(std::abs(out.x(1) - 1.0) < 1e-8);
}

TEST_CASE("projective helpers normalize and measure as advertised") {
  Vector3cd v(cd(0, 2), cd(0, 0), cd(0, -2));
  Vector3cd n = normalize_projective(v);
  CHECK(std::abs(n.norm() - 1.0) < 1e-15);
  CHECK(n(0).imag() == 0.0);
  CHECK(n(0).real() > 0.0);

  CHECK(projective_distance(v, Vector3cd(1, 0, -1)) < 1e-15);
  CHECK(projective_distance(Vector3cd(1, 0, 0), Vector3cd(0, 1, 0)) ==
        doctest::Approx(1.0));

  Matrix3cd q = normalize_conic_matrix(3.0 * reference_conic());
  CHECK(std::abs(q.norm() - 1.0) < 1e-15);
  CHECK(q(0, 0) == q(1, 1));
}

TEST_CASE("extraction reads two skew transverse lines") {
  RealizedArrangement g =
      make_geometry({Vector3cd(1, 0, 0), Vector3cd(0, 0, 1)});
  Arrangement a = extract_combinatorics(g, kTol);
  CHECK(a == zscan_test::load_fixture("transverse_apart_2_1.json"));
}

TEST_CASE("extraction recognizes a tangent line") {
  RealizedArrangement g = make_geometry({Vector3cd(0, 1, -1)});
  Arrangement a = extract_combinatorics(g, kTol);
  CHECK(a == zscan_test::load_fixture("tangent_line_1_1.json"));
}

TEST_CASE("extraction merges a shared conic crossing") {
  // Both lines pass through (0,1,1): x = 0, and the chord through (1,0,2).
  RealizedArrangement g =
      make_geometry({Vector3cd(1, 0, 0), Vector3cd(2, 1, -1)});
  Arrangement a = extract_combinatorics(g, kTol);
  CHECK(a == zscan_test::load_fixture("transverse_shared_2_1.json"));
}

TEST_CASE("extraction on an empty geometry yields the conic-only class") {
  RealizedArrangement g = make_geometry({});
  CHECK(extract_combinatorics(g, kTol) == zscan_test::conic_only());
}

TEST_CASE("extract_detailed aligns coordinates with records") {
  RealizedArrangement g =
      make_geometry({Vector3cd(1, 0, 0), Vector3cd(2, 1, -1)});
  ExtractionDetail d = extract_detailed(g, kTol);
  REQUIRE(d.coords.size() == d.arrangement.points().size());
  const Matrix3cd q = reference_conic();
  for (PointIndex i = 0; i < d.coords.size(); ++i) {
    const PointRecord& p = d.arrangement.point(i);
    const Vector3cd& x = d.coords[i];
    for (LineId l : p.lines) {
      cd incidence = g.lines[l - 1].transpose() * x;
      CHECK(std::abs(incidence) < 1e-12);
    }
    cd on_conic = x.transpose() * q * x;
    if (p.on_conic) {
      CHECK(std::abs(on_conic) < 1e-12);
    } else {
      CHECK(std::abs(on_conic) > 1e-3);
    }
  }
}

TEST_CASE("coincident lines are degenerate input") {
  RealizedArrangement g =
      make_geometry({Vector3cd(1, 0, 0), Vector3cd(2, 0, 0)});
  try {
    extract_combinatorics(g, kTol);
    FAIL("coincident lines accepted");
  } catch (const RealizationError& e) {
    CHECK(e.code() == RealizationCode::DegenerateInput);
  }
}

TEST_CASE("nearly coincident lines occupy the gray zone") {
  RealizedArrangement g =
      make_geometry({Vector3cd(1, 0, 0), Vector3cd(1, 3e-6, 0)});
  try {
    extract_combinatorics(g, kTol);
    FAIL("gray-zone line pair accepted");
  } catch (const RealizationError& e) {
    CHECK(e.code() == RealizationCode::ClusterAmbiguity);
  }
}

TEST_CASE("a singular conic matrix is degenerate input") {
  Matrix3cd q = Matrix3cd::Zero();
  q(0, 0) = 1.0;
  q(1, 1) = 1.0;
  RealizedArrangement g = make_geometry({Vector3cd(1, 0, 0)}, q);
  try {
    extract_combinatorics(g, kTol);
    FAIL("singular conic accepted");
  } catch (const RealizationError& e) {
    CHECK(e.code() == RealizationCode::DegenerateInput);
  }
}

TEST_CASE("nearby intersection points occupy the gray zone") {
  // The chord through (delta, sqrt(1-delta^2), 1) passes a conic point a few
  // microns from (0,1,1), the crossing of x = 0, while the lines themselves
  // stay far apart.
  double delta = 5e-6;
  double s = std::sqrt(1.0 - delta * delta);
  Vector3cd pa(delta, s, 1.0);
  Vector3cd pb(1.0, 0.0, 2.0);
  Vector3cd chord = pa.cross(pb);
  RealizedArrangement g = make_geometry({Vector3cd(1, 0, 0), chord});
  try {
    extract_combinatorics(g, kTol);
    FAIL("gray-zone point pair accepted");
  } catch (const RealizationError& e) {
    CHECK(e.code() == RealizationCode::ClusterAmbiguity);
  }
}

TEST_CASE("merged tangency points of different lines collide") {
  // An anisotropic conic squeezes the tangency points of two well-separated
  // tangent lines into one cluster.
  Matrix3cd q = Matrix3cd::Zero();
  q(0, 0) = 1e-6;
  q(1, 1) = 1.0;
  q(2, 2) = -1.0;
  double t = 1e-4;
  Vector3cd p1(1000.0, 0.0, 1.0);
  Vector3cd p2(1000.0, std::sinh(t), std::cosh(t));
  RealizedArrangement g = make_geometry({q * p1, q * p2}, q);
  try {
    extract_combinatorics(g, kTol);
    FAIL("tangency collision accepted");
  } catch (const ValidationError& e) {
    CHECK(e.code() == ValidationCode::TangentCollision);
  }
}

TEST_CASE("realize returns the conic immediately for the empty class") {
  RealizationResult res = realize(zscan_test::conic_only(), 0, kTol, 99);
  CHECK(res.status == RealizeStatus::Realized);
  CHECK(res.attempts == 0);
  REQUIRE(res.geometry.has_value());
  CHECK(res.geometry->residual == 0.0);
  CHECK(res.geometry->lines.empty());
}

TEST_CASE("a zero budget leaves nonempty classes unknown") {
  RealizationResult res =
      realize(zscan_test::load_fixture("tangent_line_1_1.json"), 0, kTol, 1);
  CHECK(res.status == RealizeStatus::Unknown);
  CHECK(res.attempts == 0);
  CHECK_FALSE(res.geometry.has_value());
}

TEST_CASE("realize solves the single-line classes") {
  for (const char* name : {"tangent_line_1_1.json", "transverse_line_1_1.json"}) {
    Arrangement a = zscan_test::load_fixture(name);
    RealizationResult res = realize(a, 16, kTol, 7);
    REQUIRE(res.status == RealizeStatus::Realized);
    CHECK(res.geometry->residual < kTol.residual);
    CHECK(extract_combinatorics(*res.geometry, kTol) == a);
  }
}

TEST_CASE("realize solves every level-two class") {
  for (const char* name :
       {"two_tangents_2_1.json", "tangent_transverse_through_2_1.json",
        "tangent_transverse_apart_2_1.json", "transverse_shared_2_1.json",
        "transverse_apart_2_1.json"}) {
    Arrangement a = zscan_test::load_fixture(name);
    RealizationResult res = realize(a, 32, kTol, 2024);
    REQUIRE(res.status == RealizeStatus::Realized);
    CHECK(res.geometry->residual < kTol.residual);
    CHECK(res.geometry->separation > 10.0 * kTol.cluster);
    CHECK(extract_combinatorics(*res.geometry, kTol) == a);
  }
}

TEST_CASE("realize is deterministic for a fixed seed") {
  Arrangement a = zscan_test::load_fixture("transverse_apart_2_1.json");
  RealizationResult r1 = realize(a, 16, kTol, 5);
  RealizationResult r2 = realize(a, 16, kTol, 5);
  REQUIRE(r1.status == RealizeStatus::Realized);
  REQUIRE(r2.status == RealizeStatus::Realized);
  CHECK(r1.attempts == r2.attempts);
  CHECK(to_json(*r1.geometry).dump() == to_json(*r2.geometry).dump());
}

TEST_CASE("projective_transfer maps geometry consistently") {
  Arrangement a = zscan_test::load_fixture("transverse_shared_2_1.json");
  RealizationResult res = realize(a, 32, kTol, 3);
  REQUIRE(res.status == RealizeStatus::Realized);
  Matrix3cd m = sample_transform();
  RealizedArrangement h = projective_transfer(*res.geometry, m);
  CHECK(extract_combinatorics(h, kTol) == a);
  CHECK(h.residual == res.geometry->residual);

  RealizedArrangement back = projective_transfer(h, m.inverse());
  REQUIRE(back.lines.size() == res.geometry->lines.size());
  for (std::size_t i = 0; i < back.lines.size(); ++i) {
    CHECK(projective_distance(back.lines[i], res.geometry->lines[i]) < 1e-10);
  }
}

TEST_CASE("projective_transfer rejects singular matrices") {
  Arrangement a = zscan_test::load_fixture("tangent_line_1_1.json");
  RealizationResult res = realize(a, 16, kTol, 7);
  REQUIRE(res.status == RealizeStatus::Realized);
  Matrix3cd m = Matrix3cd::Zero();
  m(0, 0) = 1.0;
  m(1, 1) = 1.0;
  try {
    projective_transfer(*res.geometry, m);
    FAIL("singular transfer accepted");
  } catch (const RealizationError& e) {
    CHECK(e.code() == RealizationCode::SingularMatrix);
  }
}

TEST_CASE("projective_equivalent finds the witness for a transferred copy") {
  Arrangement a = zscan_test::sample_4_1();
  RealizationResult res = realize(a, 200, kTol, 41);
  REQUIRE(res.status == RealizeStatus::Realized);
  RealizedArrangement h = projective_transfer(*res.geometry, sample_transform());
  ProjectiveVerdict verdict = projective_equivalent(*res.geometry, h, kTol);
  CHECK(verdict.equivalent);
  CHECK(verdict.residual < kTol.projective);
  REQUIRE(verdict.witness.has_value());
  RealizedArrangement mapped = projective_transfer(*res.geometry, *verdict.witness);
  Arrangement via_witness = extract_combinatorics(mapped, kTol);
  CHECK(via_witness == a);
}

TEST_CASE("projective_equivalent stops at distinct combinatorics") {
  RealizationResult g1 =
      realize(zscan_test::load_fixture("two_tangents_2_1.json"), 32, kTol, 5);
  RealizationResult g2 = realize(
      zscan_test::load_fixture("transverse_apart_2_1.json"), 32, kTol, 5);
  REQUIRE(g1.status == RealizeStatus::Realized);
  REQUIRE(g2.status == RealizeStatus::Realized);
  ProjectiveVerdict verdict =
      projective_equivalent(*g1.geometry, *g2.geometry, kTol);
  CHECK_FALSE(verdict.equivalent);
  CHECK(verdict.detail == "combinatorial types differ");
}

TEST_CASE("too few points in general position is reported as such") {
  Arrangement a = zscan_test::load_fixture("tangent_line_1_1.json");
  RealizationResult res = realize(a, 16, kTol, 7);
  REQUIRE(res.status == RealizeStatus::Realized);
  try {
    projective_equivalent(*res.geometry, *res.geometry, kTol);
    FAIL("frame search with one point succeeded");
  } catch (const RealizationError& e) {
    CHECK(e.code() == RealizationCode::TooFewDistinguishedPoints);
  }
}

TEST_CASE("conic parameters follow the rational parameterization") {
  for (double t : {0.0, 1.0, -2.5, 0.3}) {
    Vector3cd p(2.0 * t, 1.0 - t * t, 1.0 + t * t);
    ConicParameter q = conic_parameter(p);
    CHECK(std::abs(q.a / q.b - cd(t, 0)) < 1e-14);
  }
  // (0,-1,1) sits at infinity; only the second chart is defined there.
  ConicParameter inf = conic_parameter(Vector3cd(0, -1, 1));
  CHECK(std::abs(inf.b) < 1e-15);
  CHECK(std::abs(inf.a) > 0.0);
}

TEST_CASE("cross-ratio of the standard quadruple") {
  auto at = [](cd a, cd b) { return ConicParameter{a, b}; };
  cd value = cross_ratio(at(0, 1), at(1, 1), at(1, 0), at(5, 1));
  CHECK(std::abs(value - cd(0.8, 0)) < 1e-15);
}

TEST_CASE("orbit distance identifies the six equivalent cross-ratios") {
  cd lambda(0.37, 0.22);
  for (cd image : {lambda, cd(1, 0) / lambda, cd(1, 0) - lambda,
                   cd(1, 0) / (cd(1, 0) - lambda), lambda / (lambda - cd(1, 0)),
                   (lambda - cd(1, 0)) / lambda}) {
    CHECK(cross_ratio_orbit_distance(image, lambda) < 1e-15);
  }
  CHECK(cross_ratio_orbit_distance(cd(0.37, 0.22), cd(5.0, 3.0)) > 0.1);
}

TEST_CASE("realized geometry survives a JSON roundtrip") {
  Arrangement a = zscan_test::load_fixture("transverse_shared_2_1.json");
  RealizationResult res = realize(a, 32, kTol, 13);
  REQUIRE(res.status == RealizeStatus::Realized);
  nlohmann::json j = to_json(*res.geometry);
  RealizedArrangement back = realized_from_json(j);
  CHECK(to_json(back).dump() == j.dump());
  CHECK(extract_combinatorics(back, kTol) == a);
}

TEST_CASE("tolerances must be positive") {
  Tolerances bad;
  bad.cluster = 0.0;
  try {
    bad.check();
    FAIL("zero tolerance accepted");
  } catch (const RealizationError& e) {
    CHECK(e.code() == RealizationCode::InvalidTolerance);
  }
}
