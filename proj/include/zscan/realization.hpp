#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "zscan/equivalence.hpp"
#include "zscan/model.hpp"

namespace zscan {

enum class RealizationCode {
  InvalidTolerance,
  DegenerateInput,
  ClusterAmbiguity,
  SingularMatrix,
  TooFewDistinguishedPoints,
};

const char* to_string(RealizationCode code);

class RealizationError : public std::runtime_error {
 public:
  RealizationError(RealizationCode code, const std::string& message);
  RealizationCode code() const { return code_; }

 private:
  RealizationCode code_;
};

// All numeric thresholds in one place. Each tolerance comes with a
// mandatory empty gray zone: values between tol and 10*tol are rejected as
// ambiguous instead of being classified either way.
struct Tolerances {
  double residual = 1e-9;    // solver acceptance, 2-norm of the residual vector
  double cluster = 1e-6;     // point identity (projective distance)
  double tangency = 1e-8;    // normalized tangency discriminant
  double projective = 1e-6;  // witness-matrix acceptance

  void check() const;  // throws InvalidTolerance on non-positive entries
};

// Concrete complex projective geometry: a symmetric conic matrix and one
// coefficient vector per line. Vectors are unit-norm with their largest
// entry rotated to the positive real axis; realize() always produces the
// reference conic x^2 + y^2 - z^2.
struct RealizedArrangement {
  Eigen::Matrix3cd conic;
  std::vector<Eigen::Vector3cd> lines;
  double residual = 0.0;
  double separation = std::numeric_limits<double>::max();
};

Eigen::Matrix3cd reference_conic();

// Scale-phase normalization helpers (largest-modulus pivot made real
// positive, then unit norm).
Eigen::Vector3cd normalize_projective(const Eigen::Vector3cd& v);
Eigen::Matrix3cd normalize_conic_matrix(const Eigen::Matrix3cd& q);

// sin of the principal angle between projective points/lines; 0 iff
// proportional.
double projective_distance(const Eigen::Vector3cd& u, const Eigen::Vector3cd& v);

enum class RealizeStatus { Realized, Unknown };

struct RealizationResult {
  RealizeStatus status = RealizeStatus::Unknown;
  std::optional<RealizedArrangement> geometry;
  int attempts = 0;
};

// Random-start damped least-squares search for a geometry whose extracted
// combinatorics equals `a`. Unknown is a search failure, never a
// non-realizability proof. Deterministic for a fixed (seed, budget).
RealizationResult realize(const Arrangement& a, int budget, const Tolerances& tol,
                          std::uint64_t seed);

// Reads the combinatorial arrangement back off concrete geometry: pairwise
// line meets, line-conic intersections with tangency detection, tolerance
// clustering. Throws DegenerateInput (proportional lines, singular conic)
// and ClusterAmbiguity (occupied gray zone).
Arrangement extract_combinatorics(const RealizedArrangement& g,
                                  const Tolerances& tol);

// extract_combinatorics plus the cluster coordinates, index-aligned with
// the arrangement's normalized points.
struct ExtractionDetail {
  Arrangement arrangement;
  std::vector<Eigen::Vector3cd> coords;
};

ExtractionDetail extract_detailed(const RealizedArrangement& g,
                                  const Tolerances& tol);

// Applies x -> Mx: lines map by the inverse transpose, the conic by
// congruence with the inverse. Throws SingularMatrix when M is not
// invertible within condition tolerance. residual/separation metadata is
// carried over unchanged.
RealizedArrangement projective_transfer(const RealizedArrangement& g,
                                        const Eigen::Matrix3cd& m);

struct ProjectiveVerdict {
  bool equivalent = false;
  std::optional<Eigen::Matrix3cd> witness;  // normalized; maps g1 onto g2
  double residual = 0.0;
  std::string detail;
};

// One-sided projective equivalence test: enumerates correspondences of
// distinguished points (constraints and tangencies, falling back to all
// intersection points), solves for the matrix, and verifies it. A negative
// answer means no witness was found, not a proof of inequivalence. Throws
// TooFewDistinguishedPoints when fewer than four points in general position
// are available on either side.
ProjectiveVerdict projective_equivalent(const RealizedArrangement& g1,
                                        const RealizedArrangement& g2,
                                        const Tolerances& tol);

// Parameter of a point on the reference conic as a projective point [a:b]
// of the line; defined up to the conic's automorphisms, which act by
// Moebius transformations.
struct ConicParameter {
  std::complex<double> a, b;
};

ConicParameter conic_parameter(const Eigen::Vector3cd& point);

// Cross-ratio (q1,q2;q3,q4) = (q1-q3)(q2-q4) / ((q1-q4)(q2-q3)), computed
// homogeneously.
std::complex<double> cross_ratio(const ConicParameter& q1, const ConicParameter& q2,
                                 const ConicParameter& q3, const ConicParameter& q4);

// Distance between unordered cross-ratios: minimum over the six values the
// cross-ratio can take under reordering.
double cross_ratio_orbit_distance(const std::complex<double>& r1,
                                  const std::complex<double>& r2);

nlohmann::json to_json(const RealizedArrangement& g);
RealizedArrangement realized_from_json(const nlohmann::json& j);

}  // namespace zscan
