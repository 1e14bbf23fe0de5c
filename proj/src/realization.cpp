#include "zscan/realization.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>

#include "zscan/equivalence.hpp"
#include "zscan/lm.hpp"

namespace zscan {

using cd = std::complex<double>;
using Eigen::Matrix3cd;
using Eigen::Vector3cd;

const char* to_string(RealizationCode code) {
  switch (code) {
    case RealizationCode::InvalidTolerance: return "InvalidTolerance";
    case RealizationCode::DegenerateInput: return "DegenerateInput";
    case RealizationCode::ClusterAmbiguity: return "ClusterAmbiguity";
    case RealizationCode::SingularMatrix: return "SingularMatrix";
    case RealizationCode::TooFewDistinguishedPoints:
      return "TooFewDistinguishedPoints";
  }
  return "Unknown";
}

RealizationError::RealizationError(RealizationCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code) {}

void Tolerances::check() const {
  if (!(residual > 0) || !(cluster > 0) || !(tangency > 0) || !(projective > 0)) {
    throw RealizationError(RealizationCode::InvalidTolerance,
                           "tolerances must be positive");
  }
}

Eigen::Matrix3cd reference_conic() {
  Matrix3cd q = Matrix3cd::Zero();
  q(0, 0) = 1.0;
  q(1, 1) = 1.0;
  q(2, 2) = -1.0;
  return q;
}

namespace {

// Dot product without conjugation (the bilinear pairing of projective
// geometry, not the Hermitian one).
cd cdot(const Vector3cd& u, const Vector3cd& v) {
  return u(0) * v(0) + u(1) * v(1) + u(2) * v(2);
}

Vector3cd ccross(const Vector3cd& u, const Vector3cd& v) {
  return Vector3cd(u(1) * v(2) - u(2) * v(1), u(2) * v(0) - u(0) * v(2),
                   u(0) * v(1) - u(1) * v(0));
}

int argmax_modulus(const Vector3cd& v) {
  int best = 0;
  for (int i = 1; i < 3; ++i) {
    if (std::abs(v(i)) > std::abs(v(best))) best = i;
  }
  return best;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t k) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (k + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Box-Muller on raw engine output, so draws do not depend on library
// distribution internals.
struct GaussianSource {
  std::mt19937_64 rng;
  explicit GaussianSource(std::uint64_t seed) : rng(seed) {}

  double uniform() { return ((rng() >> 11) + 0.5) * 0x1.0p-53; }

  cd complex_gaussian() {
    double u1 = uniform(), u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    return {r * std::cos(2.0 * M_PI * u2), r * std::sin(2.0 * M_PI * u2)};
  }

  Vector3cd vector() {
    return Vector3cd(complex_gaussian(), complex_gaussian(), complex_gaussian());
  }
};

}  // namespace

Vector3cd normalize_projective(const Vector3cd& v) {
  int pivot = argmax_modulus(v);
  if (std::abs(v(pivot)) == 0.0) return v;
  Vector3cd w = v / v(pivot);
  return w / w.norm();
}

Matrix3cd normalize_conic_matrix(const Matrix3cd& q) {
  Matrix3cd s = 0.5 * (q + q.transpose());
  int bi = 0, bj = 0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (std::abs(s(i, j)) > std::abs(s(bi, bj))) {
        bi = i;
        bj = j;
      }
    }
  }
  if (std::abs(s(bi, bj)) == 0.0) return s;
  s /= s(bi, bj);
  return s / s.norm();
}

double projective_distance(const Vector3cd& u, const Vector3cd& v) {
  double nu = u.norm(), nv = v.norm();
  if (nu == 0.0 || nv == 0.0) return 0.0;
  // |u x v| = |u||v| sin(theta) holds over C with the bilinear cross
  // product, and unlike 1 - cos^2 it stays exact near zero.
  return u.cross(v).norm() / (nu * nv);
}

// ---------------------------------------------------------------------------
// realize: residual system and random-start search
// ---------------------------------------------------------------------------

namespace {

const Vector3cd kPins[3] = {Vector3cd(0, 1, 1), Vector3cd(1, 0, 1),
                            Vector3cd(0, -1, 1)};

struct SolveSystem {
  const Arrangement* arr = nullptr;
  int n = 0;
  std::vector<int> pin;      // per point: 0..2, or -1 when unknown
  std::vector<int> ordinal;  // per point: unknown ordinal, or -1 when pinned
  int unknown_points = 0;
  std::vector<char> line_tangent;  // 1-based flags
  int complex_unknowns = 0;

  // Per-attempt gauge covectors.
  std::vector<Vector3cd> line_gauge;
  std::vector<Vector3cd> point_gauge;
};

SolveSystem build_system(const Arrangement& a) {
  SolveSystem sys;
  sys.arr = &a;
  sys.n = a.line_count();
  sys.pin.assign(a.points().size(), -1);
  sys.ordinal.assign(a.points().size(), -1);
  sys.line_tangent.assign(sys.n + 1, 0);

  // The conic's three-parameter stabilizer is pinned by fixing up to three
  // conic points of the solution; three points of a smooth conic are never
  // collinear, so the pins are always consistent.
  int pinned = 0;
  for (PointIndex i = 0; i < a.points().size(); ++i) {
    if (pinned < 3 && a.points()[i].on_conic) {
      sys.pin[i] = pinned++;
    } else {
      sys.ordinal[i] = sys.unknown_points++;
    }
  }
  for (const auto& p : a.points()) {
    if (p.tangent_line) sys.line_tangent[*p.tangent_line] = 1;
  }
  sys.complex_unknowns = 3 * sys.n + 3 * sys.unknown_points;
  return sys;
}

// Complex unknown slots: line l occupies [3(l-1), 3l), unknown point k
// occupies [3n + 3k, 3n + 3k + 3). Real vector packs re/im per slot.
Vector3cd read_triple(const Eigen::VectorXd& x, int cslot) {
  return Vector3cd(cd(x(2 * cslot), x(2 * cslot + 1)),
                   cd(x(2 * cslot + 2), x(2 * cslot + 3)),
                   cd(x(2 * cslot + 4), x(2 * cslot + 5)));
}

struct RowWriter {
  Eigen::VectorXd* r;
  Eigen::MatrixXd* jac;
  int row = 0;  // complex row index

  void value(cd f) {
    (*r)(2 * row) = f.real();
    (*r)(2 * row + 1) = f.imag();
  }
  // Derivative of a holomorphic residual with respect to complex unknown
  // `cslot`, expanded into the 2x2 real block.
  void deriv(int cslot, cd d) {
    (*jac)(2 * row, 2 * cslot) = d.real();
    (*jac)(2 * row, 2 * cslot + 1) = -d.imag();
    (*jac)(2 * row + 1, 2 * cslot) = d.imag();
    (*jac)(2 * row + 1, 2 * cslot + 1) = d.real();
  }
  void next() { ++row; }
};

int count_complex_rows(const SolveSystem& sys) {
  const auto& pts = sys.arr->points();
  int rows = 0;
  for (PointIndex i = 0; i < pts.size(); ++i) {
    rows += static_cast<int>(pts[i].lines.size());
    if (pts[i].on_conic && sys.pin[i] < 0) ++rows;
  }
  for (LineId l = 1; l <= sys.n; ++l) {
    if (sys.line_tangent[l]) ++rows;
  }
  rows += sys.n + sys.unknown_points;
  return rows;
}

void eval_system(const SolveSystem& sys, const Eigen::VectorXd& x,
                 Eigen::VectorXd& r, Eigen::MatrixXd& jac) {
  const Matrix3cd q = reference_conic();  // equals its own inverse
  const auto& pts = sys.arr->points();
  const int m = count_complex_rows(sys);
  r.setZero(2 * m);
  jac.setZero(2 * m, x.size());
  RowWriter w{&r, &jac, 0};

  auto line_slot = [&](LineId l) { return 3 * (l - 1); };
  auto point_slot = [&](PointIndex i) { return 3 * sys.n + 3 * sys.ordinal[i]; };
  auto point_value = [&](PointIndex i) {
    return sys.pin[i] >= 0 ? kPins[sys.pin[i]] : read_triple(x, point_slot(i));
  };

  for (PointIndex i = 0; i < pts.size(); ++i) {
    Vector3cd xp = point_value(i);
    for (LineId l : pts[i].lines) {
      Vector3cd lv = read_triple(x, line_slot(l));
      w.value(cdot(lv, xp));
      for (int k = 0; k < 3; ++k) w.deriv(line_slot(l) + k, xp(k));
      if (sys.pin[i] < 0) {
        for (int k = 0; k < 3; ++k) w.deriv(point_slot(i) + k, lv(k));
      }
      w.next();
    }
    if (pts[i].on_conic && sys.pin[i] < 0) {
      w.value(cdot(xp, q * xp));
      Vector3cd d = 2.0 * (q * xp);
      for (int k = 0; k < 3; ++k) w.deriv(point_slot(i) + k, d(k));
      w.next();
    }
  }
  for (LineId l = 1; l <= sys.n; ++l) {
    if (!sys.line_tangent[l]) continue;
    Vector3cd lv = read_triple(x, line_slot(l));
    w.value(cdot(lv, q * lv));
    Vector3cd d = 2.0 * (q * lv);
    for (int k = 0; k < 3; ++k) w.deriv(line_slot(l) + k, d(k));
    w.next();
  }
  for (LineId l = 1; l <= sys.n; ++l) {
    Vector3cd lv = read_triple(x, line_slot(l));
    const Vector3cd& gv = sys.line_gauge[l - 1];
    w.value(cdot(gv, lv) - 1.0);
    for (int k = 0; k < 3; ++k) w.deriv(line_slot(l) + k, gv(k));
    w.next();
  }
  for (PointIndex i = 0; i < pts.size(); ++i) {
    if (sys.pin[i] >= 0) continue;
    Vector3cd xp = read_triple(x, point_slot(i));
    const Vector3cd& hv = sys.point_gauge[sys.ordinal[i]];
    w.value(cdot(hv, xp) - 1.0);
    for (int k = 0; k < 3; ++k) w.deriv(point_slot(i) + k, hv(k));
    w.next();
  }
}

// Scale-free residual of a solved attempt: all geometric rows evaluated on
// unit-normalized vectors (gauge rows excluded, they are solver artifacts).
double geometric_residual(const SolveSystem& sys,
                          const std::vector<Vector3cd>& lines,
                          const std::vector<Vector3cd>& points) {
  const Matrix3cd q = reference_conic();
  double sum = 0.0;
  const auto& pts = sys.arr->points();
  for (PointIndex i = 0; i < pts.size(); ++i) {
    Vector3cd xp = points[i].normalized();
    for (LineId l : pts[i].lines) {
      sum += std::norm(cdot(lines[l - 1].normalized(), xp));
    }
    if (pts[i].on_conic) sum += std::norm(cdot(xp, q * xp));
  }
  for (LineId l = 1; l <= sys.n; ++l) {
    if (!sys.line_tangent[l]) continue;
    Vector3cd lv = lines[l - 1].normalized();
    sum += std::norm(cdot(lv, q * lv));
  }
  return std::sqrt(sum);
}

}  // namespace

RealizationResult realize(const Arrangement& a, int budget, const Tolerances& tol,
                          std::uint64_t seed) {
  tol.check();
  if (a.line_count() == 0) {
    RealizedArrangement g;
    g.conic = reference_conic();
    g.residual = 0.0;
    return {RealizeStatus::Realized, std::move(g), 0};
  }

  SolveSystem sys = build_system(a);
  const int real_unknowns = 2 * sys.complex_unknowns;

  for (int attempt = 0; attempt < budget; ++attempt) {
    GaussianSource rnd(mix_seed(seed, attempt));
    sys.line_gauge.clear();
    sys.point_gauge.clear();
    for (int l = 0; l < sys.n; ++l) sys.line_gauge.push_back(rnd.vector());
    for (int k = 0; k < sys.unknown_points; ++k) {
      sys.point_gauge.push_back(rnd.vector());
    }

    Eigen::VectorXd x0(real_unknowns);
    for (int i = 0; i < sys.complex_unknowns; ++i) {
      cd z = rnd.complex_gaussian();
      x0(2 * i) = z.real();
      x0(2 * i + 1) = z.imag();
    }

    auto fn = [&sys](const Eigen::VectorXd& x, Eigen::VectorXd& r,
                     Eigen::MatrixXd& jac) { eval_system(sys, x, r, jac); };
    LmOutcome out = lm_minimize(fn, std::move(x0));

    std::vector<Vector3cd> lines, points;
    for (LineId l = 1; l <= sys.n; ++l) {
      lines.push_back(read_triple(out.x, 3 * (l - 1)));
    }
    for (PointIndex i = 0; i < a.points().size(); ++i) {
      points.push_back(sys.pin[i] >= 0
                           ? kPins[sys.pin[i]]
                           : read_triple(out.x, 3 * sys.n + 3 * sys.ordinal[i]));
    }
    double res = geometric_residual(sys, lines, points);
    if (!(res < tol.residual)) continue;

    double sep = std::numeric_limits<double>::max();
    for (std::size_t i = 0; i < points.size(); ++i) {
      for (std::size_t j = i + 1; j < points.size(); ++j) {
        sep = std::min(sep, projective_distance(points[i], points[j]));
      }
    }
    if (sep <= 10.0 * tol.cluster) continue;

    RealizedArrangement g;
    g.conic = reference_conic();
    for (const auto& lv : lines) g.lines.push_back(normalize_projective(lv));
    g.residual = res;
    g.separation = sep;

    try {
      if (extract_combinatorics(g, tol) == a) {
        return {RealizeStatus::Realized, std::move(g), attempt + 1};
      }
    } catch (const RealizationError&) {
    } catch (const ValidationError&) {
    }
  }
  return {RealizeStatus::Unknown, std::nullopt, std::max(budget, 0)};
}

// ---------------------------------------------------------------------------
// extraction
// ---------------------------------------------------------------------------

namespace {

struct Candidate {
  Vector3cd pt;
  int kind;  // 0 line-line, 1 conic crossing, 2 tangency point
  int line_a;
  int line_b;  // kind 0 only
};

struct DisjointSet {
  std::vector<std::size_t> parent;
  explicit DisjointSet(std::size_t n) : parent(n) {
    for (std::size_t i = 0; i < n; ++i) parent[i] = i;
  }
  std::size_t find(std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  }
  void unite(std::size_t i, std::size_t j) { parent[find(i)] = find(j); }
};

}  // namespace

ExtractionDetail extract_detailed(const RealizedArrangement& g,
                                  const Tolerances& tol) {
  tol.check();
  const int n = static_cast<int>(g.lines.size());
  std::vector<Vector3cd> lines;
  for (const auto& lv : g.lines) {
    Vector3cd u = normalize_projective(lv);
    if (u.norm() == 0.0) {
      throw RealizationError(RealizationCode::DegenerateInput,
                             "zero line vector");
    }
    lines.push_back(u);
  }
  Matrix3cd q = normalize_conic_matrix(g.conic);
  if (std::abs(q.determinant()) < 1e-9) {
    throw RealizationError(RealizationCode::DegenerateInput,
                           "conic matrix is singular");
  }
  Matrix3cd qinv = q.inverse();
  double qinv_scale = qinv.norm();

  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      double d = projective_distance(lines[i], lines[j]);
      if (d < tol.cluster) {
        throw RealizationError(RealizationCode::DegenerateInput,
                               "lines " + std::to_string(i + 1) + " and " +
                                   std::to_string(j + 1) + " coincide");
      }
      if (d < 10.0 * tol.cluster) {
        throw RealizationError(RealizationCode::ClusterAmbiguity,
                               "line pair " + std::to_string(i + 1) + "," +
                                   std::to_string(j + 1) +
                                   " falls in the identity gray zone");
      }
    }
  }

  std::vector<Candidate> cands;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      cands.push_back(
          {normalize_projective(ccross(lines[i], lines[j])), 0, i, j});
    }
  }

  for (int i = 0; i < n; ++i) {
    const Vector3cd& lv = lines[i];
    double disc = std::abs(cdot(lv, qinv * lv)) / qinv_scale;
    if (disc < tol.tangency) {
      cands.push_back({normalize_projective(qinv * lv), 2, i, -1});
      continue;
    }
    if (disc < 10.0 * tol.tangency) {
      throw RealizationError(RealizationCode::ClusterAmbiguity,
                             "tangency discriminant of line " +
                                 std::to_string(i + 1) +
                                 " falls in the gray zone");
    }
    // Transverse: intersect the line with the conic. The cross products
    // with the standard basis span the line (rank two), so two of them give
    // a well-conditioned parameterization.
    std::array<Vector3cd, 3> span;
    for (int k = 0; k < 3; ++k) {
      Vector3cd e = Vector3cd::Zero();
      e(k) = 1.0;
      span[k] = ccross(lv, e);
    }
    int iu = 0;
    for (int k = 1; k < 3; ++k) {
      if (span[k].norm() > span[iu].norm()) iu = k;
    }
    Vector3cd u = span[iu].normalized();
    int iv = iu == 0 ? 1 : 0;
    for (int k = 0; k < 3; ++k) {
      if (k == iu) continue;
      if (projective_distance(u, span[k]) > projective_distance(u, span[iv])) {
        iv = k;
      }
    }
    Vector3cd v = span[iv].normalized();
    cd qa = cdot(u, q * u);
    cd qb = cdot(u, q * v);
    cd qc = cdot(v, q * v);
    cd disc_rt = std::sqrt(qb * qb - qa * qc);
    // Roots [s:t] of qa*s^2 + 2 qb*s*t + qc*t^2, each in the better of its
    // two equivalent homogeneous forms.
    auto root_point = [&](int sign) {
      cd s1 = -qb + static_cast<double>(sign) * disc_rt;
      Vector3cd first = s1 * u + qa * v;
      cd t2 = -qb - static_cast<double>(sign) * disc_rt;
      Vector3cd second = qc * u + t2 * v;
      return first.norm() >= second.norm() ? first : second;
    };
    cands.push_back({normalize_projective(root_point(+1)), 1, i, -1});
    cands.push_back({normalize_projective(root_point(-1)), 1, i, -1});
  }

  DisjointSet ds(cands.size());
  for (std::size_t i = 0; i < cands.size(); ++i) {
    for (std::size_t j = i + 1; j < cands.size(); ++j) {
      double d = projective_distance(cands[i].pt, cands[j].pt);
      if (d < tol.cluster) {
        ds.unite(i, j);
      } else if (d < 10.0 * tol.cluster) {
        throw RealizationError(RealizationCode::ClusterAmbiguity,
                               "candidate points fall in the identity gray zone");
      }
    }
  }

  std::vector<std::size_t> roots;
  std::vector<int> cluster_of(cands.size());
  for (std::size_t i = 0; i < cands.size(); ++i) {
    std::size_t r = ds.find(i);
    auto it = std::find(roots.begin(), roots.end(), r);
    if (it == roots.end()) {
      cluster_of[i] = static_cast<int>(roots.size());
      roots.push_back(r);
    } else {
      cluster_of[i] = static_cast<int>(it - roots.begin());
    }
  }

  struct Cluster {
    std::vector<LineId> lines;
    bool on_conic = false;
    std::optional<LineId> tangent;
    Vector3cd coord;
    bool has_coord = false;
  };
  std::vector<Cluster> clusters(roots.size());
  for (std::size_t i = 0; i < cands.size(); ++i) {
    Cluster& c = clusters[cluster_of[i]];
    if (!c.has_coord) {
      c.coord = cands[i].pt;
      c.has_coord = true;
    }
    auto add_line = [&c](LineId l) {
      if (std::find(c.lines.begin(), c.lines.end(), l) == c.lines.end()) {
        c.lines.push_back(l);
      }
    };
    switch (cands[i].kind) {
      case 0:
        add_line(cands[i].line_a + 1);
        add_line(cands[i].line_b + 1);
        break;
      case 1:
        add_line(cands[i].line_a + 1);
        c.on_conic = true;
        break;
      case 2:
        add_line(cands[i].line_a + 1);
        c.on_conic = true;
        if (c.tangent && *c.tangent != cands[i].line_a + 1) {
          throw ValidationError(ValidationCode::TangentCollision,
                                "two tangent lines meet the conic at one point");
        }
        c.tangent = cands[i].line_a + 1;
        break;
    }
  }

  std::vector<std::pair<PointRecord, Vector3cd>> recs;
  for (auto& c : clusters) {
    std::sort(c.lines.begin(), c.lines.end());
    recs.push_back({PointRecord{c.lines, c.on_conic, c.tangent}, c.coord});
  }
  std::stable_sort(recs.begin(), recs.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });

  std::vector<PointRecord> pts;
  std::vector<Vector3cd> coords;
  for (auto& [rec, coord] : recs) {
    pts.push_back(rec);
    coords.push_back(coord);
  }
  return {validate(n, std::move(pts)), std::move(coords)};
}

Arrangement extract_combinatorics(const RealizedArrangement& g,
                                  const Tolerances& tol) {
  return extract_detailed(g, tol).arrangement;
}

// ---------------------------------------------------------------------------
// projective action and equivalence search
// ---------------------------------------------------------------------------

RealizedArrangement projective_transfer(const RealizedArrangement& g,
                                        const Eigen::Matrix3cd& m) {
  Eigen::JacobiSVD<Matrix3cd> svd(m);
  double smax = svd.singularValues()(0);
  double smin = svd.singularValues()(2);
  if (!(smax > 0) || smin <= 1e-12 * smax) {
    throw RealizationError(RealizationCode::SingularMatrix,
                           "transfer matrix is singular within tolerance");
  }
  Matrix3cd minv = m.inverse();
  RealizedArrangement out;
  out.conic = normalize_conic_matrix(minv.transpose() * g.conic * minv);
  for (const auto& lv : g.lines) {
    out.lines.push_back(normalize_projective(minv.transpose() * lv));
  }
  out.residual = g.residual;
  out.separation = g.separation;
  return out;
}

namespace {

Matrix3cd normalize_matrix_scale(const Matrix3cd& m) {
  int bi = 0, bj = 0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (std::abs(m(i, j)) > std::abs(m(bi, bj))) {
        bi = i;
        bj = j;
      }
    }
  }
  if (std::abs(m(bi, bj)) == 0.0) return m;
  Matrix3cd s = m / m(bi, bj);
  return s / s.norm();
}

// Matrix sending the standard projective frame e1,e2,e3,e1+e2+e3 to the
// four given points; the points must be in general position.
std::optional<Matrix3cd> frame_matrix(const Vector3cd& p1, const Vector3cd& p2,
                                      const Vector3cd& p3, const Vector3cd& p4) {
  Matrix3cd a;
  a.col(0) = p1;
  a.col(1) = p2;
  a.col(2) = p3;
  Eigen::FullPivLU<Matrix3cd> lu(a);
  if (!lu.isInvertible()) return std::nullopt;
  Vector3cd c = lu.solve(p4);
  for (int i = 0; i < 3; ++i) {
    if (std::abs(c(i)) < 1e-10) return std::nullopt;
  }
  return a * c.asDiagonal();
}

bool general_position(const Vector3cd& p1, const Vector3cd& p2,
                      const Vector3cd& p3, const Vector3cd& p4) {
  const double eps = 1e-6;  // unit vectors
  Matrix3cd m;
  auto det3 = [&m](const Vector3cd& a, const Vector3cd& b, const Vector3cd& c) {
    m.col(0) = a;
    m.col(1) = b;
    m.col(2) = c;
    return std::abs(m.determinant());
  };
  return det3(p1, p2, p3) > eps && det3(p1, p2, p4) > eps &&
         det3(p1, p3, p4) > eps && det3(p2, p3, p4) > eps;
}

// Largest deviation of M from carrying g1 exactly onto g2: conic congruence
// proportionality plus a line-to-line matching.
double witness_residual(const Matrix3cd& m, const RealizedArrangement& g1,
                        const RealizedArrangement& g2) {
  Eigen::FullPivLU<Matrix3cd> lu(m);
  if (!lu.isInvertible()) return std::numeric_limits<double>::max();
  Matrix3cd minv = lu.inverse();

  Matrix3cd q1m = minv.transpose() * normalize_conic_matrix(g1.conic) * minv;
  Matrix3cd q2 = normalize_conic_matrix(g2.conic);
  cd mu = (q2.conjugate().cwiseProduct(q1m)).sum() / q2.squaredNorm();
  double res = (q1m - mu * q2).norm() / q1m.norm();

  std::vector<bool> taken(g2.lines.size(), false);
  for (const auto& lv : g1.lines) {
    Vector3cd mapped = normalize_projective(minv.transpose() * lv);
    double best = std::numeric_limits<double>::max();
    int best_j = -1;
    for (std::size_t j = 0; j < g2.lines.size(); ++j) {
      if (taken[j]) continue;
      double d = projective_distance(mapped, g2.lines[j]);
      if (d < best) {
        best = d;
        best_j = static_cast<int>(j);
      }
    }
    if (best_j < 0) return std::numeric_limits<double>::max();
    taken[best_j] = true;
    res = std::max(res, best);
  }
  return res;
}

}  // namespace

ProjectiveVerdict projective_equivalent(const RealizedArrangement& g1,
                                        const RealizedArrangement& g2,
                                        const Tolerances& tol) {
  tol.check();
  ExtractionDetail d1 = extract_detailed(g1, tol);
  ExtractionDetail d2 = extract_detailed(g2, tol);
  if (canonical_key(d1.arrangement) != canonical_key(d2.arrangement)) {
    return {false, std::nullopt, 0.0, "combinatorial types differ"};
  }

  auto distinguished = [](const ExtractionDetail& d) {
    std::vector<PointIndex> idx;
    for (PointIndex i = 0; i < d.arrangement.points().size(); ++i) {
      const PointRecord& p = d.arrangement.points()[i];
      if (component_count(p) >= 3 || p.tangent_line) idx.push_back(i);
    }
    return idx;
  };
  auto all_points = [](const ExtractionDetail& d) {
    std::vector<PointIndex> idx(d.arrangement.points().size());
    for (PointIndex i = 0; i < idx.size(); ++i) idx[i] = i;
    return idx;
  };

  // First ascending 4-tuple of candidate points in general position.
  auto first_tuple = [&](const ExtractionDetail& d,
                         const std::vector<PointIndex>& list)
      -> std::optional<std::array<PointIndex, 4>> {
    std::size_t k = list.size();
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = a + 1; b < k; ++b) {
        for (std::size_t c = b + 1; c < k; ++c) {
          for (std::size_t e = c + 1; e < k; ++e) {
            if (general_position(d.coords[list[a]], d.coords[list[b]],
                                 d.coords[list[c]], d.coords[list[e]])) {
              return std::array<PointIndex, 4>{list[a], list[b], list[c],
                                               list[e]};
            }
          }
        }
      }
    }
    return std::nullopt;
  };

  std::vector<PointIndex> list1 = distinguished(d1);
  std::vector<PointIndex> list2 = distinguished(d2);
  auto src = first_tuple(d1, list1);
  if (!src) {
    list1 = all_points(d1);
    list2 = all_points(d2);
    src = first_tuple(d1, list1);
    if (!src) {
      throw RealizationError(
          RealizationCode::TooFewDistinguishedPoints,
          "fewer than four points in general position are available");
    }
  }

  std::array<CharTriple, 4> src_char;
  std::array<Vector3cd, 4> src_pt;
  for (int k = 0; k < 4; ++k) {
    src_char[k] = characteristic(d1.arrangement, (*src)[k]);
    src_pt[k] = d1.coords[(*src)[k]];
  }
  auto ms = frame_matrix(src_pt[0], src_pt[1], src_pt[2], src_pt[3]);
  if (!ms) {
    throw RealizationError(RealizationCode::TooFewDistinguishedPoints,
                           "source frame is numerically degenerate");
  }
  Matrix3cd ms_inv = ms->inverse();

  // Ordered target tuples with matching characteristics.
  std::array<PointIndex, 4> tgt{};
  std::vector<bool> used(d2.arrangement.points().size(), false);
  ProjectiveVerdict verdict{false, std::nullopt, 0.0,
                            "no projective correspondence found within tolerance"};
  auto search = [&](auto&& self, int depth) -> bool {
    if (depth == 4) {
      if (!general_position(d2.coords[tgt[0]], d2.coords[tgt[1]],
                            d2.coords[tgt[2]], d2.coords[tgt[3]])) {
        return false;
      }
      auto mt = frame_matrix(d2.coords[tgt[0]], d2.coords[tgt[1]],
                             d2.coords[tgt[2]], d2.coords[tgt[3]]);
      if (!mt) return false;
      Matrix3cd m = *mt * ms_inv;
      double res = witness_residual(m, g1, g2);
      if (res < tol.projective) {
        verdict = {true, normalize_matrix_scale(m), res, "witness found"};
        return true;
      }
      return false;
    }
    for (PointIndex j : list2) {
      if (used[j]) continue;
      if (characteristic(d2.arrangement, j) != src_char[depth]) continue;
      used[j] = true;
      tgt[depth] = j;
      if (self(self, depth + 1)) return true;
      used[j] = false;
    }
    return false;
  };
  search(search, 0);
  return verdict;
}

// ---------------------------------------------------------------------------
// conic parameters and cross-ratios
// ---------------------------------------------------------------------------

ConicParameter conic_parameter(const Vector3cd& point) {
  // On x^2+y^2-z^2 = 0 the charts [x : y+z] and [z-y : x] agree projectively
  // wherever both are defined; pick the better conditioned one.
  cd x = point(0), y = point(1), z = point(2);
  cd a1 = x, b1 = y + z;
  cd a2 = z - y, b2 = x;
  double n1 = std::abs(a1) + std::abs(b1);
  double n2 = std::abs(a2) + std::abs(b2);
  return n1 >= n2 ? ConicParameter{a1, b1} : ConicParameter{a2, b2};
}

std::complex<double> cross_ratio(const ConicParameter& q1, const ConicParameter& q2,
                                 const ConicParameter& q3, const ConicParameter& q4) {
  auto d = [](const ConicParameter& p, const ConicParameter& q) {
    return p.a * q.b - q.a * p.b;
  };
  return (d(q1, q3) * d(q2, q4)) / (d(q1, q4) * d(q2, q3));
}

double cross_ratio_orbit_distance(const std::complex<double>& r1,
                                  const std::complex<double>& r2) {
  const cd one(1.0, 0.0);
  std::vector<cd> images{r2, one / r2, one - r2, one / (one - r2),
                         r2 / (r2 - one), (r2 - one) / r2};
  double best = std::numeric_limits<double>::max();
  for (const cd& img : images) {
    if (!std::isfinite(img.real()) || !std::isfinite(img.imag())) continue;
    best = std::min(best, std::abs(r1 - img));
  }
  return best;
}

// ---------------------------------------------------------------------------
// serialization
// ---------------------------------------------------------------------------

namespace {

nlohmann::json complex_to_json(const cd& z) {
  return nlohmann::json::array({z.real(), z.imag()});
}

cd complex_from_json(const nlohmann::json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

}  // namespace

nlohmann::json to_json(const RealizedArrangement& g) {
  nlohmann::json conic = nlohmann::json::array();
  for (int i = 0; i < 3; ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 0; j < 3; ++j) row.push_back(complex_to_json(g.conic(i, j)));
    conic.push_back(std::move(row));
  }
  nlohmann::json lines = nlohmann::json::array();
  for (const auto& lv : g.lines) {
    nlohmann::json row = nlohmann::json::array();
    for (int k = 0; k < 3; ++k) row.push_back(complex_to_json(lv(k)));
    lines.push_back(std::move(row));
  }
  return nlohmann::json{{"conic", std::move(conic)},
                        {"lines", std::move(lines)},
                        {"residual", g.residual},
                        {"separation", g.separation}};
}

RealizedArrangement realized_from_json(const nlohmann::json& j) {
  RealizedArrangement g;
  const auto& conic = j.at("conic");
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 3; ++k) {
      g.conic(i, k) = complex_from_json(conic.at(i).at(k));
    }
  }
  for (const auto& row : j.at("lines")) {
    Vector3cd lv;
    for (int k = 0; k < 3; ++k) lv(k) = complex_from_json(row.at(k));
    g.lines.push_back(lv);
  }
  g.residual = j.at("residual").get<double>();
  g.separation = j.at("separation").get<double>();
  return g;
}

}  // namespace zscan
