#include "zscan/model.hpp"

#include <algorithm>
#include <cassert>
#include <map>
#include <sstream>

namespace zscan {

std::string to_string(const CharTriple& c) {
  std::ostringstream os;
  os << '(' << c.tangent << ", " << c.conic << ", " << c.lines << ')';
  return os.str();
}

int component_count(const PointRecord& p) {
  return static_cast<int>(p.lines.size()) + (p.on_conic ? 1 : 0);
}

const char* to_string(ValidationCode code) {
  switch (code) {
    case ValidationCode::PairDuplicated: return "PairDuplicated";
    case ValidationCode::PairMissing: return "PairMissing";
    case ValidationCode::TangentConicCount: return "TangentConicCount";
    case ValidationCode::TangentNotOnConic: return "TangentNotOnConic";
    case ValidationCode::TangentCollision: return "TangentCollision";
    case ValidationCode::IndexOutOfRange: return "IndexOutOfRange";
    case ValidationCode::TooFewComponents: return "TooFewComponents";
    case ValidationCode::NotAPermutation: return "NotAPermutation";
    case ValidationCode::UnknownPoint: return "UnknownPoint";
    case ValidationCode::BudgetExceeded: return "BudgetExceeded";
  }
  return "Unknown";
}

ValidationError::ValidationError(ValidationCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

Arrangement::Arrangement(int n, std::vector<PointRecord> points)
    : n_(n), points_(std::move(points)) {}

const PointRecord& Arrangement::point(PointIndex i) const {
  if (i >= points_.size()) {
    throw ValidationError(ValidationCode::UnknownPoint,
                          "point index " + std::to_string(i) + " out of range");
  }
  return points_[i];
}

Arrangement validate(int n_lines, std::vector<PointRecord> pts) {
  if (n_lines < 0) {
    throw ValidationError(ValidationCode::IndexOutOfRange,
                          "line count must be non-negative");
  }

  for (auto& p : pts) {
    std::sort(p.lines.begin(), p.lines.end());
    for (std::size_t k = 0; k + 1 < p.lines.size(); ++k) {
      if (p.lines[k] == p.lines[k + 1]) {
        throw ValidationError(ValidationCode::PairDuplicated,
                              "line " + std::to_string(p.lines[k]) +
                                  " listed twice at one point");
      }
    }
    for (LineId l : p.lines) {
      if (l < 1 || l > n_lines) {
        throw ValidationError(ValidationCode::IndexOutOfRange,
                              "line id " + std::to_string(l) +
                                  " outside 1.." + std::to_string(n_lines));
      }
    }
    if (p.tangent_line) {
      if (std::find(p.lines.begin(), p.lines.end(), *p.tangent_line) ==
          p.lines.end()) {
        throw ValidationError(ValidationCode::IndexOutOfRange,
                              "tangent line " + std::to_string(*p.tangent_line) +
                                  " is not incident to its point");
      }
      if (!p.on_conic) {
        throw ValidationError(ValidationCode::TangentNotOnConic,
                              "tangency designated at a point off the conic");
      }
    }
    if (component_count(p) < 2) {
      throw ValidationError(ValidationCode::TooFewComponents,
                            "a point must lie on at least two components");
    }
  }

  // Pair cover: every pair of lines meets at exactly one point.
  std::map<std::pair<LineId, LineId>, int> pair_count;
  for (const auto& p : pts) {
    for (std::size_t i = 0; i < p.lines.size(); ++i) {
      for (std::size_t j = i + 1; j < p.lines.size(); ++j) {
        auto key = std::make_pair(p.lines[i], p.lines[j]);
        if (++pair_count[key] > 1) {
          throw ValidationError(ValidationCode::PairDuplicated,
                                "lines " + std::to_string(key.first) + " and " +
                                    std::to_string(key.second) +
                                    " meet at more than one point");
        }
      }
    }
  }
  for (LineId i = 1; i <= n_lines; ++i) {
    for (LineId j = i + 1; j <= n_lines; ++j) {
      if (!pair_count.count({i, j})) {
        throw ValidationError(ValidationCode::PairMissing,
                              "lines " + std::to_string(i) + " and " +
                                  std::to_string(j) + " never meet");
      }
    }
  }

  // Conic degree: tangent lines have one conic point, transverse lines two.
  std::vector<int> designated(n_lines + 1, 0);
  std::vector<int> conic_hits(n_lines + 1, 0);
  for (const auto& p : pts) {
    if (p.tangent_line) ++designated[*p.tangent_line];
    if (p.on_conic) {
      for (LineId l : p.lines) ++conic_hits[l];
    }
  }
  for (LineId l = 1; l <= n_lines; ++l) {
    if (designated[l] > 0) {
      if (designated[l] > 1 || conic_hits[l] != 1) {
        throw ValidationError(ValidationCode::TangentConicCount,
                              "tangent line " + std::to_string(l) + " meets the conic at " +
                                  std::to_string(conic_hits[l]) + " points (expected 1)");
      }
    } else if (conic_hits[l] != 2) {
      throw ValidationError(ValidationCode::TangentConicCount,
                            "transverse line " + std::to_string(l) + " meets the conic at " +
                                std::to_string(conic_hits[l]) + " points (expected 2)");
    }
  }

  // Counting identities follow from the checks above; keep them as a guard
  // against regressions in the checks themselves.
#ifndef NDEBUG
  {
    long pair_total = 0;
    long conic_total = 0;
    int tangent_total = 0;
    for (const auto& p : pts) {
      long k = static_cast<long>(p.lines.size());
      pair_total += k * (k - 1) / 2;
      if (p.on_conic) conic_total += k;
      if (p.tangent_line) ++tangent_total;
    }
    assert(pair_total == static_cast<long>(n_lines) * (n_lines - 1) / 2);
    assert(conic_total == tangent_total + 2L * (n_lines - tangent_total));
  }
#endif

  std::sort(pts.begin(), pts.end());
  return Arrangement(n_lines, std::move(pts));
}

CharTriple characteristic(const Arrangement& a, PointIndex i) {
  const PointRecord& p = a.point(i);
  CharTriple c;
  c.tangent = p.tangent_line ? 1 : 0;
  c.conic = p.on_conic ? 1 : 0;
  c.lines = static_cast<int>(p.lines.size()) - c.tangent;
  return c;
}

std::vector<PointIndex> constraints(const Arrangement& a) {
  std::vector<PointIndex> out;
  for (PointIndex i = 0; i < a.points().size(); ++i) {
    if (component_count(a.points()[i]) >= 3) out.push_back(i);
  }
  return out;
}

LineProfile line_profile(const Arrangement& a, LineId line) {
  if (line < 1 || line > a.line_count()) {
    throw ValidationError(ValidationCode::IndexOutOfRange,
                          "line id " + std::to_string(line) + " outside 1.." +
                              std::to_string(a.line_count()));
  }
  LineProfile prof;
  for (PointIndex i = 0; i < a.points().size(); ++i) {
    const PointRecord& p = a.points()[i];
    if (std::find(p.lines.begin(), p.lines.end(), line) == p.lines.end()) continue;
    prof.chars.push_back(characteristic(a, i));
    if (component_count(p) >= 3) ++prof.constraint_count;
    if (p.tangent_line && *p.tangent_line == line) prof.is_tangent = true;
  }
  std::sort(prof.chars.begin(), prof.chars.end());
  return prof;
}

std::string point_name(const Arrangement& a, PointIndex i) {
  const PointRecord& p = a.point(i);
  std::string name = "P(";
  for (std::size_t k = 0; k < p.lines.size(); ++k) {
    if (k) name += ',';
    name += std::to_string(p.lines[k]);
  }
  name += ')';
  // Twins (content-identical records) are distinguished with prime marks.
  int prior = 0;
  for (PointIndex k = 0; k < i; ++k) {
    if (a.points()[k] == p) ++prior;
  }
  name.append(prior, '\'');
  return name;
}

}  // namespace zscan
