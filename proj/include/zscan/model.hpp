#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace zscan {

// 1-based line label; valid labels are 1..n for the owning arrangement.
using LineId = int;

// Position of a point record in an arrangement's normalized point list.
using PointIndex = std::size_t;

// Per-point invariant triple: (tangency flag, conic-membership flag,
// number of non-tangent lines through the point).
struct CharTriple {
  int tangent = 0;
  int conic = 0;
  int lines = 0;

  friend auto operator<=>(const CharTriple&, const CharTriple&) = default;
};

// Renders "(1, 1, 1)", the notation used in reports.
std::string to_string(const CharTriple& c);

// One intersection point: the lines through it, whether it lies on the
// conic, and the designated tangent line if it is a tangency point.
// `lines` is kept sorted ascending without duplicates; the member order
// here doubles as the normalization sort key.
struct PointRecord {
  std::vector<LineId> lines;
  bool on_conic = false;
  std::optional<LineId> tangent_line;

  friend auto operator<=>(const PointRecord&, const PointRecord&) = default;
};

// Number of curve components through the point; the conic counts once.
int component_count(const PointRecord& p);

enum class ValidationCode {
  PairDuplicated,
  PairMissing,
  TangentConicCount,
  TangentNotOnConic,
  TangentCollision,
  IndexOutOfRange,
  TooFewComponents,
  NotAPermutation,
  UnknownPoint,
  BudgetExceeded,
};

const char* to_string(ValidationCode code);

class ValidationError : public std::runtime_error {
 public:
  ValidationError(ValidationCode code, const std::string& message);
  ValidationCode code() const { return code_; }

 private:
  ValidationCode code_;
};

// A validated combinatorial arrangement of n lines and one smooth conic.
// Instances are immutable, normalized, and always satisfy the pair-cover,
// conic-degree and tangency invariants; construct them through validate().
class Arrangement {
 public:
  int line_count() const { return n_; }
  const std::vector<PointRecord>& points() const { return points_; }
  const PointRecord& point(PointIndex i) const;

  friend bool operator==(const Arrangement&, const Arrangement&) = default;

 private:
  friend Arrangement validate(int, std::vector<PointRecord>);
  Arrangement(int n, std::vector<PointRecord> points);

  int n_ = 0;
  std::vector<PointRecord> points_;  // normalized order
};

// Checks every arrangement invariant and normalizes point order.
// Throws ValidationError on the first violation found. Checked invariants:
//   - every line id lies in 1..n, tangent designations are incident and
//     on the conic, every point has at least two components;
//   - every pair of lines meets at exactly one point (pair cover);
//   - a tangent line has exactly one conic point, a transverse line two.
Arrangement validate(int n_lines, std::vector<PointRecord> raw_points);

CharTriple characteristic(const Arrangement& a, PointIndex p);

// Indices of points lying on at least three components.
std::vector<PointIndex> constraints(const Arrangement& a);

// Relabeling-invariant summary of one line, used to prune equivalence
// searches: tangency flag, multiset of the characteristics of its points,
// and how many of those points are constraints.
struct LineProfile {
  bool is_tangent = false;
  std::vector<CharTriple> chars;  // sorted
  int constraint_count = 0;

  friend auto operator<=>(const LineProfile&, const LineProfile&) = default;
};

LineProfile line_profile(const Arrangement& a, LineId line);

// Display name like "P(1,2)" or "P(4)"; content-identical twins get prime
// marks ("P(4)'") in normalized order.
std::string point_name(const Arrangement& a, PointIndex p);

}  // namespace zscan
