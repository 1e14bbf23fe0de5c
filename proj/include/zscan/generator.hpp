#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "zscan/equivalence.hpp"
#include "zscan/model.hpp"

namespace zscan {

// One way of adding a new line: whether it is tangent to the conic, and
// which existing points (indices into the parent's normalized point list)
// it passes through. Points it is not routed through are met at fresh
// generic intersections.
struct ExtensionChoice {
  bool tangent = false;
  std::vector<PointIndex> through;  // strictly ascending

  friend auto operator<=>(const ExtensionChoice&, const ExtensionChoice&) = default;
};

struct Extension {
  ExtensionChoice choice;
  Arrangement result;
};

// Builds the arrangement obtained by adding line n+1 according to `choice`.
// Legality rules, enforced here:
//   - no two chosen points share an existing line;
//   - a tangent line passes through at most one conic point, which becomes
//     its tangency and must not already carry one;
//   - a transverse line passes through at most two conic points.
// Throws ValidationError (IndexOutOfRange / TangentConicCount) on violations.
Arrangement apply_extension(const Arrangement& a, const ExtensionChoice& choice);

// Every legal extension of `a`, one entry per distinct resulting
// arrangement (choices that produce identical normalized arrangements are
// collapsed, keeping the first in enumeration order).
std::vector<Extension> extensions(const Arrangement& a);

struct ClassEntry {
  CanonicalKey key;
  Arrangement representative;
  std::string parent_key;                // empty at level 0
  std::optional<ExtensionChoice> choice; // absent at level 0
};

struct ClassCatalog {
  int n = 0;
  std::vector<ClassEntry> classes;  // sorted by key
};

// All equivalence classes with exactly cat.n + 1 lines, each recording a
// parent whose extension reproduces its representative. Deterministic for
// any worker count: colliding candidates are merged by smallest
// (parent key, choice) and the result is sorted by key.
ClassCatalog next_level(const ClassCatalog& cat, int workers = 1);

// Catalogs for levels 0..n_max, starting from the conic-only arrangement.
std::vector<ClassCatalog> enumerate_classes(int n_max, int workers = 1);

// Independent oracle: enumerates raw point-record structures directly
// (partitions of line pairs into multi-points, then conic membership and
// tangency assignments) and dedups by canonical key. Exponential; throws
// BudgetExceeded when n exceeds `max_n`. Entries carry no provenance.
ClassCatalog brute_force_enumerate(int n, int max_n = 4);

nlohmann::json to_json(const ClassCatalog& cat);
ClassCatalog catalog_from_json(const nlohmann::json& j);

}  // namespace zscan
