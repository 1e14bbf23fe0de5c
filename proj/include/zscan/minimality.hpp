#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "zscan/generator.hpp"
#include "zscan/model.hpp"

namespace zscan {

// Deletes line `removed`, shifts higher labels down by one, drops point
// records left with fewer than two components, and renormalizes. A tangency
// point of the removed line keeps its other lines and stays on the conic as
// a transverse crossing.
Arrangement remove_line(const Arrangement& a, LineId removed);

// Same, plus the index mapping from a's points to the result; dropped
// points map to nullopt.
struct LineRemoval {
  Arrangement result;
  std::vector<std::optional<PointIndex>> point_map;
};

LineRemoval remove_line_mapped(const Arrangement& a, LineId removed);

// The three exclusion rules. Each shows that a class cannot contain a
// minimal Zariski pair; "not excluded" is always inconclusive, never a
// realizability or minimality proof.
enum class Lemma { L1, L2, L3 };

const char* to_string(Lemma lemma);

struct LemmaVerdict {
  Lemma lemma = Lemma::L1;
  bool excluded = false;
  std::optional<LineId> witness_line;      // present when excluded (unless n=0)
  std::vector<PointIndex> witness_points;  // indices into the input arrangement
  std::string narrative;
};

// L1: excluded when some line passes through no constraint (trivially
// excluded when no line can, i.e. n <= 1; the conic-only arrangement has no
// witness line to name).
LemmaVerdict lemma1_filter(const Arrangement& a);

// L2: excluded when some non-tangent line has exactly one constraint whose
// characteristic, evaluated after removing the line, is unique in the
// reduced arrangement. Tangent lines are skipped: their single constraint
// does not pin down the tangency direction.
LemmaVerdict lemma2_filter(const Arrangement& a);

// L3: excluded when some non-tangent line has exactly two constraints p, q
// and no other point pair of the reduced arrangement realizes the same
// unordered pair of characteristics. Tangent lines are reported as
// inconclusive.
LemmaVerdict lemma3_filter(const Arrangement& a);

struct ClassReportRow {
  std::string point;
  CharTriple characteristic;
  std::vector<LineId> lines;
  std::optional<LineId> tangent;
};

struct ClassReport {
  CanonicalKey key;
  std::vector<ClassReportRow> table;
  std::vector<std::string> constraint_names;
  WeakNumericalType weak_type;
  std::vector<LemmaVerdict> verdicts;  // L1, L2, L3
  bool excluded = false;               // any rule fired
};

struct CandidateReport {
  int n = 0;
  std::vector<ClassReport> classes;  // catalog order
  std::size_t surviving = 0;         // classes no rule excluded
};

ClassReport report_class(const CanonicalKey& key, const Arrangement& a);
CandidateReport candidate_report(const ClassCatalog& cat);

// Point table plus verdicts, in the layout used by `zscan explain`.
std::string render_text(const ClassReport& report);

nlohmann::json to_json(const LemmaVerdict& v);
nlohmann::json to_json(const ClassReport& report);
nlohmann::json to_json(const CandidateReport& report);

}  // namespace zscan
