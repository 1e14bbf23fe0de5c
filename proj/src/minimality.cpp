#include "zscan/minimality.hpp"

#include <algorithm>
#include <sstream>

namespace zscan {

namespace {

std::string join_lines(const std::vector<LineId>& lines) {
  std::string s;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(lines[i]);
  }
  return s;
}

}  // namespace

LineRemoval remove_line_mapped(const Arrangement& a, LineId removed) {
  int n = a.line_count();
  if (removed < 1 || removed > n) {
    throw ValidationError(ValidationCode::IndexOutOfRange,
                          "line id " + std::to_string(removed) + " outside 1.." +
                              std::to_string(n));
  }

  // Reduced record for each surviving point, paired with its old index.
  std::vector<std::pair<PointRecord, PointIndex>> kept;
  for (PointIndex i = 0; i < a.points().size(); ++i) {
    PointRecord p = a.points()[i];
    PointRecord q;
    q.on_conic = p.on_conic;
    for (LineId l : p.lines) {
      if (l == removed) continue;
      q.lines.push_back(l > removed ? l - 1 : l);
    }
    if (p.tangent_line && *p.tangent_line != removed) {
      q.tangent_line = *p.tangent_line > removed ? *p.tangent_line - 1
                                                 : *p.tangent_line;
    }
    if (component_count(q) < 2) continue;
    kept.push_back({std::move(q), i});
  }
  std::sort(kept.begin(), kept.end());

  std::vector<PointRecord> recs;
  recs.reserve(kept.size());
  std::vector<std::optional<PointIndex>> point_map(a.points().size(),
                                                   std::nullopt);
  for (PointIndex j = 0; j < kept.size(); ++j) {
    recs.push_back(kept[j].first);
    point_map[kept[j].second] = j;
  }
  return LineRemoval{validate(n - 1, std::move(recs)), std::move(point_map)};
}

Arrangement remove_line(const Arrangement& a, LineId removed) {
  return remove_line_mapped(a, removed).result;
}

const char* to_string(Lemma lemma) {
  switch (lemma) {
    case Lemma::L1: return "L1";
    case Lemma::L2: return "L2";
    case Lemma::L3: return "L3";
  }
  return "?";
}

namespace {

int constraints_on_line(const Arrangement& a, LineId l,
                        std::vector<PointIndex>* where) {
  int count = 0;
  for (PointIndex i = 0; i < a.points().size(); ++i) {
    const PointRecord& p = a.points()[i];
    if (component_count(p) < 3) continue;
    if (std::find(p.lines.begin(), p.lines.end(), l) == p.lines.end()) continue;
    ++count;
    if (where) where->push_back(i);
  }
  return count;
}

bool is_tangent_line(const Arrangement& a, LineId l) {
  for (const auto& p : a.points()) {
    if (p.tangent_line && *p.tangent_line == l) return true;
  }
  return false;
}

}  // namespace

LemmaVerdict lemma1_filter(const Arrangement& a) {
  LemmaVerdict v;
  v.lemma = Lemma::L1;
  if (a.line_count() == 0) {
    v.excluded = true;
    v.narrative =
        "excluded trivially: the arrangement has no lines, so it cannot "
        "contain a minimal Zariski pair";
    return v;
  }
  for (LineId l = 1; l <= a.line_count(); ++l) {
    std::vector<PointIndex> where;
    if (constraints_on_line(a, l, &where) == 0) {
      v.excluded = true;
      v.witness_line = l;
      v.narrative = "excluded: L" + std::to_string(l) +
                    " passes through no constraint";
      return v;
    }
  }
  v.narrative = "not excluded: every line passes through at least one constraint";
  return v;
}

LemmaVerdict lemma2_filter(const Arrangement& a) {
  LemmaVerdict v;
  v.lemma = Lemma::L2;
  std::vector<LineId> skipped_tangents;
  for (LineId l = 1; l <= a.line_count(); ++l) {
    std::vector<PointIndex> where;
    if (constraints_on_line(a, l, &where) != 1) continue;
    if (is_tangent_line(a, l)) {
      // The single constraint of a tangent line does not determine which
      // direction the tangency takes, so the rule cannot fire.
      skipped_tangents.push_back(l);
      continue;
    }
    LineRemoval rem = remove_line_mapped(a, l);
    PointIndex image = *rem.point_map[where[0]];
    CharTriple c = characteristic(rem.result, image);
    int same = 0;
    for (PointIndex i = 0; i < rem.result.points().size(); ++i) {
      if (characteristic(rem.result, i) == c) ++same;
    }
    if (same == 1) {
      v.excluded = true;
      v.witness_line = l;
      v.witness_points = {where[0]};
      v.narrative = "excluded: L" + std::to_string(l) +
                    " passes through exactly one constraint " +
                    point_name(a, where[0]) + "; after removing L" +
                    std::to_string(l) + " its characteristic " + to_string(c) +
                    " is unique in the reduced arrangement";
      return v;
    }
  }
  v.narrative =
      "not excluded: no non-tangent line has a single constraint with a "
      "unique post-removal characteristic";
  if (!skipped_tangents.empty()) {
    v.narrative += "; tangent line";
    v.narrative += skipped_tangents.size() > 1 ? "s " : " ";
    for (std::size_t i = 0; i < skipped_tangents.size(); ++i) {
      if (i) v.narrative += ", ";
      v.narrative += "L" + std::to_string(skipped_tangents[i]);
    }
    v.narrative += " skipped (inconclusive for tangent lines)";
  }
  return v;
}

LemmaVerdict lemma3_filter(const Arrangement& a) {
  LemmaVerdict v;
  v.lemma = Lemma::L3;
  std::vector<LineId> skipped_tangents;
  for (LineId l = 1; l <= a.line_count(); ++l) {
    std::vector<PointIndex> where;
    if (constraints_on_line(a, l, &where) != 2) continue;
    if (is_tangent_line(a, l)) {
      skipped_tangents.push_back(l);
      continue;
    }
    LineRemoval rem = remove_line_mapped(a, l);
    PointIndex ip = *rem.point_map[where[0]];
    PointIndex iq = *rem.point_map[where[1]];
    CharTriple cp = characteristic(rem.result, ip);
    CharTriple cq = characteristic(rem.result, iq);
    auto target = std::minmax(cp, cq);
    bool other_pair = false;
    const auto& pts = rem.result.points();
    for (PointIndex i = 0; i < pts.size() && !other_pair; ++i) {
      for (PointIndex j = i + 1; j < pts.size(); ++j) {
        if (i == std::min(ip, iq) && j == std::max(ip, iq)) continue;
        auto pair = std::minmax(characteristic(rem.result, i),
                                characteristic(rem.result, j));
        if (pair == target) {
          other_pair = true;
          break;
        }
      }
    }
    if (!other_pair) {
      v.excluded = true;
      v.witness_line = l;
      v.witness_points = {where[0], where[1]};
      v.narrative = "excluded: L" + std::to_string(l) +
                    " passes through exactly two constraints " +
                    point_name(a, where[0]) + " and " + point_name(a, where[1]) +
                    "; after removing L" + std::to_string(l) +
                    " no other point pair realizes the characteristics " +
                    to_string(target.first) + ", " + to_string(target.second);
      return v;
    }
  }
  v.narrative =
      "not excluded: every non-tangent line with exactly two constraints "
      "leaves another point pair with the same characteristics (or none "
      "qualifies)";
  if (!skipped_tangents.empty()) {
    v.narrative += "; tangent line";
    v.narrative += skipped_tangents.size() > 1 ? "s " : " ";
    for (std::size_t i = 0; i < skipped_tangents.size(); ++i) {
      if (i) v.narrative += ", ";
      v.narrative += "L" + std::to_string(skipped_tangents[i]);
    }
    v.narrative += " inconclusive";
  }
  return v;
}

ClassReport report_class(const CanonicalKey& key, const Arrangement& a) {
  ClassReport rep;
  rep.key = key;
  for (PointIndex i = 0; i < a.points().size(); ++i) {
    const PointRecord& p = a.points()[i];
    rep.table.push_back(
        {point_name(a, i), characteristic(a, i), p.lines, p.tangent_line});
  }
  for (PointIndex i : constraints(a)) {
    rep.constraint_names.push_back(point_name(a, i));
  }
  rep.weak_type = weak_numerical_type(a);
  rep.verdicts = {lemma1_filter(a), lemma2_filter(a), lemma3_filter(a)};
  for (const auto& v : rep.verdicts) rep.excluded |= v.excluded;
  return rep;
}

CandidateReport candidate_report(const ClassCatalog& cat) {
  CandidateReport out;
  out.n = cat.n;
  for (const auto& entry : cat.classes) {
    out.classes.push_back(report_class(entry.key, entry.representative));
    if (!out.classes.back().excluded) ++out.surviving;
  }
  return out;
}

std::string render_text(const ClassReport& report) {
  std::ostringstream os;
  os << "class " << report.key << '\n';
  os << "weak numerical type: " << to_string(report.weak_type) << '\n';
  os << '\n';

  std::size_t name_w = 5, char_w = 14, lines_w = 5;
  for (const auto& row : report.table) {
    name_w = std::max(name_w, row.point.size());
    char_w = std::max(char_w, to_string(row.characteristic).size());
    lines_w = std::max(lines_w, join_lines(row.lines).size());
  }
  auto pad = [&os](const std::string& s, std::size_t w) {
    os << s << std::string(w - s.size() + 2, ' ');
  };
  pad("point", name_w);
  pad("characteristic", char_w);
  pad("lines", lines_w);
  os << "tangency\n";
  for (const auto& row : report.table) {
    pad(row.point, name_w);
    pad(to_string(row.characteristic), char_w);
    pad(join_lines(row.lines), lines_w);
    os << (row.tangent ? std::to_string(*row.tangent) : "-") << '\n';
  }
  os << '\n';
  os << "constraints: ";
  if (report.constraint_names.empty()) {
    os << "none";
  } else {
    for (std::size_t i = 0; i < report.constraint_names.size(); ++i) {
      if (i) os << ", ";
      os << report.constraint_names[i];
    }
  }
  os << '\n';
  for (const auto& v : report.verdicts) {
    os << "Lemma " << (static_cast<int>(v.lemma) + 1) << ": " << v.narrative
       << '\n';
  }
  os << "status: "
     << (report.excluded ? "excluded (cannot contain a minimal Zariski pair)"
                         : "surviving candidate")
     << '\n';
  return os.str();
}

nlohmann::json to_json(const LemmaVerdict& v) {
  return nlohmann::json{
      {"lemma", to_string(v.lemma)},
      {"excluded", v.excluded},
      {"witness_line",
       v.witness_line ? nlohmann::json(*v.witness_line) : nlohmann::json(nullptr)},
      {"witness_points", v.witness_points},
      {"narrative", v.narrative}};
}

nlohmann::json to_json(const ClassReport& report) {
  nlohmann::json table = nlohmann::json::array();
  for (const auto& row : report.table) {
    table.push_back(
        {{"point", row.point},
         {"characteristic",
          {row.characteristic.tangent, row.characteristic.conic,
           row.characteristic.lines}},
         {"lines", row.lines},
         {"tangent", row.tangent ? nlohmann::json(*row.tangent)
                                 : nlohmann::json(nullptr)}});
  }
  nlohmann::json verdicts = nlohmann::json::array();
  for (const auto& v : report.verdicts) verdicts.push_back(to_json(v));
  nlohmann::json weak = nlohmann::json::array();
  for (const auto& c : report.weak_type) {
    weak.push_back({c.tangent, c.conic, c.lines});
  }
  return nlohmann::json{{"key", report.key},
                        {"table", std::move(table)},
                        {"constraints", report.constraint_names},
                        {"weak_type", std::move(weak)},
                        {"verdicts", std::move(verdicts)},
                        {"excluded", report.excluded}};
}

nlohmann::json to_json(const CandidateReport& report) {
  nlohmann::json classes = nlohmann::json::array();
  for (const auto& c : report.classes) classes.push_back(to_json(c));
  return nlohmann::json{{"n", report.n},
                        {"classes", std::move(classes)},
                        {"surviving", report.surviving}};
}

}  // namespace zscan
