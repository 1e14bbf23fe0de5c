#include "zscan/equivalence.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace zscan {

WeakNumericalType weak_numerical_type(const Arrangement& a) {
  WeakNumericalType t;
  t.reserve(a.points().size());
  for (PointIndex i = 0; i < a.points().size(); ++i) {
    t.push_back(characteristic(a, i));
  }
  std::sort(t.begin(), t.end());
  return t;
}

std::string to_string(const WeakNumericalType& t) {
  std::ostringstream os;
  os << '{';
  for (std::size_t i = 0; i < t.size();) {
    std::size_t j = i;
    while (j < t.size() && t[j] == t[i]) ++j;
    if (i) os << ", ";
    os << to_string(t[i]) << 'x' << (j - i);
    i = j;
  }
  os << '}';
  return os.str();
}

namespace {

void check_permutation(const Permutation& sigma, int n) {
  if (static_cast<int>(sigma.size()) != n) {
    throw ValidationError(ValidationCode::NotAPermutation,
                          "permutation has size " + std::to_string(sigma.size()) +
                              ", expected " + std::to_string(n));
  }
  std::vector<bool> seen(n + 1, false);
  for (LineId v : sigma) {
    if (v < 1 || v > n || seen[v]) {
      throw ValidationError(ValidationCode::NotAPermutation,
                            "values must cover 1.." + std::to_string(n) +
                                " exactly once");
    }
    seen[v] = true;
  }
}

PointRecord relabel_record(const PointRecord& p, const Permutation& sigma) {
  PointRecord q;
  q.on_conic = p.on_conic;
  q.lines.reserve(p.lines.size());
  for (LineId l : p.lines) q.lines.push_back(sigma[l - 1]);
  std::sort(q.lines.begin(), q.lines.end());
  if (p.tangent_line) q.tangent_line = sigma[*p.tangent_line - 1];
  return q;
}

void serialize_record(const PointRecord& p, const Permutation& sigma,
                      std::string& out) {
  // Record format "(on_conic,tangent-or-0,[l1,l2,...])" with relabeled,
  // sorted line ids.
  static thread_local std::vector<LineId> lines;
  lines.clear();
  for (LineId l : p.lines) lines.push_back(sigma[l - 1]);
  std::sort(lines.begin(), lines.end());
  out.clear();
  out += '(';
  out += p.on_conic ? '1' : '0';
  out += ',';
  out += std::to_string(p.tangent_line ? sigma[*p.tangent_line - 1] : 0);
  out += ",[";
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(lines[i]);
  }
  out += "])";
}

std::string serialize_body(const Arrangement& a, const Permutation& sigma) {
  std::vector<std::string> recs(a.points().size());
  for (std::size_t i = 0; i < a.points().size(); ++i) {
    serialize_record(a.points()[i], sigma, recs[i]);
  }
  std::sort(recs.begin(), recs.end());
  std::string body;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    if (i) body += ',';
    body += recs[i];
  }
  return body;
}

}  // namespace

Arrangement relabel(const Arrangement& a, const Permutation& sigma) {
  check_permutation(sigma, a.line_count());
  std::vector<PointRecord> pts;
  pts.reserve(a.points().size());
  for (const auto& p : a.points()) pts.push_back(relabel_record(p, sigma));
  return validate(a.line_count(), std::move(pts));
}

CanonicalKey canonical_key(const Arrangement& a) {
  int n = a.line_count();
  std::string prefix = "n=" + std::to_string(n) + ":";
  if (n == 0) return prefix;
  Permutation sigma(n);
  for (int i = 0; i < n; ++i) sigma[i] = i + 1;
  std::string best;
  do {
    std::string body = serialize_body(a, sigma);
    if (best.empty() || body < best) best = std::move(body);
  } while (std::next_permutation(sigma.begin(), sigma.end()));
  return prefix + best;
}

Arrangement arrangement_from_key(const CanonicalKey& key) {
  auto fail = [&](const std::string& why) -> ValidationError {
    return ValidationError(ValidationCode::IndexOutOfRange,
                           "malformed key '" + key + "': " + why);
  };
  if (key.rfind("n=", 0) != 0) throw fail("missing n= prefix");
  std::size_t colon = key.find(':');
  if (colon == std::string::npos) throw fail("missing ':'");
  int n = 0;
  try {
    std::size_t used = 0;
    n = std::stoi(key.substr(2, colon - 2), &used);
    if (used != colon - 2) throw fail("bad line count");
  } catch (const std::logic_error&) {
    throw fail("bad line count");
  }

  std::vector<PointRecord> pts;
  std::size_t pos = colon + 1;
  auto read_int = [&](char stop) {
    std::size_t end = pos;
    while (end < key.size() && key[end] != stop) ++end;
    if (end == key.size() || end == pos) throw fail("truncated record");
    int v = 0;
    try {
      std::size_t used = 0;
      v = std::stoi(key.substr(pos, end - pos), &used);
      if (used != end - pos) throw fail("bad integer");
    } catch (const std::logic_error&) {
      throw fail("bad integer");
    }
    pos = end + 1;
    return v;
  };
  while (pos < key.size()) {
    if (key[pos] != '(') throw fail("expected '('");
    ++pos;
    PointRecord p;
    int conic = read_int(',');
    if (conic != 0 && conic != 1) throw fail("conic flag must be 0 or 1");
    p.on_conic = conic == 1;
    int tangent = read_int(',');
    if (tangent != 0) p.tangent_line = tangent;
    if (pos >= key.size() || key[pos] != '[') throw fail("expected '['");
    ++pos;
    if (pos < key.size() && key[pos] == ']') {
      ++pos;
    } else {
      while (true) {
        std::size_t end = pos;
        while (end < key.size() && key[end] != ',' && key[end] != ']') ++end;
        if (end == key.size() || end == pos) throw fail("truncated line list");
        char stop = key[end];
        p.lines.push_back(read_int(stop));
        if (stop == ']') break;
      }
    }
    if (pos >= key.size() || key[pos] != ')') throw fail("expected ')'");
    ++pos;
    pts.push_back(std::move(p));
    if (pos < key.size()) {
      if (key[pos] != ',') throw fail("expected ',' between records");
      ++pos;
      if (pos >= key.size()) throw fail("trailing record separator");
    }
  }
  return validate(n, std::move(pts));
}

std::optional<EquivalenceWitness> are_equivalent(const Arrangement& a,
                                                 const Arrangement& b) {
  int n = a.line_count();
  if (n != b.line_count()) return std::nullopt;
  if (a.points().size() != b.points().size()) return std::nullopt;
  if (weak_numerical_type(a) != weak_numerical_type(b)) return std::nullopt;

  // A relabeling carrying a onto b must match lines of equal profile, so the
  // search runs over profile classes only.
  std::map<LineProfile, std::vector<LineId>> class_a, class_b;
  for (LineId l = 1; l <= n; ++l) {
    class_a[line_profile(a, l)].push_back(l);
    class_b[line_profile(b, l)].push_back(l);
  }
  if (class_a.size() != class_b.size()) return std::nullopt;
  for (auto ita = class_a.begin(), itb = class_b.begin(); ita != class_a.end();
       ++ita, ++itb) {
    if (ita->first != itb->first || ita->second.size() != itb->second.size()) {
      return std::nullopt;
    }
  }

  std::vector<LineId> order;  // a's lines grouped by class
  for (const auto& [prof, lines] : class_a) {
    (void)prof;
    order.insert(order.end(), lines.begin(), lines.end());
  }

  Permutation sigma(n, 0);
  std::vector<bool> used(n + 1, false);

  auto matches = [&]() {
    std::vector<PointRecord> mapped;
    mapped.reserve(a.points().size());
    for (const auto& p : a.points()) mapped.push_back(relabel_record(p, sigma));
    std::sort(mapped.begin(), mapped.end());
    return mapped == b.points();
  };

  std::optional<EquivalenceWitness> found;
  auto dfs = [&](auto&& self, std::size_t depth) -> bool {
    if (depth == order.size()) {
      if (!matches()) return false;
      EquivalenceWitness w;
      w.sigma = sigma;
      w.point_map.assign(a.points().size(), 0);
      std::vector<bool> taken(b.points().size(), false);
      for (PointIndex i = 0; i < a.points().size(); ++i) {
        PointRecord img = relabel_record(a.points()[i], sigma);
        for (PointIndex j = 0; j < b.points().size(); ++j) {
          if (!taken[j] && b.points()[j] == img) {
            taken[j] = true;
            w.point_map[i] = j;
            break;
          }
        }
      }
      found = std::move(w);
      return true;
    }
    LineId src = order[depth];
    const auto& targets = class_b[line_profile(a, src)];
    for (LineId dst : targets) {
      if (used[dst]) continue;
      used[dst] = true;
      sigma[src - 1] = dst;
      if (self(self, depth + 1)) return true;
      used[dst] = false;
    }
    return false;
  };
  dfs(dfs, 0);
  return found;
}

}  // namespace zscan
