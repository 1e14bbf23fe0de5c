#include "zscan/generator.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <thread>

#include "zscan/json_io.hpp"

namespace zscan {

namespace {

// Exact-equality fingerprint of a normalized arrangement (identity labels).
std::string equality_fingerprint(const Arrangement& a) {
  std::string s = std::to_string(a.line_count());
  s += '#';
  for (const auto& p : a.points()) {
    s += '(';
    s += p.on_conic ? '1' : '0';
    s += ',';
    s += std::to_string(p.tangent_line.value_or(0));
    s += ",[";
    for (std::size_t i = 0; i < p.lines.size(); ++i) {
      if (i) s += ',';
      s += std::to_string(p.lines[i]);
    }
    s += "])";
  }
  return s;
}

}  // namespace

Arrangement apply_extension(const Arrangement& a, const ExtensionChoice& choice) {
  const int n = a.line_count();
  const LineId fresh = n + 1;
  const auto& pts = a.points();

  std::vector<bool> covered(n + 1, false);
  int conic_chosen = 0;
  PointIndex last = 0;
  bool first = true;
  for (PointIndex idx : choice.through) {
    if (idx >= pts.size()) {
      throw ValidationError(ValidationCode::IndexOutOfRange,
                            "extension point index " + std::to_string(idx) +
                                " out of range");
    }
    if (!first && idx <= last) {
      throw ValidationError(ValidationCode::IndexOutOfRange,
                            "extension point indices must be strictly ascending");
    }
    first = false;
    last = idx;
    for (LineId l : pts[idx].lines) {
      if (covered[l]) {
        throw ValidationError(ValidationCode::PairDuplicated,
                              "two chosen points share line " + std::to_string(l));
      }
      covered[l] = true;
    }
    if (pts[idx].on_conic) {
      ++conic_chosen;
      if (choice.tangent && pts[idx].tangent_line) {
        throw ValidationError(ValidationCode::TangentConicCount,
                              "chosen tangency point already carries a tangent line");
      }
    }
  }
  int conic_limit = choice.tangent ? 1 : 2;
  if (conic_chosen > conic_limit) {
    throw ValidationError(ValidationCode::TangentConicCount,
                          "a " + std::string(choice.tangent ? "tangent" : "transverse") +
                              " line passes through at most " +
                              std::to_string(conic_limit) + " conic points");
  }

  std::vector<PointRecord> out = pts;
  for (PointIndex idx : choice.through) {
    out[idx].lines.push_back(fresh);
    if (choice.tangent && out[idx].on_conic) out[idx].tangent_line = fresh;
  }
  for (LineId l = 1; l <= n; ++l) {
    if (!covered[l]) out.push_back({{l, fresh}, false, std::nullopt});
  }
  if (choice.tangent) {
    if (conic_chosen == 0) out.push_back({{fresh}, true, fresh});
  } else {
    for (int k = conic_chosen; k < 2; ++k) {
      out.push_back({{fresh}, true, std::nullopt});
    }
  }
  return validate(n + 1, std::move(out));
}

std::vector<Extension> extensions(const Arrangement& a) {
  const auto& pts = a.points();
  std::vector<Extension> out;
  std::set<std::string> seen;

  std::vector<PointIndex> chosen;
  std::vector<bool> used(a.line_count() + 1, false);

  auto emit = [&] {
    int conic_chosen = 0;
    bool tangency_blocked = false;
    for (PointIndex idx : chosen) {
      if (pts[idx].on_conic) {
        ++conic_chosen;
        if (pts[idx].tangent_line) tangency_blocked = true;
      }
    }
    for (bool tangent : {false, true}) {
      if (tangent && (conic_chosen > 1 || (conic_chosen == 1 && tangency_blocked))) {
        continue;
      }
      if (!tangent && conic_chosen > 2) continue;
      ExtensionChoice choice{tangent, chosen};
      Arrangement ext = apply_extension(a, choice);
      if (seen.insert(equality_fingerprint(ext)).second) {
        out.push_back({std::move(choice), std::move(ext)});
      }
    }
  };

  auto dfs = [&](auto&& self, PointIndex from) -> void {
    emit();
    for (PointIndex idx = from; idx < pts.size(); ++idx) {
      bool clash = false;
      for (LineId l : pts[idx].lines) {
        if (used[l]) {
          clash = true;
          break;
        }
      }
      if (clash) continue;
      for (LineId l : pts[idx].lines) used[l] = true;
      chosen.push_back(idx);
      self(self, idx + 1);
      chosen.pop_back();
      for (LineId l : pts[idx].lines) used[l] = false;
    }
  };
  dfs(dfs, 0);
  return out;
}

namespace {

// Deterministic tie-break for candidates landing on the same key: keep the
// provenance that is smallest as (parent key, choice).
bool provenance_less(const ClassEntry& x, const ClassEntry& y) {
  if (x.parent_key != y.parent_key) return x.parent_key < y.parent_key;
  return x.choice < y.choice;
}

void merge_candidate(std::map<CanonicalKey, ClassEntry>& into, ClassEntry cand) {
  auto it = into.find(cand.key);
  if (it == into.end()) {
    into.emplace(cand.key, std::move(cand));
  } else if (provenance_less(cand, it->second)) {
    it->second = std::move(cand);
  }
}

std::map<CanonicalKey, ClassEntry> expand_range(const ClassCatalog& cat,
                                                std::size_t begin, std::size_t end) {
  std::map<CanonicalKey, ClassEntry> local;
  for (std::size_t i = begin; i < end; ++i) {
    const ClassEntry& parent = cat.classes[i];
    for (Extension& ext : extensions(parent.representative)) {
      ClassEntry cand{canonical_key(ext.result), std::move(ext.result),
                      parent.key, std::move(ext.choice)};
      merge_candidate(local, std::move(cand));
    }
  }
  return local;
}

}  // namespace

ClassCatalog next_level(const ClassCatalog& cat, int workers) {
  std::map<CanonicalKey, ClassEntry> merged;
  std::size_t total = cat.classes.size();
  if (workers <= 1 || total <= 1) {
    merged = expand_range(cat, 0, total);
  } else {
    std::size_t parts = std::min<std::size_t>(workers, total);
    std::vector<std::map<CanonicalKey, ClassEntry>> locals(parts);
    std::vector<std::thread> threads;
    for (std::size_t w = 0; w < parts; ++w) {
      std::size_t begin = total * w / parts;
      std::size_t end = total * (w + 1) / parts;
      threads.emplace_back(
          [&cat, &locals, w, begin, end] { locals[w] = expand_range(cat, begin, end); });
    }
    for (auto& t : threads) t.join();
    for (auto& local : locals) {
      for (auto& [key, entry] : local) {
        (void)key;
        merge_candidate(merged, std::move(entry));
      }
    }
  }
  ClassCatalog out;
  out.n = cat.n + 1;
  out.classes.reserve(merged.size());
  for (auto& [key, entry] : merged) {
    (void)key;
    out.classes.push_back(std::move(entry));
  }
  return out;
}

std::vector<ClassCatalog> enumerate_classes(int n_max, int workers) {
  if (n_max < 0) {
    throw ValidationError(ValidationCode::IndexOutOfRange,
                          "level bound must be non-negative");
  }
  std::vector<ClassCatalog> levels;
  ClassCatalog base;
  base.n = 0;
  Arrangement conic_only = validate(0, {});
  base.classes.push_back(
      {canonical_key(conic_only), std::move(conic_only), "", std::nullopt});
  levels.push_back(std::move(base));
  for (int j = 1; j <= n_max; ++j) {
    levels.push_back(next_level(levels.back(), workers));
  }
  return levels;
}

namespace {

using PairList = std::vector<std::pair<LineId, LineId>>;

// Enumerates all partitions of the line-pair set into multi-points (each
// block is the full pair set of some line subset) and hands every complete
// partition to `sink` as a list of line subsets.
void partition_pairs(int n, std::vector<std::vector<LineId>>& blocks,
                     std::set<std::pair<LineId, LineId>>& uncovered,
                     const std::function<void()>& sink) {
  if (uncovered.empty()) {
    sink();
    return;
  }
  auto [i, j] = *uncovered.begin();

  std::vector<LineId> block{i, j};
  auto usable = [&](LineId k) {
    for (LineId m : block) {
      auto p = std::minmax(m, k);
      if (!uncovered.count({p.first, p.second})) return false;
    }
    return true;
  };
  auto cover_block = [&](bool on) {
    for (std::size_t x = 0; x < block.size(); ++x) {
      for (std::size_t y = x + 1; y < block.size(); ++y) {
        auto p = std::minmax(block[x], block[y]);
        if (on) {
          uncovered.erase({p.first, p.second});
        } else {
          uncovered.insert({p.first, p.second});
        }
      }
    }
  };

  auto grow = [&](auto&& self, LineId from) -> void {
    cover_block(true);
    blocks.push_back(block);
    partition_pairs(n, blocks, uncovered, sink);
    blocks.pop_back();
    cover_block(false);
    for (LineId k = from; k <= n; ++k) {
      if (k == i || k == j) continue;
      if (!usable(k)) continue;
      block.push_back(k);
      self(self, k + 1);
      block.pop_back();
    }
  };
  grow(grow, 1);
}

}  // namespace

ClassCatalog brute_force_enumerate(int n, int max_n) {
  if (n < 0) {
    throw ValidationError(ValidationCode::IndexOutOfRange,
                          "line count must be non-negative");
  }
  if (n > max_n) {
    throw ValidationError(ValidationCode::BudgetExceeded,
                          "brute-force enumeration capped at n=" + std::to_string(max_n));
  }

  std::set<CanonicalKey> keys;

  std::vector<std::vector<LineId>> blocks;
  std::set<std::pair<LineId, LineId>> uncovered;
  for (LineId i = 1; i <= n; ++i) {
    for (LineId j = i + 1; j <= n; ++j) uncovered.insert({i, j});
  }

  // Block state: 0 off conic, 1 on conic untangled, 2+k tangent to block[k].
  auto handle_partition = [&] {
    std::vector<int> state(blocks.size(), 0);
    auto conic_states = [&](auto&& self, std::size_t b) -> void {
      if (b < blocks.size()) {
        for (int s = 0; s < 2 + static_cast<int>(blocks[b].size()); ++s) {
          state[b] = s;
          self(self, b + 1);
        }
        return;
      }
      // Per-line bookkeeping for this assignment.
      std::vector<int> designated(n + 1, 0), conic_hits(n + 1, 0);
      for (std::size_t k = 0; k < blocks.size(); ++k) {
        if (state[k] == 0) continue;
        for (LineId l : blocks[k]) ++conic_hits[l];
        if (state[k] >= 2) ++designated[blocks[k][state[k] - 2]];
      }
      std::vector<LineId> free_lines;  // lines whose conic behavior is still open
      for (LineId l = 1; l <= n; ++l) {
        if (designated[l] > 1) return;
        if (designated[l] == 1) {
          if (conic_hits[l] != 1) return;
        } else if (conic_hits[l] > 2) {
          return;
        } else {
          free_lines.push_back(l);
        }
      }
      // Each free line is either transverse (fill up to two conic crossings)
      // or, if it has no shared conic point, tangent at a private point.
      auto modes = [&](auto&& self2, std::size_t idx,
                       std::vector<PointRecord>& privates) -> void {
        if (idx == free_lines.size()) {
          std::vector<PointRecord> recs;
          for (std::size_t k = 0; k < blocks.size(); ++k) {
            PointRecord p;
            p.lines = blocks[k];
            p.on_conic = state[k] != 0;
            if (state[k] >= 2) p.tangent_line = blocks[k][state[k] - 2];
            recs.push_back(std::move(p));
          }
          recs.insert(recs.end(), privates.begin(), privates.end());
          keys.insert(canonical_key(validate(n, std::move(recs))));
          return;
        }
        LineId l = free_lines[idx];
        std::size_t keep = privates.size();
        for (int k = conic_hits[l]; k < 2; ++k) {
          privates.push_back({{l}, true, std::nullopt});
        }
        self2(self2, idx + 1, privates);
        privates.resize(keep);
        if (conic_hits[l] == 0) {
          privates.push_back({{l}, true, l});
          self2(self2, idx + 1, privates);
          privates.resize(keep);
        }
      };
      std::vector<PointRecord> privates;
      modes(modes, 0, privates);
    };
    conic_states(conic_states, 0);
  };

  partition_pairs(n, blocks, uncovered, handle_partition);

  ClassCatalog out;
  out.n = n;
  for (const CanonicalKey& key : keys) {
    out.classes.push_back({key, arrangement_from_key(key), "", std::nullopt});
  }
  return out;
}

nlohmann::json to_json(const ClassCatalog& cat) {
  nlohmann::json classes = nlohmann::json::array();
  for (const auto& entry : cat.classes) {
    nlohmann::json choice = nullptr;
    if (entry.choice) {
      choice = {{"tangent", entry.choice->tangent},
                {"through", entry.choice->through}};
    }
    classes.push_back({{"key", entry.key},
                       {"representative", to_json(entry.representative)},
                       {"parent", entry.parent_key},
                       {"choice", std::move(choice)}});
  }
  return nlohmann::json{{"n", cat.n}, {"classes", std::move(classes)}};
}

ClassCatalog catalog_from_json(const nlohmann::json& j) {
  ClassCatalog cat;
  cat.n = j.at("n").get<int>();
  for (const auto& e : j.at("classes")) {
    std::optional<ExtensionChoice> choice;
    if (e.contains("choice") && !e.at("choice").is_null()) {
      ExtensionChoice c;
      c.tangent = e.at("choice").at("tangent").get<bool>();
      c.through = e.at("choice").at("through").get<std::vector<PointIndex>>();
      choice = std::move(c);
    }
    cat.classes.push_back({e.at("key").get<std::string>(),
                           arrangement_from_json(e.at("representative")),
                           e.at("parent").get<std::string>(), std::move(choice)});
  }
  return cat;
}

}  // namespace zscan
