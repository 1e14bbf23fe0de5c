#include <chrono>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "zscan/equivalence.hpp"
#include "zscan/generator.hpp"
#include "zscan/json_io.hpp"
#include "zscan/minimality.hpp"
#include "zscan/model.hpp"
#include "zscan/realization.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kTool = "zscan";
constexpr const char* kVersion = "0.1.0";
constexpr const char* kKeyFormat = "v1";

// Exit codes are a stable public contract (see README).
constexpr int kOk = 0;
constexpr int kIoError = 2;
constexpr int kConfigError = 3;
constexpr int kUnknownKey = 4;
constexpr int kInvalidFile = 5;
constexpr int kNotRealized = 10;
constexpr int kNoProjectiveWitness = 11;
constexpr int kInequivalent = 12;

struct Options {
  std::string out = ".";
  std::uint64_t seed = 1;
  int workers = 1;
  bool resume = false;
  std::string format = "text";
  zscan::Tolerances tol;
  int budget = 64;
  int n_max = 0;
  std::string target;
  std::string file_a, file_b;
};

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex16(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Only settings that influence file content enter the hash; workers,
// resume, format and the output directory must not change a single output
// byte and are deliberately left out.
std::string config_fingerprint(const Options& opt, const std::string& command) {
  std::string s = command;
  s += ";seed=" + std::to_string(opt.seed);
  s += ";n=" + std::to_string(opt.n_max);
  s += ";budget=" + std::to_string(opt.budget);
  s += ";tol=" + fmt_double(opt.tol.residual) + "," + fmt_double(opt.tol.cluster) +
       "," + fmt_double(opt.tol.tangency) + "," + fmt_double(opt.tol.projective);
  s += ";target=" + opt.target;
  s += ";files=" + opt.file_a + "," + opt.file_b;
  return s;
}

json file_header(const Options& opt, const std::string& command) {
  return json{{"tool", kTool},
              {"version", kVersion},
              {"seed", opt.seed},
              {"config_hash", hex16(fnv1a64(config_fingerprint(opt, command)))},
              {"key_format", kKeyFormat}};
}

int write_output(const fs::path& path, const json& doc) {
  try {
    zscan::save_json(doc, path);
  } catch (const std::exception& e) {
    std::cerr << kTool << ": " << e.what() << '\n';
    return kIoError;
  }
  return kOk;
}

std::optional<json> read_json_file(const fs::path& path, std::string* error) {
  std::ifstream in(path);
  if (!in) {
    if (error) *error = "cannot open " + path.string();
    return std::nullopt;
  }
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) {
    if (error) *error = path.string() + " is not valid JSON";
    return std::nullopt;
  }
  return j;
}

json matrix_to_json(const Eigen::Matrix3cd& m) {
  json rows = json::array();
  for (int i = 0; i < 3; ++i) {
    json row = json::array();
    for (int j = 0; j < 3; ++j) {
      row.push_back(json::array({m(i, j).real(), m(i, j).imag()}));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

struct Resolved {
  zscan::Arrangement arrangement;
  zscan::CanonicalKey key;
};

// A target names an arrangement in one of three ways, tried in order: an
// existing JSON file, a key present in the output directory's catalogs, or
// a bare canonical key (parsed directly, no catalog needed).
int resolve_target(const Options& opt, const std::string& target,
                   std::optional<Resolved>& out) {
  auto path_like = [](const std::string& s) {
    return s.find('/') != std::string::npos || s.ends_with(".json");
  };
  std::error_code ec;
  if (fs::is_regular_file(target, ec)) {
    try {
      zscan::Arrangement a = zscan::load_arrangement(target);
      zscan::CanonicalKey key = zscan::canonical_key(a);
      out = Resolved{std::move(a), std::move(key)};
      return kOk;
    } catch (const std::exception& e) {
      std::cerr << kTool << ": " << target << ": " << e.what() << '\n';
      return kInvalidFile;
    }
  }
  if (path_like(target)) {
    std::cerr << kTool << ": " << target << ": no such file\n";
    return kInvalidFile;
  }
  for (int level = 0;; ++level) {
    fs::path path = fs::path(opt.out) / ("classes-" + std::to_string(level) + ".json");
    if (!fs::is_regular_file(path, ec)) break;
    auto doc = read_json_file(path, nullptr);
    if (!doc || !doc->contains("classes")) continue;
    for (const auto& entry : (*doc)["classes"]) {
      if (entry.value("key", "") != target) continue;
      try {
        zscan::Arrangement a = zscan::arrangement_from_json(entry.at("representative"));
        out = Resolved{std::move(a), target};
        return kOk;
      } catch (const std::exception& e) {
        std::cerr << kTool << ": " << path.string() << ": " << e.what() << '\n';
        return kInvalidFile;
      }
    }
  }
  try {
    zscan::Arrangement a = zscan::arrangement_from_key(target);
    zscan::CanonicalKey key = zscan::canonical_key(a);
    out = Resolved{std::move(a), std::move(key)};
    return kOk;
  } catch (const std::exception&) {
  }
  std::cerr << kTool << ": unknown key '" << target << "'\n";
  return kUnknownKey;
}

// ---------------------------------------------------------------------------
// enumerate
// ---------------------------------------------------------------------------

int cmd_enumerate(const Options& opt) {
  auto start = std::chrono::steady_clock::now();
  std::error_code ec;
  fs::create_directories(opt.out, ec);
  if (ec) {
    std::cerr << kTool << ": cannot create " << opt.out << ": " << ec.message()
              << '\n';
    return kIoError;
  }
  json header = file_header(opt, "enumerate");

  std::vector<zscan::ClassCatalog> catalogs;
  json levels = json::array();
  for (int j = 0; j <= opt.n_max; ++j) {
    fs::path cpath = fs::path(opt.out) / ("classes-" + std::to_string(j) + ".json");
    fs::path rpath = fs::path(opt.out) / ("report-" + std::to_string(j) + ".json");

    std::optional<zscan::ClassCatalog> cat;
    if (opt.resume && fs::is_regular_file(cpath, ec)) {
      if (auto doc = read_json_file(cpath, nullptr)) {
        try {
          if (doc->value("n", -1) == j &&
              doc->at("header").value("key_format", "") == kKeyFormat) {
            cat = zscan::catalog_from_json(*doc);
          }
        } catch (const std::exception&) {
          cat.reset();
        }
      }
      if (!cat) {
        std::cerr << kTool << ": ignoring stale " << cpath.string() << '\n';
      }
    }
    bool reused = cat.has_value();
    if (!cat) {
      cat = j == 0 ? zscan::enumerate_classes(0, opt.workers).front()
                   : zscan::next_level(catalogs.back(), opt.workers);
      json doc = zscan::to_json(*cat);
      doc["header"] = header;
      if (int rc = write_output(cpath, doc); rc != kOk) return rc;
    }

    zscan::CandidateReport report = zscan::candidate_report(*cat);
    if (!(opt.resume && reused && fs::is_regular_file(rpath, ec))) {
      json doc = zscan::to_json(report);
      doc["header"] = header;
      if (int rc = write_output(rpath, doc); rc != kOk) return rc;
    }

    levels.push_back(json{{"n", j},
                          {"classes", cat->classes.size()},
                          {"survivors", report.surviving}});
    catalogs.push_back(std::move(*cat));
  }

  auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                     std::chrono::steady_clock::now() - start)
                     .count();
  json summary{{"header", header},
               {"n_max", opt.n_max},
               {"levels", levels},
               {"timing_ms", elapsed}};
  if (int rc = write_output(fs::path(opt.out) / "summary.json", summary);
      rc != kOk) {
    return rc;
  }

  if (opt.format == "json") {
    std::cout << summary.dump(2) << '\n';
  } else {
    for (const auto& level : levels) {
      std::cout << "level " << level["n"] << ": " << level["classes"]
                << " classes, " << level["survivors"] << " surviving\n";
    }
    std::cout << "wrote classes-0.." << opt.n_max << ".json, report-0.."
              << opt.n_max << ".json, summary.json in " << opt.out << " ("
              << elapsed << " ms)\n";
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// explain / export
// ---------------------------------------------------------------------------

int cmd_explain(const Options& opt) {
  std::optional<Resolved> r;
  if (int rc = resolve_target(opt, opt.target, r); rc != kOk) return rc;
  zscan::ClassReport report = zscan::report_class(r->key, r->arrangement);
  if (opt.format == "json") {
    json doc = zscan::to_json(report);
    doc["header"] = file_header(opt, "explain");
    std::cout << doc.dump(2) << '\n';
  } else {
    std::cout << zscan::render_text(report);
  }
  return kOk;
}

int cmd_export(const Options& opt) {
  std::optional<Resolved> r;
  if (int rc = resolve_target(opt, opt.target, r); rc != kOk) return rc;
  json doc = zscan::to_json(r->arrangement);
  doc["header"] = file_header(opt, "export");
  doc["key"] = r->key;
  std::cout << doc.dump(2) << '\n';
  return kOk;
}

// ---------------------------------------------------------------------------
// realize
// ---------------------------------------------------------------------------

int cmd_realize(const Options& opt) {
  try {
    opt.tol.check();
  } catch (const zscan::RealizationError& e) {
    std::cerr << kTool << ": " << e.what() << '\n';
    return kConfigError;
  }
  std::optional<Resolved> r;
  if (int rc = resolve_target(opt, opt.target, r); rc != kOk) return rc;

  zscan::RealizationResult result =
      zscan::realize(r->arrangement, opt.budget, opt.tol, opt.seed);
  bool realized = result.status == zscan::RealizeStatus::Realized;

  json doc{{"header", file_header(opt, "realize")},
           {"key", r->key},
           {"status", realized ? "Realized" : "Unknown"},
           {"attempts", result.attempts}};
  if (result.geometry) doc["geometry"] = zscan::to_json(*result.geometry);

  std::error_code ec;
  fs::create_directories(opt.out, ec);
  if (ec) {
    std::cerr << kTool << ": cannot create " << opt.out << ": " << ec.message()
              << '\n';
    return kIoError;
  }
  fs::path path =
      fs::path(opt.out) / ("realization-" + hex16(fnv1a64(r->key)) + ".json");
  if (int rc = write_output(path, doc); rc != kOk) return rc;

  if (opt.format == "json") {
    std::cout << doc.dump(2) << '\n';
  } else if (realized) {
    std::cout << "Realized " << r->key << "\n  residual "
              << fmt_double(result.geometry->residual) << ", separation "
              << fmt_double(result.geometry->separation) << ", attempts "
              << result.attempts << "\n  wrote " << path.string() << '\n';
  } else {
    std::cout << "Unknown " << r->key << "\n  no realization found in "
              << result.attempts << " attempts\n  wrote " << path.string()
              << '\n';
  }
  return realized ? kOk : kNotRealized;
}

// ---------------------------------------------------------------------------
// compare
// ---------------------------------------------------------------------------

enum class FileKind { Arrangement, Realized, Other };

FileKind classify(const json& j) {
  if (j.contains("conic") && j.contains("lines")) return FileKind::Realized;
  if (j.contains("geometry")) return FileKind::Realized;  // realize output
  if (j.contains("n") && j.contains("points")) return FileKind::Arrangement;
  return FileKind::Other;
}

int compare_arrangements(const Options& opt, const json& ja, const json& jb) {
  zscan::Arrangement a = zscan::arrangement_from_json(ja);
  zscan::Arrangement b = zscan::arrangement_from_json(jb);
  auto witness = zscan::are_equivalent(a, b);

  if (opt.format == "json") {
    json doc{{"header", file_header(opt, "compare")},
             {"mode", "combinatorial"},
             {"keys", {zscan::canonical_key(a), zscan::canonical_key(b)}},
             {"equivalent", witness.has_value()}};
    if (witness) {
      doc["witness"] = {{"sigma", witness->sigma},
                       {"point_map", witness->point_map}};
    }
    std::cout << doc.dump(2) << '\n';
  } else if (witness) {
    std::cout << "equivalent\n  sigma:";
    for (zscan::LineId l : witness->sigma) std::cout << ' ' << l;
    std::cout << '\n';
  } else {
    std::cout << "inequivalent\n  " << zscan::canonical_key(a) << "\n  "
              << zscan::canonical_key(b) << '\n';
  }
  return witness ? kOk : kInequivalent;
}

zscan::RealizedArrangement realized_from_file(const json& j) {
  if (j.contains("geometry")) {
    return zscan::realized_from_json(j.at("geometry"));
  }
  return zscan::realized_from_json(j);
}

int compare_realized(const Options& opt, const json& ja, const json& jb) {
  zscan::RealizedArrangement g1 = realized_from_file(ja);
  zscan::RealizedArrangement g2 = realized_from_file(jb);

  zscan::CanonicalKey k1, k2;
  try {
    k1 = zscan::canonical_key(zscan::extract_combinatorics(g1, opt.tol));
    k2 = zscan::canonical_key(zscan::extract_combinatorics(g2, opt.tol));
  } catch (const std::exception& e) {
    std::cerr << kTool << ": geometry does not determine a valid arrangement: "
              << e.what() << '\n';
    return kInvalidFile;
  }

  json doc{{"header", file_header(opt, "compare")},
           {"mode", "realized"},
           {"keys", {k1, k2}},
           {"combinatorially_equivalent", k1 == k2}};
  int rc;
  std::string text;
  if (k1 != k2) {
    doc["equivalent"] = false;
    text = "combinatorially inequivalent\n  " + k1 + "\n  " + k2 + "\n";
    rc = kInequivalent;
  } else {
    zscan::ProjectiveVerdict verdict;
    bool too_few = false;
    try {
      verdict = zscan::projective_equivalent(g1, g2, opt.tol);
    } catch (const zscan::RealizationError& e) {
      if (e.code() != zscan::RealizationCode::TooFewDistinguishedPoints) throw;
      too_few = true;
      verdict.detail = e.what();
    }
    doc["equivalent"] = verdict.equivalent;
    doc["detail"] = verdict.detail;
    if (verdict.equivalent) {
      doc["witness"] = matrix_to_json(*verdict.witness);
      doc["residual"] = verdict.residual;
      text = "projectively equivalent\n  residual " +
             fmt_double(verdict.residual) + "\n";
      rc = kOk;
    } else {
      text = "combinatorially equivalent, no projective witness\n  " +
             verdict.detail + "\n";
      rc = kNoProjectiveWitness;
      (void)too_few;
    }
  }
  if (opt.format == "json") {
    std::cout << doc.dump(2) << '\n';
  } else {
    std::cout << text;
  }
  return rc;
}

int cmd_compare(const Options& opt) {
  std::string err;
  auto ja = read_json_file(opt.file_a, &err);
  if (!ja) {
    std::cerr << kTool << ": " << err << '\n';
    return kInvalidFile;
  }
  auto jb = read_json_file(opt.file_b, &err);
  if (!jb) {
    std::cerr << kTool << ": " << err << '\n';
    return kInvalidFile;
  }
  FileKind ka = classify(*ja), kb = classify(*jb);
  if (ka == FileKind::Other || kb == FileKind::Other) {
    std::cerr << kTool
              << ": expected an arrangement ({n, points}) or a realized "
                 "geometry ({conic, lines})\n";
    return kInvalidFile;
  }
  if (ka != kb) {
    std::cerr << kTool
              << ": cannot compare a combinatorial arrangement with a "
                 "realized geometry\n";
    return kInvalidFile;
  }
  try {
    return ka == FileKind::Arrangement ? compare_arrangements(opt, *ja, *jb)
                                       : compare_realized(opt, *ja, *jb);
  } catch (const std::exception& e) {
    std::cerr << kTool << ": " << e.what() << '\n';
    return kInvalidFile;
  }
}

}  // namespace

int main(int argc, char** argv) {
  Options opt;
  opt.workers =
      std::max(1, static_cast<int>(std::thread::hardware_concurrency()));

  CLI::App app{"classification toolkit for (n,1) conic-line arrangements"};
  app.require_subcommand(1);
  app.add_option("--out", opt.out, "output directory")
      ->envname("ZSCAN_OUT")
      ->capture_default_str();
  app.add_option("--seed", opt.seed, "random seed recorded in output headers")
      ->capture_default_str();
  app.add_option("--workers", opt.workers, "parallel workers")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_flag("--resume", opt.resume,
               "reuse existing per-level catalog files instead of recomputing");
  app.add_option("--format", opt.format, "stdout format")
      ->check(CLI::IsMember({"text", "json"}))
      ->capture_default_str();

  CLI::App* enumerate =
      app.add_subcommand("enumerate", "enumerate classes level by level");
  enumerate->add_option("-n,--n-max", opt.n_max, "largest line count")
      ->required()
      ->check(CLI::NonNegativeNumber);

  CLI::App* explain = app.add_subcommand(
      "explain", "point table, constraints and lemma verdicts for one class");
  explain->add_option("target", opt.target, "class key or arrangement file")
      ->required();

  CLI::App* realize = app.add_subcommand(
      "realize", "search for a numerical realization of one class");
  realize->add_option("target", opt.target, "class key or arrangement file")
      ->required();
  realize->add_option("--budget", opt.budget, "solver restarts")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();

  CLI::App* compare = app.add_subcommand(
      "compare", "equivalence verdict for two arrangement or geometry files");
  compare->add_option("first", opt.file_a, "arrangement or geometry file")
      ->required();
  compare->add_option("second", opt.file_b, "arrangement or geometry file")
      ->required();

  for (CLI::App* sub : {enumerate, explain, realize, compare}) {
    sub->fallthrough();
  }
  for (CLI::App* sub : {realize, compare}) {
    sub->add_option("--tol-res", opt.tol.residual, "solver residual tolerance")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--tol-cluster", opt.tol.cluster,
                    "point identity tolerance")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--tol-tan", opt.tol.tangency, "tangency tolerance")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
  }

  CLI::App* exp = app.add_subcommand(
      "export", "write one class representative as an arrangement JSON document");
  exp->add_option("target", opt.target, "class key or arrangement file")
      ->required();
  exp->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    if (enumerate->parsed()) return cmd_enumerate(opt);
    if (explain->parsed()) return cmd_explain(opt);
    if (realize->parsed()) return cmd_realize(opt);
    if (compare->parsed()) return cmd_compare(opt);
    if (exp->parsed()) return cmd_export(opt);
  } catch (const std::exception& e) {
    std::cerr << kTool << ": " << e.what() << '\n';
    return 1;
  }
  return kOk;
}
