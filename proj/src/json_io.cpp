#include "zscan/json_io.hpp"

#include <fstream>

namespace zscan {

nlohmann::json to_json(const Arrangement& a) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& p : a.points()) {
    nlohmann::json rec;
    rec["lines"] = p.lines;
    rec["on_conic"] = p.on_conic;
    rec["tangent_line"] = p.tangent_line ? nlohmann::json(*p.tangent_line)
                                         : nlohmann::json(nullptr);
    points.push_back(std::move(rec));
  }
  return nlohmann::json{{"n", a.line_count()}, {"points", std::move(points)}};
}

Arrangement arrangement_from_json(const nlohmann::json& j) {
  int n = j.at("n").get<int>();
  std::vector<PointRecord> pts;
  for (const auto& rec : j.at("points")) {
    PointRecord p;
    p.lines = rec.at("lines").get<std::vector<LineId>>();
    p.on_conic = rec.at("on_conic").get<bool>();
    if (rec.contains("tangent_line") && !rec.at("tangent_line").is_null()) {
      p.tangent_line = rec.at("tangent_line").get<LineId>();
    }
    pts.push_back(std::move(p));
  }
  return validate(n, std::move(pts));
}

Arrangement load_arrangement(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  nlohmann::json j;
  in >> j;
  return arrangement_from_json(j);
}

void save_json(const nlohmann::json& j, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  out << j.dump(2) << '\n';
  if (!out) {
    throw std::runtime_error("failed writing " + path.string());
  }
}

}  // namespace zscan
