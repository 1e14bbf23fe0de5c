#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"
#include "zscan/model.hpp"

namespace zscan {

// Serialized form:
//   {"n": 4, "points": [{"lines": [1,2], "on_conic": true, "tangent_line": 1}, ...]}
// Points appear in normalized order, lines sorted ascending, and a missing
// tangency is an explicit null.
nlohmann::json to_json(const Arrangement& a);

// Accepts the format above (tangent_line may be absent instead of null) and
// runs full validation, so the result is normalized no matter how the input
// was ordered.
Arrangement arrangement_from_json(const nlohmann::json& j);

Arrangement load_arrangement(const std::filesystem::path& path);

// Writes pretty-printed JSON with a trailing newline.
void save_json(const nlohmann::json& j, const std::filesystem::path& path);

}  // namespace zscan
