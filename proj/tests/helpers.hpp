#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "zscan/json_io.hpp"
#include "zscan/model.hpp"

namespace zscan_test {

inline std::filesystem::path fixture_path(const std::string& name) {
  return std::filesystem::path(ZSCAN_FIXTURES_DIR) / name;
}

inline zscan::Arrangement load_fixture(const std::string& name) {
  return zscan::load_arrangement(fixture_path(name));
}

inline zscan::PointRecord rec(std::vector<zscan::LineId> lines,
                              bool on_conic = false,
                              std::optional<zscan::LineId> tangent = std::nullopt) {
  return {std::move(lines), on_conic, tangent};
}

// The four-line worked example, built in scrambled record order so tests do
// not depend on the fixture file or on normalization.
inline zscan::Arrangement sample_4_1() {
  return zscan::validate(4, {
                                rec({2, 4}),
                                rec({1, 2}, true, 1),
                                rec({3, 4}, true),
                                rec({1, 3}),
                                rec({4}, true),
                                rec({2, 3}, true),
                                rec({1, 4}),
                            });
}

inline zscan::Arrangement tangent_triangle_3_1() {
  return zscan::validate(3, {
                                rec({1}, true, 1),
                                rec({2}, true, 2),
                                rec({3}, true, 3),
                                rec({1, 2}),
                                rec({1, 3}),
                                rec({2, 3}),
                            });
}

// Three transverse lines whose pairwise intersections all lie on the conic.
inline zscan::Arrangement conic_triangle_3_1() {
  return zscan::validate(3, {
                                rec({1, 2}, true),
                                rec({1, 3}, true),
                                rec({2, 3}, true),
                            });
}

inline zscan::Arrangement conic_only() { return zscan::validate(0, {}); }

}  // namespace zscan_test
