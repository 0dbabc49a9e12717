#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "coa/scenario.hpp"

namespace testutil {

inline std::string data_path(const std::string& rel) { return std::string(COA_DATA_DIR) + "/" + rel; }

inline const coa::Scenario& bundled() {
  static const coa::Scenario s = coa::load_scenario(data_path("scenarios/delay14.json"));
  return s;
}

inline const coa::Scenario& mini() {
  static const coa::Scenario s = coa::load_scenario(data_path("scenarios/mini3.json"));
  return s;
}

// A line of boxes 1..n, 1 km apart, entry point before box 1 unless given.
inline nlohmann::json line_scenario(int n, int entry_box = 1) {
  nlohmann::json j;
  for (int i = 1; i <= n; ++i) j["boxes"].push_back({{"id", i}, {"x_m", 1000.0 * i}, {"y_m", 0.0}, {"area_m2", 1.0e6}});
  for (int i = 1; i < n; ++i) j["edges"].push_back({{"a", i}, {"b", i + 1}, {"road_m", 1000.0}});
  j["entry_points"].push_back({{"name", "Start"}, {"x_m", 0.0}, {"y_m", -1000.0}, {"connects_to", entry_box}, {"road_m", 1000.0}});
  j["red"] = nlohmann::json::array();
  j["blue_roster"].push_back({{"type_id", 2}, {"count", 4}});
  return j;
}

inline coa::Configuration config(std::vector<int> boxes) { return coa::Configuration{std::move(boxes), std::nullopt}; }

}  // namespace testutil
