#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "redpatrol/graph.hpp"

namespace redpatrol {

// Desk-scale maps shipped with the tools:
//   grid5x4     20 vertices, 4-connected grid, 10 s edges
//   corridor12  8-vertex corridor with 4 side rooms
//   rings18     two 9-vertex rings joined by one link
const std::vector<std::string>& builtin_map_names();
std::optional<PatrolGraph> builtin_map(std::string_view name);

// A builtin name, or otherwise a path to a graph JSON file.
PatrolGraph resolve_map(const std::string& name_or_path);

}  // namespace redpatrol
