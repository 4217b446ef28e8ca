#include "redpatrol/maps.hpp"

namespace redpatrol {

namespace {

PatrolGraph grid5x4() {
  constexpr int cols = 5, rows = 4;
  constexpr double w = 10.0;
  std::vector<Edge> edges;
  std::vector<std::array<double, 2>> coords;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int v = r * cols + c;
      coords.push_back({c * w, r * w});
      if (c + 1 < cols) edges.push_back({v, v + 1, w});
      if (r + 1 < rows) edges.push_back({v, v + cols, w});
    }
  }
  return PatrolGraph(rows * cols, std::move(edges), std::move(coords));
}

PatrolGraph corridor12() {
  std::vector<Edge> edges;
  std::vector<std::array<double, 2>> coords;
  for (int v = 0; v < 8; ++v) {
    coords.push_back({v * 8.0, 0.0});
    if (v + 1 < 8) edges.push_back({v, v + 1, 8.0});
  }
  // Rooms off alternate sides of the corridor.
  const int doors[] = {1, 3, 5, 7};
  for (int i = 0; i < 4; ++i) {
    const int room = 8 + i;
    coords.push_back({doors[i] * 8.0, (i % 2 == 0) ? 6.0 : -6.0});
    edges.push_back({doors[i], room, 6.0});
  }
  return PatrolGraph(12, std::move(edges), std::move(coords));
}

PatrolGraph rings18() {
  constexpr int ring = 9;
  std::vector<Edge> edges;
  std::vector<std::array<double, 2>> coords(2 * ring);
  for (int k = 0; k < 2; ++k) {
    const int base = k * ring;
    for (int i = 0; i < ring; ++i) {
      edges.push_back({base + i, base + (i + 1) % ring, 8.0});
    }
  }
  edges.push_back({4, 9, 10.0});
  for (int i = 0; i < 2 * ring; ++i) {
    coords[i] = {static_cast<double>(i % ring) * 8.0, (i < ring) ? 0.0 : 20.0};
  }
  return PatrolGraph(2 * ring, std::move(edges), std::move(coords));
}

}  // namespace

const std::vector<std::string>& builtin_map_names() {
  static const std::vector<std::string> names{"grid5x4", "corridor12", "rings18"};
  return names;
}

std::optional<PatrolGraph> builtin_map(std::string_view name) {
  if (name == "grid5x4") return grid5x4();
  if (name == "corridor12") return corridor12();
  if (name == "rings18") return rings18();
  return std::nullopt;
}

PatrolGraph resolve_map(const std::string& name_or_path) {
  if (auto g = builtin_map(name_or_path)) return *std::move(g);
  return load_graph_file(name_or_path);
}

}  // namespace redpatrol
