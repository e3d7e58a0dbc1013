#include "braindec/geometry.hpp"

#include <cmath>
#include <limits>
#include <queue>
#include <string>

#include "braindec/errors.hpp"

namespace braindec {

Matrix shortest_path_distances(int num_vertices, const std::vector<Edge>& edges) {
  if (num_vertices < 1) throw ValidationError("shortest_path_distances: need at least one vertex");
  for (const Edge& e : edges) {
    if (e.a < 0 || e.a >= num_vertices || e.b < 0 || e.b >= num_vertices) {
      throw ValidationError("shortest_path_distances: edge endpoint out of range");
    }
    if (!(e.length > 0.0) || !std::isfinite(e.length)) {
      throw ValidationError("shortest_path_distances: edge lengths must be positive and finite");
    }
  }

  std::vector<std::vector<std::pair<int, double>>> adj(static_cast<std::size_t>(num_vertices));
  for (const Edge& e : edges) {
    adj[static_cast<std::size_t>(e.a)].emplace_back(e.b, e.length);
    adj[static_cast<std::size_t>(e.b)].emplace_back(e.a, e.length);
  }

  const double inf = std::numeric_limits<double>::infinity();
  Matrix dist = Matrix::Constant(num_vertices, num_vertices, inf);

  using Item = std::pair<double, int>;  // (distance, vertex), min-heap
  for (int src = 0; src < num_vertices; ++src) {
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
    dist(src, src) = 0.0;
    heap.emplace(0.0, src);
    while (!heap.empty()) {
      const auto [d, u] = heap.top();
      heap.pop();
      if (d > dist(src, u)) continue;
      for (const auto& [v, len] : adj[static_cast<std::size_t>(u)]) {
        const double cand = d + len;
        if (cand < dist(src, v)) {
          dist(src, v) = cand;
          heap.emplace(cand, v);
        }
      }
    }
    for (int j = 0; j < num_vertices; ++j) {
      if (!std::isfinite(dist(src, j))) {
        throw ValidationError("shortest_path_distances: graph is disconnected, no path between vertices " +
                              std::to_string(src) + " and " + std::to_string(j));
      }
    }
  }

  // Per-source relaxations can disagree in the last ulp on heterogeneous
  // edge lengths; keep the smaller path sum so D is exactly symmetric.
  for (int i = 0; i < num_vertices; ++i) {
    for (int j = i + 1; j < num_vertices; ++j) {
      const double d = std::min(dist(i, j), dist(j, i));
      dist(i, j) = d;
      dist(j, i) = d;
    }
  }
  return dist;
}

Geometry grid_geometry(int width, int height, double spacing) {
  if (width < 1 || height < 1) throw ValidationError("grid_geometry: width and height must be >= 1");
  if (!(spacing > 0.0) || !std::isfinite(spacing)) throw ValidationError("grid_geometry: spacing must be positive");

  const int v = width * height;
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(2 * v));
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const int i = y * width + x;
      if (x + 1 < width) edges.push_back({i, i + 1, spacing});
      if (y + 1 < height) edges.push_back({i, i + width, spacing});
    }
  }

  Geometry g;
  g.distances = shortest_path_distances(v, edges);
  g.weights = Vector::Constant(v, 1.0 / static_cast<double>(v));
  g.grid = GridShape{width, height, spacing};
  return g;
}

void validate_geometry(const Geometry& g) {
  const Index v = g.weights.size();
  if (v < 1) throw ValidationError("geometry: empty vertex set");
  if (g.distances.rows() != v || g.distances.cols() != v) {
    throw ValidationError("geometry: distance matrix shape does not match weights");
  }
  if (!g.distances.allFinite()) throw ValidationError("geometry: non-finite distance");
  if ((g.distances.array() < 0.0).any()) throw ValidationError("geometry: negative distance");
  if (g.distances.diagonal().cwiseAbs().maxCoeff() != 0.0) throw ValidationError("geometry: nonzero diagonal");
  if (!g.distances.isApprox(g.distances.transpose(), 1e-9)) throw ValidationError("geometry: asymmetric distances");
  if ((g.weights.array() < 0.0).any()) throw ValidationError("geometry: negative vertex weight");
  if (std::abs(g.weights.sum() - 1.0) > 1e-12) throw ValidationError("geometry: vertex weights must sum to 1");
}

}  // namespace braindec
