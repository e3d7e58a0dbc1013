#pragma once

#include <optional>
#include <vector>

#include "braindec/types.hpp"

namespace braindec {

struct GridShape {
  int width = 0;
  int height = 0;
  double spacing = 1.0;
};

// Per-subject anatomical geometry: pairwise geodesic distances between
// vertices and a probability weight per vertex.
struct Geometry {
  Matrix distances;  // v x v, symmetric, zero diagonal
  Vector weights;    // length v, nonnegative, sums to 1
  std::optional<GridShape> grid;  // set when built from a rectangular lattice

  Index num_vertices() const { return weights.size(); }
};

struct Edge {
  int a = 0;
  int b = 0;
  double length = 0.0;
};

/// Exact all-pairs shortest-path lengths on a connected undirected graph
/// with positive edge lengths. Throws naming an unreachable pair otherwise.
Matrix shortest_path_distances(int num_vertices, const std::vector<Edge>& edges);

/// Rectangular lattice with 4-neighbor edges of the given spacing and
/// uniform vertex weights. Vertex index = y * width + x.
Geometry grid_geometry(int width, int height, double spacing);

/// 180-degree rotation of the lattice, an exact isometry of grid_geometry:
/// index i maps to v - 1 - i.
inline int grid_rotation180(int vertex, int num_vertices) { return num_vertices - 1 - vertex; }

/// Checks the Geometry invariants (symmetry, zero diagonal, nonnegative
/// finite distances, weights forming a distribution). Throws on violation.
void validate_geometry(const Geometry& g);

}  // namespace braindec
