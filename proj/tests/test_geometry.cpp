#include <doctest.h>

#include <limits>
#include <vector>

#include "braindec/errors.hpp"
#include "braindec/geometry.hpp"
#include "braindec/rng.hpp"

using namespace braindec;

namespace {

// Independent oracle: exhaustive Bellman-Ford style relaxation.
Matrix relaxation_oracle(int v, const std::vector<Edge>& edges) {
  const double inf = std::numeric_limits<double>::infinity();
  Matrix dist = Matrix::Constant(v, v, inf);
  for (int i = 0; i < v; ++i) dist(i, i) = 0.0;
  for (const Edge& e : edges) {
    dist(e.a, e.b) = std::min(dist(e.a, e.b), e.length);
    dist(e.b, e.a) = std::min(dist(e.b, e.a), e.length);
  }
  for (int round = 0; round < v; ++round) {
    for (int src = 0; src < v; ++src) {
      for (const Edge& e : edges) {
        dist(src, e.b) = std::min(dist(src, e.b), dist(src, e.a) + e.length);
        dist(src, e.a) = std::min(dist(src, e.a), dist(src, e.b) + e.length);
      }
    }
  }
  return dist;
}

}  // namespace

TEST_CASE("2x2 grid: opposite corners are two unit edges apart") {
  const Geometry g = grid_geometry(2, 2, 1.0);
  CHECK(g.num_vertices() == 4);
  CHECK(g.distances(0, 3) == 2.0);  // (0,0) -> (1,1)
  CHECK(g.distances(1, 2) == 2.0);
  CHECK(g.weights.sum() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("singleton grid") {
  const Geometry g = grid_geometry(1, 1, 1.0);
  CHECK(g.num_vertices() == 1);
  CHECK(g.distances(0, 0) == 0.0);
  CHECK(g.weights[0] == 1.0);
}

TEST_CASE("3x1 path graph") {
  const Geometry g = grid_geometry(3, 1, 1.0);
  CHECK(g.distances(0, 2) == 2.0);
  for (int i = 0; i < 3; ++i) CHECK(g.weights[i] == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("triangle with unit edges") {
  const Matrix d = shortest_path_distances(3, {{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 1.0}});
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) CHECK(d(i, j) == (i == j ? 0.0 : 1.0));
  }
}

TEST_CASE("square without diagonal: opposite corners at 2") {
  const Matrix d = shortest_path_distances(4, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}, {3, 0, 1.0}});
  CHECK(d(0, 2) == 2.0);
  CHECK(d(1, 3) == 2.0);
}

TEST_CASE("random connected graph matches the exhaustive relaxation oracle") {
  Rng rng(42);
  for (int rep = 0; rep < 10; ++rep) {
    const int v = 10;
    std::vector<Edge> edges;
    for (int i = 1; i < v; ++i) {  // random spanning tree keeps it connected
      const int parent = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(i)));
      edges.push_back({parent, i, 0.1 + rng.next_double()});
    }
    for (int extra = 0; extra < 8; ++extra) {
      const int a = static_cast<int>(rng.next_below(v));
      const int b = static_cast<int>(rng.next_below(v));
      if (a != b) edges.push_back({a, b, 0.1 + rng.next_double()});
    }
    const Matrix fast = shortest_path_distances(v, edges);
    const Matrix oracle = relaxation_oracle(v, edges);
    CHECK((fast - oracle).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("triangle inequality holds exhaustively") {
  const Geometry g = grid_geometry(5, 6, 0.7);
  const Index v = g.num_vertices();
  for (Index i = 0; i < v; ++i) {
    for (Index j = 0; j < v; ++j) {
      for (Index k = 0; k < v; ++k) {
        CHECK(g.distances(i, j) <= g.distances(i, k) + g.distances(k, j) + 1e-9);
      }
    }
  }
}

TEST_CASE("grid distances are exactly invariant under 180-degree rotation") {
  const Geometry g = grid_geometry(4, 5, 1.3);
  const int v = static_cast<int>(g.num_vertices());
  for (int i = 0; i < v; ++i) {
    for (int j = 0; j < v; ++j) {
      CHECK(g.distances(i, j) == g.distances(grid_rotation180(i, v), grid_rotation180(j, v)));
    }
  }
}

TEST_CASE("disconnected graph names an unreachable pair") {
  CHECK_THROWS_WITH_AS(shortest_path_distances(3, {{0, 1, 1.0}}),
                       doctest::Contains("no path between vertices"), ValidationError);
}

TEST_CASE("zero grid dimensions are rejected") {
  CHECK_THROWS_AS(grid_geometry(0, 3, 1.0), ValidationError);
  CHECK_THROWS_AS(grid_geometry(3, 0, 1.0), ValidationError);
}

TEST_CASE("validate_geometry rejects broken invariants") {
  Geometry g = grid_geometry(2, 2, 1.0);
  CHECK_NOTHROW(validate_geometry(g));

  Geometry bad = g;
  bad.distances(0, 1) = -1.0;
  CHECK_THROWS_AS(validate_geometry(bad), ValidationError);

  bad = g;
  bad.weights[0] += 0.5;
  CHECK_THROWS_AS(validate_geometry(bad), ValidationError);

  bad = g;
  bad.distances(1, 1) = 0.2;
  CHECK_THROWS_AS(validate_geometry(bad), ValidationError);
}
