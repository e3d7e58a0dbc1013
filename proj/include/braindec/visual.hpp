#pragma once

#include <filesystem>

#include "braindec/fugw.hpp"
#include "braindec/geometry.hpp"
#include "braindec/types.hpp"

namespace braindec {

/// Coordinate-based RGB ramp over a lattice: red follows x, green follows y,
/// blue fades with distance from the grid center.
Matrix default_grid_colormap(const GridShape& grid);

/// Binary P6 raster with maxval 255; rgb rows follow the lattice vertex
/// order (index = y * width + x).
void write_ppm(const std::filesystem::path& path, const Matrix& rgb, int width, int height);

void write_colormap_csv(const std::filesystem::path& path, const Matrix& rgb);

struct PlanVisualPaths {
  std::filesystem::path csv;
  std::filesystem::path ppm;
};

/// Transports a colormap through the plan and writes it as CSV plus a PPM
/// raster laid out on the reference grid.
PlanVisualPaths export_plan_visual(const TransportPlan& plan, const Geometry& geom_ref,
                                   const Matrix& colormap_out, const std::filesystem::path& out_dir,
                                   bool allow_dead_vertices = false);

}  // namespace braindec
