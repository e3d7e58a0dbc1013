#include "braindec/visual.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>

#include "braindec/errors.hpp"
#include "braindec/transport.hpp"

namespace braindec {

Matrix default_grid_colormap(const GridShape& grid) {
  if (grid.width < 1 || grid.height < 1) throw ValidationError("colormap: grid dimensions must be >= 1");
  const int v = grid.width * grid.height;
  Matrix rgb(v, 3);
  const double cx = (grid.width - 1) / 2.0;
  const double cy = (grid.height - 1) / 2.0;
  const double max_r = std::max(1.0, std::hypot(cx, cy));
  for (int y = 0; y < grid.height; ++y) {
    for (int x = 0; x < grid.width; ++x) {
      const int i = y * grid.width + x;
      rgb(i, 0) = grid.width > 1 ? static_cast<double>(x) / (grid.width - 1) : 0.5;
      rgb(i, 1) = grid.height > 1 ? static_cast<double>(y) / (grid.height - 1) : 0.5;
      rgb(i, 2) = 1.0 - std::hypot(x - cx, y - cy) / max_r;
    }
  }
  return rgb;
}

void write_ppm(const std::filesystem::path& path, const Matrix& rgb, int width, int height) {
  if (rgb.cols() != 3) throw ValidationError("write_ppm: expected a v x 3 color matrix");
  if (rgb.rows() != static_cast<Index>(width) * height) {
    throw ValidationError("write_ppm: color rows do not match width * height");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "P6\n" << width << " " << height << "\n255\n";
  for (Index i = 0; i < rgb.rows(); ++i) {
    for (int c = 0; c < 3; ++c) {
      const double clamped = std::min(1.0, std::max(0.0, rgb(i, c)));
      out.put(static_cast<char>(static_cast<std::uint8_t>(std::lround(clamped * 255.0))));
    }
  }
  if (!out.good()) throw IoError("write error: " + path.string());
}

void write_colormap_csv(const std::filesystem::path& path, const Matrix& rgb) {
  if (rgb.cols() != 3) throw ValidationError("write_colormap_csv: expected a v x 3 color matrix");
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "vertex,r,g,b\n";
  out.precision(17);
  for (Index i = 0; i < rgb.rows(); ++i) {
    out << i << ',' << rgb(i, 0) << ',' << rgb(i, 1) << ',' << rgb(i, 2) << '\n';
  }
  if (!out.good()) throw IoError("write error: " + path.string());
}

PlanVisualPaths export_plan_visual(const TransportPlan& plan, const Geometry& geom_ref,
                                   const Matrix& colormap_out, const std::filesystem::path& out_dir,
                                   bool allow_dead_vertices) {
  if (!geom_ref.grid) throw ValidationError("export_plan_visual: reference geometry carries no grid layout");
  if (plan.plan.cols() != geom_ref.num_vertices()) {
    throw ValidationError("export_plan_visual: plan does not target the reference geometry");
  }
  const Matrix transported = transport_colormap(plan, colormap_out, allow_dead_vertices);

  std::filesystem::create_directories(out_dir);
  PlanVisualPaths paths{out_dir / "transported_colormap.csv", out_dir / "transported_colormap.ppm"};
  write_colormap_csv(paths.csv, transported);
  write_ppm(paths.ppm, transported, geom_ref.grid->width, geom_ref.grid->height);
  return paths;
}

}  // namespace braindec
