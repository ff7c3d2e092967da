#include "eotsim/device.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace eotsim::fdtd {

namespace {

int round_cells(double length_nm, double d_nm) {
  return static_cast<int>(std::llround(length_nm / d_nm));
}

struct Triangle2D {
  double ax, ay, bx, by, cx, cy;

  bool contains(double x, double y) const {
    const double d1 = (x - bx) * (ay - by) - (ax - bx) * (y - by);
    const double d2 = (x - cx) * (by - cy) - (bx - cx) * (y - cy);
    const double d3 = (x - ax) * (cy - ay) - (cx - ax) * (y - ay);
    const bool has_neg = (d1 < 0) || (d2 < 0) || (d3 < 0);
    const bool has_pos = (d1 > 0) || (d2 > 0) || (d3 > 0);
    return !(has_neg && has_pos);
  }
};

Triangle2D place_triangle(const TriangleHole& hole, double pitch_nm) {
  const double h = hole.height_nm();
  const double rad = hole.orientation_deg * std::numbers::pi / 180.0;
  const double c = std::cos(rad);
  const double s = std::sin(rad);
  const double cx0 = pitch_nm / 2.0;
  const double cy0 = pitch_nm / 2.0;
  auto rot = [&](double x, double y, double& ox, double& oy) {
    ox = cx0 + c * x - s * y;
    oy = cy0 + s * x + c * y;
  };
  Triangle2D t{};
  rot(-hole.base_nm / 2.0, -h / 3.0, t.ax, t.ay);
  rot(hole.base_nm / 2.0, -h / 3.0, t.bx, t.by);
  rot(0.0, 2.0 * h / 3.0, t.cx, t.cy);
  return t;
}

}  // namespace

double SimulationGrid::courant_limit_s() const {
  const double dx = dx_nm * 1e-9, dy = dy_nm * 1e-9, dz = dz_nm * 1e-9;
  return 1.0 / (materials::kSpeedOfLight *
                std::sqrt(1.0 / (dx * dx) + 1.0 / (dy * dy) + 1.0 / (dz * dz)));
}

double SimulationGrid::dt_s() const {
  if (dt_override_s) {
    return *dt_override_s;
  }
  return courant * courant_limit_s();
}

void validate_grid(const SimulationGrid& grid) {
  if (!(grid.dx_nm > 0 && grid.dy_nm > 0 && grid.dz_nm > 0)) {
    throw std::invalid_argument("grid spacing must be positive");
  }
  if (!(grid.courant > 0.0 && grid.courant < 1.0)) {
    throw std::invalid_argument("courant factor must lie in (0, 1)");
  }
  if (grid.nx < 1 || grid.ny < 1 || grid.nz < 3) {
    throw std::invalid_argument("grid extents too small");
  }
  if (grid.pml_cells < 0 || 2 * grid.pml_cells >= grid.nz) {
    throw std::invalid_argument("PML does not fit into the grid");
  }
  if (grid.dt_override_s && !(*grid.dt_override_s > 0.0)) {
    throw std::invalid_argument("time step override must be positive");
  }
}

double TriangleHole::height_nm() const {
  const double half_base = base_nm / 2.0;
  return std::sqrt(leg_nm * leg_nm - half_base * half_base);
}

void validate_stack(const DeviceStack& stack) {
  if (!(stack.pitch_nm > 0.0)) {
    throw std::invalid_argument("lattice pitch must be positive");
  }
  if (!(stack.film_thickness_nm > 0.0) || stack.ito_thickness_nm < 0.0) {
    throw std::invalid_argument("layer thicknesses must be non-negative (film positive)");
  }
  if (stack.hole) {
    const auto& hole = *stack.hole;
    if (!(hole.base_nm > 0.0) || !(hole.leg_nm > 0.0)) {
      throw std::invalid_argument("triangle dimensions must be positive");
    }
    if (hole.leg_nm < hole.base_nm / 2.0) {
      throw std::invalid_argument("triangle legs shorter than half the base");
    }
    if (hole.base_nm > stack.pitch_nm) {
      throw std::invalid_argument("triangle base exceeds the lattice pitch");
    }
    if (hole.height_nm() > stack.pitch_nm) {
      throw std::invalid_argument("triangle height exceeds the lattice pitch");
    }
  }
}

StackLayout make_layout(const DeviceStack& stack, const GridSpec& spec,
                        double map_offset_nm) {
  validate_stack(stack);
  StackLayout layout;
  auto& g = layout.grid;
  g.dx_nm = spec.dx_nm;
  g.dy_nm = spec.dy_nm;
  g.dz_nm = spec.dz_nm;
  g.courant = spec.courant;
  g.pml_cells = spec.pml_cells;
  g.dt_override_s = spec.dt_override_s;

  g.nx = round_cells(stack.pitch_nm, spec.dx_nm);
  g.ny = round_cells(stack.pitch_nm, spec.dy_nm);
  if (g.nx < 1 || g.ny < 1 || std::abs(g.nx * spec.dx_nm - stack.pitch_nm) > 1e-9 ||
      std::abs(g.ny * spec.dy_nm - stack.pitch_nm) > 1e-9) {
    throw std::invalid_argument("lateral extents must span exactly one lattice period");
  }

  const int n_sub = round_cells(spec.substrate_gap_nm, spec.dz_nm);
  const int n_ito = round_cells(stack.ito_thickness_nm, spec.dz_nm);
  const int n_film = round_cells(stack.film_thickness_nm, spec.dz_nm);
  const int n_air = round_cells(spec.air_gap_nm, spec.dz_nm);
  if (n_film < 2) {
    throw std::invalid_argument("film thinner than 2 cells at this resolution");
  }

  layout.k_ito_lo = spec.pml_cells + n_sub;
  layout.k_film_lo = layout.k_ito_lo + n_ito;
  layout.k_film_hi = layout.k_film_lo + n_film;
  g.nz = layout.k_film_hi + n_air + spec.pml_cells;

  const int gap_t = std::max(3, round_cells(80.0, spec.dz_nm));
  const int gap_r = std::max(3, round_cells(100.0, spec.dz_nm));
  const int gap_s = std::max(6, round_cells(180.0, spec.dz_nm));
  layout.k_transmit = spec.pml_cells + gap_t;
  layout.k_reflect = layout.k_film_hi + gap_r;
  layout.k_source = layout.k_film_hi + gap_s;
  layout.k_map = layout.k_film_lo + round_cells(map_offset_nm, spec.dz_nm);

  if (layout.k_transmit >= layout.k_ito_lo || layout.k_source >= g.nz - spec.pml_cells - 1 ||
      layout.k_reflect >= layout.k_source || layout.k_map < 1) {
    throw std::invalid_argument("stack margins too small for monitors and source");
  }
  validate_grid(g);
  return layout;
}

std::size_t VoxelGrid::count(std::uint8_t id) const {
  std::size_t n = 0;
  for (const auto v : material) {
    n += (v == id);
  }
  return n;
}

VoxelGrid build_geometry(const DeviceStack& stack, const StackLayout& layout,
                         StructureVariant variant) {
  validate_stack(stack);
  const auto& g = layout.grid;
  VoxelGrid vox;
  vox.nx = g.nx;
  vox.ny = g.ny;
  vox.nz = g.nz;
  vox.material.assign(static_cast<std::size_t>(g.nx) * g.ny * g.nz, 0);

  // id 0 = superstrate, 1 = substrate, 2 = ITO, 3 = film
  vox.table = {stack.superstrate, stack.substrate, stack.ito, stack.film};
  for (const auto& m : vox.table) {
    materials::validate_material(m);
  }
  if (variant == StructureVariant::vacuum) {
    vox.table[1] = vox.table[2] = vox.table[3] = stack.superstrate;
  } else if (variant == StructureVariant::substrate_only) {
    vox.table[3] = stack.superstrate;
  }

  const bool with_hole = (variant == StructureVariant::full) && stack.hole.has_value();
  Triangle2D tri{};
  if (with_hole) {
    tri = place_triangle(*stack.hole, stack.pitch_nm);
  }

  for (int k = 0; k < g.nz; ++k) {
    std::uint8_t id;
    if (k < layout.k_ito_lo) {
      id = 1;
    } else if (k < layout.k_film_lo) {
      id = 2;
    } else if (k < layout.k_film_hi) {
      id = 3;
    } else {
      id = 0;
    }
    for (int j = 0; j < g.ny; ++j) {
      const double y = (j + 0.5) * g.dy_nm;
      for (int i = 0; i < g.nx; ++i) {
        std::uint8_t cell = id;
        if (id == 3 && with_hole) {
          const double x = (i + 0.5) * g.dx_nm;
          if (tri.contains(x, y)) {
            cell = 0;  // hole filled with superstrate
          }
        }
        vox.material[(static_cast<std::size_t>(k) * g.ny + j) * g.nx + i] = cell;
      }
    }
  }
  return vox;
}

double rasterized_hole_area_nm2(const DeviceStack& stack, const StackLayout& layout) {
  if (!stack.hole) {
    return 0.0;
  }
  const auto& g = layout.grid;
  const Triangle2D tri = place_triangle(*stack.hole, stack.pitch_nm);
  std::size_t inside = 0;
  for (int j = 0; j < g.ny; ++j) {
    const double y = (j + 0.5) * g.dy_nm;
    for (int i = 0; i < g.nx; ++i) {
      const double x = (i + 0.5) * g.dx_nm;
      inside += tri.contains(x, y);
    }
  }
  return static_cast<double>(inside) * g.dx_nm * g.dy_nm;
}

double analytic_triangle_area_nm2(const TriangleHole& hole) {
  return 0.5 * hole.base_nm * hole.height_nm();
}

}  // namespace eotsim::fdtd
