#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "eotsim/materials.hpp"

namespace eotsim::fdtd {

// User-level grid parameters; cell counts are derived from the device stack.
struct GridSpec {
  double dx_nm = 5.0;
  double dy_nm = 5.0;
  double dz_nm = 5.0;
  double courant = 0.99;  // fraction of the 3D stability limit, in (0, 1)
  int pml_cells = 10;     // per z side; 0 selects periodic z (closed box)
  double air_gap_nm = 220.0;        // film top -> top PML
  double substrate_gap_nm = 200.0;  // bottom PML -> ITO bottom
  std::optional<double> dt_override_s;  // expert knob; may violate the CFL bound
};

struct SimulationGrid {
  double dx_nm = 5.0, dy_nm = 5.0, dz_nm = 5.0;
  int nx = 0, ny = 0, nz = 0;  // cell counts, nz includes PML
  double courant = 0.99;
  int pml_cells = 10;
  std::optional<double> dt_override_s;

  double courant_limit_s() const;  // c * sqrt(1/dx^2 + 1/dy^2 + 1/dz^2) inverse
  double dt_s() const;             // courant-scaled limit unless overridden
};

void validate_grid(const SimulationGrid& grid);

// Isosceles triangle hole, base along +x at orientation 0, apex towards +y,
// centroid on the unit-cell center. The orientation rotates the triangle
// counterclockwise in the plane.
struct TriangleHole {
  double base_nm = 200.0;
  double leg_nm = 288.0;
  double orientation_deg = 25.0;

  double height_nm() const;
};

// Layered stack, bottom to top: substrate (semi-infinite through the PML),
// ITO, metal film with the hole lattice, superstrate.
struct DeviceStack {
  materials::MaterialModel substrate = materials::library::borosilicate();
  materials::MaterialModel ito = materials::library::ito();
  double ito_thickness_nm = 20.0;
  materials::MaterialModel film = materials::library::silver();
  double film_thickness_nm = 80.0;
  materials::MaterialModel superstrate = materials::library::vacuum();
  std::optional<TriangleHole> hole = TriangleHole{};
  double pitch_nm = 400.0;
};

void validate_stack(const DeviceStack& stack);

// Resolved z layout (cell indices, bottom to top) plus the standard plane
// positions used by transmission runs.
struct StackLayout {
  SimulationGrid grid;
  int k_ito_lo = 0;   // first ITO cell
  int k_film_lo = 0;  // first film cell
  int k_film_hi = 0;  // one past the last film cell
  int k_transmit = 0;
  int k_reflect = 0;
  int k_source = 0;
  int k_map = 0;  // field-map plane (defaults to 10 nm below the film)
};

StackLayout make_layout(const DeviceStack& stack, const GridSpec& spec,
                        double map_offset_nm = -10.0);

// Voxelized material field, one id per Yee cell, assigned by cell-center
// point tests.
struct VoxelGrid {
  int nx = 0, ny = 0, nz = 0;
  std::vector<std::uint8_t> material;
  std::vector<materials::MaterialModel> table;

  std::uint8_t at(int i, int j, int k) const {
    return material[(static_cast<std::size_t>(k) * ny + j) * nx + i];
  }
  std::size_t count(std::uint8_t id) const;
};

enum class StructureVariant {
  vacuum,          // empty grid (normalization reference)
  substrate_only,  // substrate + ITO, no film
  bare_film,       // full stack without holes
  full             // full stack with the hole lattice
};

VoxelGrid build_geometry(const DeviceStack& stack, const StackLayout& layout,
                         StructureVariant variant = StructureVariant::full);

// Rasterized open area of the hole in one unit cell, in nm^2.
double rasterized_hole_area_nm2(const DeviceStack& stack, const StackLayout& layout);

double analytic_triangle_area_nm2(const TriangleHole& hole);

}  // namespace eotsim::fdtd
