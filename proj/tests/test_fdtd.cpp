#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "eotsim/fdtd.hpp"

using namespace eotsim::fdtd;
using eotsim::NumericalInstabilityError;

namespace {

DeviceStack vacuum_slab_stack(double pitch_nm) {
  DeviceStack stack;
  stack.substrate = eotsim::materials::library::vacuum();
  stack.ito = eotsim::materials::library::vacuum();
  stack.ito_thickness_nm = 0.0;
  stack.film = eotsim::materials::library::vacuum();
  stack.superstrate = eotsim::materials::library::vacuum();
  stack.hole.reset();
  stack.pitch_nm = pitch_nm;
  return stack;
}

}  // namespace

TEST_CASE("a vacuum pulse flies between two probes at light speed") {
  SimulationGrid grid;
  grid.dx_nm = grid.dy_nm = grid.dz_nm = 5.0;
  grid.nx = grid.ny = 2;
  grid.nz = 900;
  grid.pml_cells = 10;

  VoxelGrid vox;
  vox.nx = grid.nx;
  vox.ny = grid.ny;
  vox.nz = grid.nz;
  vox.material.assign(static_cast<std::size_t>(grid.nx) * grid.ny * grid.nz, 0);
  vox.table = {eotsim::materials::library::vacuum()};

  Simulation sim(grid, vox);
  SourceSpec source;
  const int k_src = 860;
  const int k_near = 700;
  const int k_far = 200;
  sim.set_plane_source(k_src, source);

  // Energy centroid of the passing pulse at each probe; the difference is a
  // pure time of flight, independent of the source transfer function.
  double w_near = 0.0, tw_near = 0.0, w_far = 0.0, tw_far = 0.0;
  for (long n = 0; n < 12000; ++n) {
    sim.step();
    const double a = sim.probe_ex(0, 0, k_near);
    const double b = sim.probe_ex(0, 0, k_far);
    w_near += a * a;
    tw_near += a * a * sim.time_s();
    w_far += b * b;
    tw_far += b * b * sim.time_s();
  }
  REQUIRE(w_near > 0.0);
  REQUIRE(w_far > 0.0);
  const double flight = tw_far / w_far - tw_near / w_near;
  const double expected =
      (k_near - k_far) * grid.dz_nm * 1e-9 / eotsim::materials::kSpeedOfLight;
  CHECK(std::abs(flight - expected) < 0.01 * expected);
}

TEST_CASE("empty grid normalizes to unit transmission") {
  const auto stack = vacuum_slab_stack(20.0);
  GridSpec spec;
  spec.dx_nm = spec.dy_nm = spec.dz_nm = 10.0;

  std::vector<double> wavelengths;
  for (double wl = 450.0; wl <= 950.0; wl += 50.0) {
    wavelengths.push_back(wl);
  }
  SourceSpec source;
  source.lambda_min_nm = 420.0;
  source.lambda_max_nm = 980.0;
  RunPolicy policy;
  const auto spectrum = run_transmission(stack, spec, source, wavelengths, policy);
  for (std::size_t l = 0; l < wavelengths.size(); ++l) {
    CHECK(spectrum.transmission[l] == doctest::Approx(1.0).epsilon(0.01));
    CHECK(std::abs(spectrum.reflection[l]) < 0.01);
  }
  CHECK(spectrum.structure_status.converged);
}

TEST_CASE("closed vacuum box conserves field energy after the source stops") {
  SimulationGrid grid;
  grid.dx_nm = grid.dy_nm = grid.dz_nm = 5.0;
  grid.nx = grid.ny = 2;
  grid.nz = 256;
  grid.pml_cells = 0;  // periodic z: a closed universe

  VoxelGrid vox;
  vox.nx = grid.nx;
  vox.ny = grid.ny;
  vox.nz = grid.nz;
  vox.material.assign(static_cast<std::size_t>(grid.nx) * grid.ny * grid.nz, 0);
  vox.table = {eotsim::materials::library::vacuum()};

  Simulation sim(grid, vox);
  SourceSpec source;
  sim.set_plane_source(128, source);

  const double f_lo = eotsim::materials::kSpeedOfLight / (source.lambda_max_nm * 1e-9);
  const double f_hi = eotsim::materials::kSpeedOfLight / (source.lambda_min_nm * 1e-9);
  const double df = 0.5 * (f_hi - f_lo);
  const double tau = std::sqrt(std::log(10.0)) / (M_PI * df * std::sqrt(2.0));
  const double t_off = 14.0 * tau;
  while (sim.time_s() < t_off) {
    sim.step();
  }
  // The leapfrog invariant pairs E^n with H^(n-1/2) . H^(n+1/2); that is the
  // quantity conserved exactly by the scheme.
  const int cells = grid.nx * grid.ny * grid.nz;
  std::vector<double> hx(cells), hy(cells), hz(cells);
  auto staggered_energy = [&]() {
    int c = 0;
    for (int k = 0; k < grid.nz; ++k) {
      for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i, ++c) {
          hx[c] = sim.field('X', i, j, k);
          hy[c] = sim.field('Y', i, j, k);
          hz[c] = sim.field('Z', i, j, k);
        }
      }
    }
    sim.step();
    double e2 = 0.0, hh = 0.0;
    c = 0;
    for (int k = 0; k < grid.nz; ++k) {
      for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i, ++c) {
          const double ex = sim.field('x', i, j, k);
          const double ey = sim.field('y', i, j, k);
          const double ez = sim.field('z', i, j, k);
          e2 += ex * ex + ey * ey + ez * ez;
          hh += hx[c] * sim.field('X', i, j, k) + hy[c] * sim.field('Y', i, j, k) +
                hz[c] * sim.field('Z', i, j, k);
        }
      }
    }
    return 0.5 * (eotsim::materials::kVacuumPermittivity * e2 +
                  eotsim::materials::kVacuumPermeability * hh);
  };
  const double e0 = staggered_energy();
  REQUIRE(e0 > 0.0);
  double worst = 0.0;
  for (int block = 0; block < 5; ++block) {
    for (int n = 0; n < 2000; ++n) {
      sim.step();
    }
    worst = std::max(worst, std::abs(staggered_energy() - e0) / e0);
  }
  CHECK(worst < 1e-3);
}

TEST_CASE("a time step beyond the stability bound aborts with a diagnostic") {
  auto stack = vacuum_slab_stack(20.0);
  GridSpec spec;
  spec.dx_nm = spec.dy_nm = spec.dz_nm = 10.0;
  SimulationGrid probe;
  probe.dx_nm = probe.dy_nm = probe.dz_nm = 10.0;
  probe.nx = probe.ny = probe.nz = 4;
  // Uniform lateral fields only probe the z-axis bound, so overshoot it
  // decisively rather than just exceeding the 3D limit.
  spec.dt_override_s = 2.5 * probe.courant_limit_s();

  SourceSpec source;
  RunPolicy policy;
  policy.check_every = 50;
  CHECK_THROWS_AS(run_transmission(stack, spec, source, {600.0}, policy),
                  NumericalInstabilityError);
}

TEST_CASE("identical jobs reproduce identical spectra across worker counts") {
  DeviceStack stack;  // metal film on the standard substrate, small lateral cell
  stack.hole.reset();
  stack.pitch_nm = 40.0;
  GridSpec spec;
  spec.dx_nm = spec.dy_nm = spec.dz_nm = 10.0;
  SourceSpec source;
  source.lambda_min_nm = 600.0;
  source.lambda_max_nm = 1000.0;
  const std::vector<double> wavelengths{700.0, 795.0, 900.0};

  RunPolicy policy;
  policy.workers = 1;
  const auto first = run_transmission(stack, spec, source, wavelengths, policy);
  const auto repeat = run_transmission(stack, spec, source, wavelengths, policy);
  policy.workers = 2;
  const auto wide = run_transmission(stack, spec, source, wavelengths, policy);
  policy.workers = 4;
  const auto wider = run_transmission(stack, spec, source, wavelengths, policy);

  for (std::size_t l = 0; l < wavelengths.size(); ++l) {
    CHECK(first.transmission[l] == repeat.transmission[l]);  // bitwise
    CHECK(std::abs(first.transmission[l] - wide.transmission[l]) <=
          1e-12 * std::abs(first.transmission[l]));
    CHECK(std::abs(first.transmission[l] - wider.transmission[l]) <=
          1e-12 * std::abs(first.transmission[l]));
  }
}

TEST_CASE("monitor wavelengths must sit inside the source band") {
  const auto stack = vacuum_slab_stack(20.0);
  GridSpec spec;
  spec.dx_nm = spec.dy_nm = spec.dz_nm = 10.0;
  SourceSpec source;
  source.lambda_min_nm = 500.0;
  source.lambda_max_nm = 900.0;
  RunPolicy policy;
  CHECK_THROWS_AS(run_transmission(stack, spec, source, {450.0}, policy),
                  std::invalid_argument);
}
