#pragma once

#include <complex>
#include <memory>
#include <optional>
#include <vector>

#include "eotsim/device.hpp"
#include "eotsim/errors.hpp"

namespace eotsim::fdtd {

// Broadband Gaussian pulse covering [lambda_min, lambda_max], injected as a
// uniform soft current sheet (normal-incidence plane wave under the periodic
// lateral boundaries). polarization_deg = 0 puts E along +x, i.e. parallel
// to the triangle base at orientation 0; linear polarization is periodic in
// 180 degrees.
struct SourceSpec {
  double lambda_min_nm = 400.0;
  double lambda_max_nm = 1000.0;
  double polarization_deg = 0.0;
};

struct RunPolicy {
  double decay_threshold = 1e-5;  // stop when field amplitude falls to this fraction of peak
  long max_steps = 200000;
  int check_every = 200;
  int workers = 0;  // OpenMP thread cap; 0 keeps the runtime default
};

struct RunStatus {
  bool converged = true;  // false: max_steps hit with tail energy above threshold
  long steps = 0;
  double residual_field_fraction = 0.0;
};

// Running DFT of the tangential fields on one z-plane, one set of complex
// amplitudes per requested wavelength. E samples carry phase exp(-i w t_E),
// H samples exp(-i w t_H) with their half-step offset, so fluxes assembled
// from one run are directly comparable with any other run of the same
// source. An empty-grid run divided by itself yields transmission 1 by
// construction.
struct DftPlane {
  int k = -1;
  int nx = 0, ny = 0;
  bool with_ez = false;
  std::vector<double> wavelengths_nm;
  // [lambda][j*nx + i]
  std::vector<std::complex<double>> ex, ey, hx, hy, ez;

  std::size_t cells() const { return static_cast<std::size_t>(nx) * ny; }
  // Time-averaged +z Poynting flux at one wavelength (arbitrary units).
  double flux(std::size_t lambda_index, double dx_nm, double dy_nm) const;
};

// +z flux of the linear combination c*a + s*b (polarization basis synthesis).
double combined_flux(const DftPlane& a, const DftPlane& b, double c, double s,
                     std::size_t lambda_index, double dx_nm, double dy_nm);

class Simulation {
 public:
  Simulation(const SimulationGrid& grid, const VoxelGrid& voxels);
  ~Simulation();
  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  void set_plane_source(int k_source, const SourceSpec& source);
  int add_flux_plane(int k, std::vector<double> wavelengths_nm);
  int add_map_plane(int k, std::vector<double> wavelengths_nm);

  // Advances one full leapfrog step (E then H) including sources, dispersive
  // currents, PML and monitor accumulation. Throws NumericalInstabilityError
  // when fields stop being finite.
  void step();

  RunStatus run(const RunPolicy& policy);

  const DftPlane& plane(int handle) const;
  double time_s() const;
  double dt_s() const;
  long steps_done() const { return step_count_; }
  const SimulationGrid& grid() const;

  // Test hooks.
  double total_field_energy() const;  // sum of eps/2 E^2 + mu/2 H^2 over the grid
  double& field(char component, int i, int j, int k);  // 'x','y','z' -> E; 'X','Y','Z' -> H
  double probe_ex(int i, int j, int k) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  long step_count_ = 0;
};

struct TransmissionSpectrum {
  std::vector<double> wavelengths_nm;
  std::vector<double> transmission;
  std::vector<double> reflection;
  std::vector<bool> overshoot;  // T above 1 (flagged, tolerated up to 1.05)
  RunStatus structure_status;
  RunStatus normalization_status;
  std::string normalization = "vacuum";
};

enum class NormalizationKind { vacuum, substrate };

// Runs the normalization reference and the structure, returning
// T(lambda) = structure flux / reference flux at the transmission plane and
// the reflectance extracted by subtracting the incident DFT fields at the
// reflection plane. T above 1.05 raises NumericalInstabilityError.
TransmissionSpectrum run_transmission(const DeviceStack& stack, const GridSpec& spec,
                                      const SourceSpec& source,
                                      const std::vector<double>& wavelengths_nm,
                                      const RunPolicy& policy,
                                      StructureVariant variant = StructureVariant::full,
                                      NormalizationKind normalization = NormalizationKind::vacuum);

struct FieldMap {
  int nx = 0, ny = 0;
  double dx_nm = 0.0, dy_nm = 0.0;
  double wavelength_nm = 0.0;
  double z_offset_nm = 0.0;  // relative to the film bottom face
  // Cell-centered complex amplitudes normalized by the mean incident
  // amplitude of the empty-grid reference at the same plane.
  std::vector<std::complex<double>> ex, ey, ez;
  std::vector<double> magnitude;  // |E| per cell

  RunStatus structure_status;
};

FieldMap run_field_map(const DeviceStack& stack, const GridSpec& spec, const SourceSpec& source,
                       double wavelength_nm, const RunPolicy& policy,
                       double z_offset_nm = -10.0);

// Center crop to a window_nm x window_nm region.
FieldMap crop_field_map(const FieldMap& map, double window_nm);

}  // namespace eotsim::fdtd
