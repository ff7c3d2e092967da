#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "eotsim/fdtd.hpp"
#include "eotsim/loss_chain.hpp"

namespace eotsim::scenarios {

struct PolarizationSweep {
  std::vector<double> angles_deg;       // strictly increasing
  double wavelength_nm = 795.0;
  std::vector<double> transmission;     // one value per angle
  std::vector<std::string> status;      // "ok" or the per-angle failure reason
  std::uint64_t config_hash = 0;
};

enum class SweepMethod {
  basis,   // two orthogonal-polarization runs, angles synthesized by linearity
  direct,  // one run per angle
};

// Single-color transmission versus incident polarization. The basis method
// exploits the linearity of Maxwell's equations: the transmitted DFT fields
// at angle theta are cos(theta) * (x run) + sin(theta) * (y run), so the
// whole sweep costs two structure runs and is exactly 180-degree periodic.
PolarizationSweep sweep_polarization(const fdtd::DeviceStack& stack, const fdtd::GridSpec& spec,
                                     const std::vector<double>& angles_deg,
                                     double wavelength_nm, const fdtd::RunPolicy& policy,
                                     SweepMethod method = SweepMethod::basis);

// T(theta, lambda) synthesized from the same two basis runs; used for
// spectra at arbitrary polarization without extra solves.
struct BasisSpectra {
  std::vector<double> wavelengths_nm;
  fdtd::DftPlane x_plane, y_plane, reference;
  double dx_nm = 0.0, dy_nm = 0.0;
  fdtd::RunStatus status;

  double transmission(double angle_deg, std::size_t lambda_index) const;
};

BasisSpectra run_basis_spectra(const fdtd::DeviceStack& stack, const fdtd::GridSpec& spec,
                               double lambda_min_nm, double lambda_max_nm,
                               const std::vector<double>& wavelengths_nm,
                               const fdtd::RunPolicy& policy);

struct SqueezingCurve {
  enum class Axis { transmission, polarization_deg };
  Axis axis = Axis::transmission;
  std::vector<double> x;
  std::vector<double> squeezing_db;  // relative to the 0 dB shot-noise reference
  std::uint64_t config_hash = 0;
};

// Closed-form squeezing per sweep angle: the chain's "eot" slot is filled
// with the swept transmission before evaluation.
SqueezingCurve predict_squeezing_vs_polarization(const PolarizationSweep& sweep,
                                                 const chain::LossChain& chain_template,
                                                 double gain,
                                                 const std::string& eot_element = "eot");

// Pure closed-form reference curve over a transmission axis.
SqueezingCurve nd_comparison_curve(const std::vector<double>& etas, double gain);

}  // namespace eotsim::scenarios
