#include "eotsim/scenarios.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace eotsim::scenarios {

namespace {

void check_angles(const std::vector<double>& angles) {
  if (angles.empty()) {
    throw std::invalid_argument("polarization sweep needs at least one angle");
  }
  for (std::size_t i = 1; i < angles.size(); ++i) {
    if (!(angles[i] > angles[i - 1])) {
      throw std::invalid_argument("sweep angles must be strictly increasing");
    }
  }
}

}  // namespace

BasisSpectra run_basis_spectra(const fdtd::DeviceStack& stack, const fdtd::GridSpec& spec,
                               double lambda_min_nm, double lambda_max_nm,
                               const std::vector<double>& wavelengths_nm,
                               const fdtd::RunPolicy& policy) {
  const fdtd::StackLayout layout = fdtd::make_layout(stack, spec);
  fdtd::SourceSpec source;
  source.lambda_min_nm = lambda_min_nm;
  source.lambda_max_nm = lambda_max_nm;

  BasisSpectra out;
  out.wavelengths_nm = wavelengths_nm;
  out.dx_nm = spec.dx_nm;
  out.dy_nm = spec.dy_nm;

  {
    fdtd::Simulation vac(layout.grid,
                         fdtd::build_geometry(stack, layout, fdtd::StructureVariant::vacuum));
    source.polarization_deg = 0.0;
    vac.set_plane_source(layout.k_source, source);
    const int h = vac.add_flux_plane(layout.k_transmit, wavelengths_nm);
    out.status = vac.run(policy);
    out.reference = vac.plane(h);
  }
  {
    fdtd::Simulation sx(layout.grid, fdtd::build_geometry(stack, layout));
    source.polarization_deg = 0.0;
    sx.set_plane_source(layout.k_source, source);
    const int h = sx.add_flux_plane(layout.k_transmit, wavelengths_nm);
    const auto st = sx.run(policy);
    out.status.converged = out.status.converged && st.converged;
    out.status.steps += st.steps;
    out.x_plane = sx.plane(h);
  }
  {
    fdtd::Simulation sy(layout.grid, fdtd::build_geometry(stack, layout));
    source.polarization_deg = 90.0;
    sy.set_plane_source(layout.k_source, source);
    const int h = sy.add_flux_plane(layout.k_transmit, wavelengths_nm);
    const auto st = sy.run(policy);
    out.status.converged = out.status.converged && st.converged;
    out.status.steps += st.steps;
    out.y_plane = sy.plane(h);
  }
  return out;
}

double BasisSpectra::transmission(double angle_deg, std::size_t lambda_index) const {
  const double rad = angle_deg * std::numbers::pi / 180.0;
  const double c = std::cos(rad);
  const double s = std::sin(rad);
  const double f = fdtd::combined_flux(x_plane, y_plane, c, s, lambda_index, dx_nm, dy_nm);
  // The empty-grid reference flux is polarization independent (an x and a y
  // run are related by the grid's x/y symmetry and carry no cross flux).
  const double f0 = reference.flux(lambda_index, dx_nm, dy_nm);
  return f / f0;
}

PolarizationSweep sweep_polarization(const fdtd::DeviceStack& stack, const fdtd::GridSpec& spec,
                                     const std::vector<double>& angles_deg,
                                     double wavelength_nm, const fdtd::RunPolicy& policy,
                                     SweepMethod method) {
  check_angles(angles_deg);
  PolarizationSweep sweep;
  sweep.angles_deg = angles_deg;
  sweep.wavelength_nm = wavelength_nm;
  sweep.transmission.assign(angles_deg.size(), 0.0);
  sweep.status.assign(angles_deg.size(), "ok");

  if (method == SweepMethod::basis) {
    // Generous source band around the single color keeps the pulse short.
    const auto spectra = run_basis_spectra(stack, spec, wavelength_nm * 0.7,
                                           wavelength_nm * 1.4, {wavelength_nm}, policy);
    const std::string status = spectra.status.converged ? "ok" : "provisional";
    for (std::size_t a = 0; a < angles_deg.size(); ++a) {
      sweep.transmission[a] = spectra.transmission(angles_deg[a], 0);
      sweep.status[a] = status;
    }
    return sweep;
  }

  for (std::size_t a = 0; a < angles_deg.size(); ++a) {
    fdtd::SourceSpec source;
    source.lambda_min_nm = wavelength_nm * 0.7;
    source.lambda_max_nm = wavelength_nm * 1.4;
    source.polarization_deg = angles_deg[a];
    try {
      const auto spectrum = fdtd::run_transmission(stack, spec, source, {wavelength_nm}, policy);
      sweep.transmission[a] = spectrum.transmission[0];
      sweep.status[a] = spectrum.structure_status.converged ? "ok" : "provisional";
    } catch (const std::exception& e) {
      sweep.transmission[a] = std::nan("");
      sweep.status[a] = e.what();
    }
  }
  return sweep;
}

SqueezingCurve predict_squeezing_vs_polarization(const PolarizationSweep& sweep,
                                                 const chain::LossChain& chain_template,
                                                 double gain, const std::string& eot_element) {
  SqueezingCurve curve;
  curve.axis = SqueezingCurve::Axis::polarization_deg;
  curve.config_hash = sweep.config_hash;
  curve.x.reserve(sweep.angles_deg.size());
  curve.squeezing_db.reserve(sweep.angles_deg.size());
  for (std::size_t a = 0; a < sweep.angles_deg.size(); ++a) {
    if (sweep.status[a] != "ok" && sweep.status[a] != "provisional") {
      continue;  // partial sweeps keep their successful angles
    }
    chain::LossChain chain = chain_template;
    chain.set_eta(eot_element, sweep.transmission[a]);
    curve.x.push_back(sweep.angles_deg[a]);
    curve.squeezing_db.push_back(chain::predicted_squeezing_db(chain, gain));
  }
  return curve;
}

SqueezingCurve nd_comparison_curve(const std::vector<double>& etas, double gain) {
  SqueezingCurve curve;
  curve.axis = SqueezingCurve::Axis::transmission;
  curve.x = etas;
  curve.squeezing_db.reserve(etas.size());
  for (const double eta : etas) {
    curve.squeezing_db.push_back(
        quantum::noise_ratio_to_db(quantum::closed_form_noise(eta, gain)));
  }
  return curve;
}

}  // namespace eotsim::scenarios
