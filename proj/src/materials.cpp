#include "eotsim/materials.hpp"

#include <cmath>
#include <stdexcept>

namespace eotsim::materials {

MaterialModel MaterialModel::constant(std::string name, double refractive_index,
                                      double lambda_min_nm, double lambda_max_nm) {
  if (!(refractive_index >= 1.0)) {
    throw std::invalid_argument("constant-index material needs n >= 1");
  }
  MaterialModel m;
  m.name = std::move(name);
  m.eps_inf = refractive_index * refractive_index;
  m.lambda_min_nm = lambda_min_nm;
  m.lambda_max_nm = lambda_max_nm;
  return m;
}

void validate_material(const MaterialModel& model) {
  if (model.name.empty()) {
    throw std::invalid_argument("material needs a name");
  }
  if (!(model.eps_inf > 0.0)) {
    throw std::invalid_argument("material '" + model.name + "': eps_inf must be positive");
  }
  if (!(model.lambda_min_nm >= 0.0 && model.lambda_min_nm < model.lambda_max_nm)) {
    throw std::invalid_argument("material '" + model.name + "': bad wavelength range");
  }
  for (const auto& pole : model.poles) {
    if (!(pole.damping_rad_s >= 0.0)) {
      throw std::invalid_argument("material '" + model.name + "': damping must be >= 0");
    }
    if (!(pole.omega_rad_s > 0.0)) {
      throw std::invalid_argument("material '" + model.name + "': pole frequency must be positive");
    }
    if (!(pole.strength >= 0.0)) {
      throw std::invalid_argument("material '" + model.name + "': pole strength must be >= 0");
    }
  }
}

std::complex<double> permittivity_omega(const MaterialModel& model, double omega_rad_s) {
  const std::complex<double> i(0.0, 1.0);
  const double w = omega_rad_s;
  std::complex<double> eps(model.eps_inf, 0.0);
  for (const auto& pole : model.poles) {
    const double wp2 = pole.strength * pole.omega_rad_s * pole.omega_rad_s;
    if (pole.kind == PoleKind::drude) {
      eps -= wp2 / (w * w - i * pole.damping_rad_s * w);
    } else {
      eps += wp2 / (pole.omega_rad_s * pole.omega_rad_s - w * w + i * pole.damping_rad_s * w);
    }
  }
  return eps;
}

std::complex<double> permittivity(const MaterialModel& model, double wavelength_nm) {
  if (!(wavelength_nm >= model.lambda_min_nm && wavelength_nm <= model.lambda_max_nm)) {
    throw std::domain_error("material '" + model.name + "': wavelength " +
                            std::to_string(wavelength_nm) + " nm outside valid range [" +
                            std::to_string(model.lambda_min_nm) + ", " +
                            std::to_string(model.lambda_max_nm) + "] nm");
  }
  return permittivity_omega(model, wavelength_nm_to_rad_s(wavelength_nm));
}

namespace library {

MaterialModel vacuum() {
  MaterialModel m;
  m.name = "vacuum";
  return m;
}

MaterialModel silver() {
  // Drude parameters from the standard fit to the Johnson & Christy (1972)
  // tabulated silver optical constants: eps_inf = 3.7, h_bar omega_p = 9.10 eV,
  // h_bar gamma = 0.018 eV. Reproduced by tools/fit_silver_poles.py against
  // data/silver_nk_reference.csv. Valid over the near-UV to near-IR band; the
  // interband structure below ~350 nm is intentionally not modeled (the film
  // stays opaque there, matching the measured transmission floor of thick
  // evaporated films on glass).
  MaterialModel m;
  m.name = "silver";
  m.eps_inf = 3.7;
  m.poles.push_back({PoleKind::drude, ev_to_rad_s(9.10), ev_to_rad_s(0.018), 1.0});
  m.lambda_min_nm = 280.0;
  m.lambda_max_nm = 1200.0;
  return m;
}

MaterialModel ito() {
  return MaterialModel::constant("ito", 1.9, 300.0, 1200.0);
}

MaterialModel borosilicate() {
  return MaterialModel::constant("borosilicate", 1.515, 300.0, 1200.0);
}

MaterialModel fused_silica() {
  return MaterialModel::constant("fused_silica", 1.45, 300.0, 1200.0);
}

std::vector<MaterialModel> builtins() {
  return {vacuum(), silver(), ito(), borosilicate(), fused_silica()};
}

}  // namespace library

double wood_anomaly_wavelength(const LatticeAnomaly& anomaly) {
  if (anomaly.order_i == 0 && anomaly.order_j == 0) {
    throw std::invalid_argument("diffraction order (0,0) has no anomaly");
  }
  if (!(anomaly.pitch_nm > 0.0)) {
    throw std::invalid_argument("lattice pitch must be positive");
  }
  if (!(anomaly.refractive_index >= 1.0)) {
    throw std::invalid_argument("refractive index must be >= 1");
  }
  const double order = std::hypot(static_cast<double>(anomaly.order_i),
                                  static_cast<double>(anomaly.order_j));
  return anomaly.pitch_nm * anomaly.refractive_index / order;
}

}  // namespace eotsim::materials
