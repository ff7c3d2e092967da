#pragma once

#include <complex>
#include <string>
#include <vector>

namespace eotsim::materials {

// Physical constants (SI).
inline constexpr double kSpeedOfLight = 299792458.0;          // m/s
inline constexpr double kVacuumPermittivity = 8.8541878128e-12;  // F/m
inline constexpr double kVacuumPermeability = 1.25663706212e-6;  // H/m
inline constexpr double kElectronVolt = 1.602176634e-19;      // J
inline constexpr double kReducedPlanck = 1.054571817e-34;     // J s

inline double ev_to_rad_s(double ev) { return ev * kElectronVolt / kReducedPlanck; }
inline double wavelength_nm_to_rad_s(double nm) {
  return 2.0 * 3.14159265358979323846 * kSpeedOfLight / (nm * 1e-9);
}

enum class PoleKind { drude, lorentz };

struct Pole {
  PoleKind kind = PoleKind::drude;
  double omega_rad_s = 0.0;    // plasma frequency (drude) or resonance (lorentz)
  double damping_rad_s = 0.0;  // >= 0
  double strength = 1.0;       // dimensionless oscillator strength
};

// Dispersive permittivity, exp(+i omega t) sign convention: passive
// materials have Im(eps) <= 0. Evaluation outside [lambda_min, lambda_max]
// is an error rather than an extrapolation.
struct MaterialModel {
  std::string name;
  double eps_inf = 1.0;
  std::vector<Pole> poles;
  double lambda_min_nm = 0.0;
  double lambda_max_nm = 1e12;

  static MaterialModel constant(std::string name, double refractive_index,
                                double lambda_min_nm = 0.0, double lambda_max_nm = 1e12);

  bool dispersive() const { return !poles.empty(); }
};

void validate_material(const MaterialModel& model);

// eps(omega) on the analytic rational form; no wavelength-range check.
std::complex<double> permittivity_omega(const MaterialModel& model, double omega_rad_s);

// eps(lambda); throws std::domain_error outside the model's valid range.
std::complex<double> permittivity(const MaterialModel& model, double wavelength_nm);

namespace library {
MaterialModel vacuum();
// Drude fit of the Johnson & Christy (1972) silver data; see data/silver_nk_reference.csv.
MaterialModel silver();
MaterialModel ito();           // lossless constant index 1.9
MaterialModel borosilicate();  // constant index 1.515
MaterialModel fused_silica();  // constant index 1.45 (Malitson Sellmeier at 795 nm, rounded)
// All builtins, keyed by name.
std::vector<MaterialModel> builtins();
}  // namespace library

// Wood-Rayleigh anomaly of a square lattice at normal incidence:
// lambda = pitch * n / sqrt(i^2 + j^2).
struct LatticeAnomaly {
  double pitch_nm = 0.0;
  int order_i = 0;
  int order_j = 0;
  double refractive_index = 1.0;
};

double wood_anomaly_wavelength(const LatticeAnomaly& anomaly);

}  // namespace eotsim::materials
