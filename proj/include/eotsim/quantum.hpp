#pragma once

#include <Eigen/Dense>
#include <complex>

namespace eotsim::quantum {

// Quadrature convention used throughout: x = a + a^dag, p = i(a^dag - a),
// ordered (x1, p1, x2, p2). The vacuum covariance is the identity
// ("vacuum variance = 1") and a coherent amplitude alpha maps to the mean
// vector (2 Re alpha, 2 Im alpha), so the photon flux of mode i is
// n_i = (<x_i>^2 + <p_i>^2) / 4.

using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;

enum class Arm { probe, conjugate, both };

struct GaussianTwoModeState {
  Vec4 mean = Vec4::Zero();
  Mat4 cov = Mat4::Identity();

  static GaussianTwoModeState vacuum() { return {}; }
};

// Two-mode symplectic form for the (x1, p1, x2, p2) ordering.
Mat4 symplectic_form();

// Enforces symmetry of cov to 1e-12 relative tolerance; throws std::invalid_argument.
void validate_state(const GaussianTwoModeState& state);

// Smallest eigenvalue of cov + i*Omega. Physical states satisfy >= 0 up to
// numerical noise; tests accept >= -1e-9.
double min_uncertainty_eigenvalue(const GaussianTwoModeState& state);

GaussianTwoModeState displace(const GaussianTwoModeState& state, int mode,
                              std::complex<double> alpha);

// Phase-insensitive twin-beam amplifier. `gain` is the intensity gain of the
// seeded mode: a bright seed on mode 1 leaves with mean-photon gain G on
// mode 1 and G-1 on mode 2. The internal squeeze parameter r obeys
// cosh^2 r = G, so G = 1 is the identity.
struct SqueezerParams {
  double gain = 1.0;

  double squeeze_parameter() const;  // r = arccosh(sqrt(G))

  // Amplifier whose ideal balanced intensity-difference noise equals
  // 1/noise_gain (i.e. exp(2r) = noise_gain). Used by the twin-beam
  // preparation that realizes the closed-form loss model exactly.
  static SqueezerParams for_difference_noise(double noise_gain);
};

// Beamsplitter loss: transmission eta admixing vacuum on the selected arm(s).
struct BeamsplitterLoss {
  double eta = 1.0;
  Arm arm = Arm::both;
};

GaussianTwoModeState apply_two_mode_squeezer(const GaussianTwoModeState& state,
                                             const SqueezerParams& params);

GaussianTwoModeState apply_loss(const GaussianTwoModeState& state,
                                const BeamsplitterLoss& loss);

// Bright twin beams with equal mean fields whose balanced intensity-difference
// noise is exactly 1/noise_gain of shot noise. Propagating this state through
// symmetric beamsplitter loss eta on both arms reproduces the closed-form
// noise 1 - eta + eta/noise_gain to machine precision, which makes it the
// covariance-level reference preparation for that model.
GaussianTwoModeState balanced_twin_beam_state(double noise_gain,
                                              double seed_photon_flux);

// Linearized bright-seed intensity-difference noise, shot-noise normalized:
// Var(N1 - N2) / (n1 + n2) with fluctuations weighted by the state's mean
// fields. The result is exactly independent of the overall seed flux; the
// flux argument only asserts that a bright seed is present (linearization
// valid for n >> max cov eigenvalue; anything above ~10^3 photons/s per unit
// band is comfortably linear). A zero-mean state is probed with the balanced
// in-phase reference seed (equal amplitude on both x quadratures).
double intensity_difference_noise(const GaussianTwoModeState& state,
                                  double seed_photon_flux);

// Closed-form relative intensity-difference noise of a gain-G twin-beam
// source followed by symmetric transmission eta: 1 - eta + eta/G.
double closed_form_noise(double eta, double gain);

// Squeezing in dB: positive = below shot noise, negative = excess noise.
double noise_ratio_to_db(double ratio);
double db_to_noise_ratio(double db);

}  // namespace eotsim::quantum
