#include "eotsim/quantum.hpp"

#include <cmath>
#include <stdexcept>

namespace eotsim::quantum {

Mat4 symplectic_form() {
  Mat4 omega = Mat4::Zero();
  omega(0, 1) = 1.0;
  omega(1, 0) = -1.0;
  omega(2, 3) = 1.0;
  omega(3, 2) = -1.0;
  return omega;
}

void validate_state(const GaussianTwoModeState& state) {
  if (!state.mean.allFinite() || !state.cov.allFinite()) {
    throw std::invalid_argument("gaussian state contains non-finite entries");
  }
  const double scale = std::max(state.cov.cwiseAbs().maxCoeff(), 1.0);
  const double asym = (state.cov - state.cov.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * scale) {
    throw std::invalid_argument("covariance matrix is not symmetric");
  }
}

double min_uncertainty_eigenvalue(const GaussianTwoModeState& state) {
  using Mat4c = Eigen::Matrix4cd;
  const std::complex<double> i(0.0, 1.0);
  Mat4c h = state.cov.cast<std::complex<double>>() + i * symplectic_form().cast<std::complex<double>>();
  Eigen::SelfAdjointEigenSolver<Mat4c> solver(h);
  return solver.eigenvalues().minCoeff();
}

GaussianTwoModeState displace(const GaussianTwoModeState& state, int mode,
                              std::complex<double> alpha) {
  if (mode != 0 && mode != 1) {
    throw std::invalid_argument("mode index must be 0 or 1");
  }
  GaussianTwoModeState out = state;
  out.mean(2 * mode) += 2.0 * alpha.real();
  out.mean(2 * mode + 1) += 2.0 * alpha.imag();
  return out;
}

double SqueezerParams::squeeze_parameter() const {
  if (gain < 1.0) {
    throw std::invalid_argument("amplifier gain must be >= 1");
  }
  return std::acosh(std::sqrt(gain));
}

SqueezerParams SqueezerParams::for_difference_noise(double noise_gain) {
  if (noise_gain < 1.0) {
    throw std::invalid_argument("noise gain must be >= 1");
  }
  // exp(2r) = noise_gain  =>  cosh^2 r = (noise_gain + 1)^2 / (4 noise_gain)
  const double g = noise_gain;
  return SqueezerParams{(g + 1.0) * (g + 1.0) / (4.0 * g)};
}

GaussianTwoModeState apply_two_mode_squeezer(const GaussianTwoModeState& state,
                                             const SqueezerParams& params) {
  validate_state(state);
  const double r = params.squeeze_parameter();
  const double c = std::cosh(r);
  const double s = std::sinh(r);
  Mat4 sq = Mat4::Identity();
  sq(0, 0) = c;
  sq(0, 2) = s;
  sq(1, 1) = c;
  sq(1, 3) = -s;
  sq(2, 0) = s;
  sq(2, 2) = c;
  sq(3, 1) = -s;
  sq(3, 3) = c;

  GaussianTwoModeState out;
  out.mean = sq * state.mean;
  out.cov = sq * state.cov * sq.transpose();
  return out;
}

GaussianTwoModeState apply_loss(const GaussianTwoModeState& state,
                                const BeamsplitterLoss& loss) {
  validate_state(state);
  if (!(loss.eta >= 0.0 && loss.eta <= 1.0)) {
    throw std::invalid_argument("beamsplitter transmission must lie in [0, 1]");
  }
  if (loss.eta == 1.0) {
    return state;
  }
  Vec4 scale = Vec4::Ones();
  const double root = std::sqrt(loss.eta);
  if (loss.arm == Arm::probe || loss.arm == Arm::both) {
    scale(0) = root;
    scale(1) = root;
  }
  if (loss.arm == Arm::conjugate || loss.arm == Arm::both) {
    scale(2) = root;
    scale(3) = root;
  }
  GaussianTwoModeState out;
  out.mean = scale.asDiagonal() * state.mean;
  out.cov = scale.asDiagonal() * state.cov * scale.asDiagonal();
  for (int i = 0; i < 4; ++i) {
    out.cov(i, i) += 1.0 - scale(i) * scale(i);
  }
  return out;
}

GaussianTwoModeState balanced_twin_beam_state(double noise_gain,
                                              double seed_photon_flux) {
  if (!(seed_photon_flux > 0.0)) {
    throw std::invalid_argument("seed photon flux must be positive");
  }
  const auto params = SqueezerParams::for_difference_noise(noise_gain);
  // Post-squeezer amplitude is exp(r) * m0 on both x quadratures; choose the
  // input displacement so the output flux matches the request.
  const double m0 = std::sqrt(2.0 * seed_photon_flux / noise_gain);
  auto seeded = displace(GaussianTwoModeState::vacuum(), 0, {0.5 * m0, 0.0});
  seeded = displace(seeded, 1, {0.5 * m0, 0.0});
  return apply_two_mode_squeezer(seeded, params);
}

double intensity_difference_noise(const GaussianTwoModeState& state,
                                  double seed_photon_flux) {
  validate_state(state);
  if (!(seed_photon_flux > 0.0)) {
    throw std::invalid_argument("seed photon flux must be positive");
  }
  // delta(N1 - N2) = (1/2) (m1.x dx1 + m1.p dp1 - m2.x dx2 - m2.p dp2),
  // shot noise of the same coherent fields = (|m1|^2 + |m2|^2) / 4 = |w|^2,
  // so the normalized ratio is w^T C w / w^T w and the absolute flux cancels.
  Vec4 w;
  if (state.mean.squaredNorm() > 0.0) {
    w = state.mean;
  } else {
    w = Vec4(1.0, 0.0, 1.0, 0.0);  // balanced reference seed
  }
  w(2) = -w(2);
  w(3) = -w(3);
  return w.dot(state.cov * w) / w.squaredNorm();
}

double closed_form_noise(double eta, double gain) {
  if (!(eta >= 0.0 && eta <= 1.0)) {
    throw std::invalid_argument("transmission must lie in [0, 1]");
  }
  if (!(gain >= 1.0)) {
    throw std::invalid_argument("gain must be >= 1");
  }
  return 1.0 - eta + eta / gain;
}

double noise_ratio_to_db(double ratio) {
  if (!(ratio > 0.0)) {
    throw std::invalid_argument("noise ratio must be positive");
  }
  return -10.0 * std::log10(ratio);
}

double db_to_noise_ratio(double db) { return std::pow(10.0, -db / 10.0); }

}  // namespace eotsim::quantum
