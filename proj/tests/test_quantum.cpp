#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "eotsim/quantum.hpp"

using namespace eotsim::quantum;

namespace {

// Independent construction of the two-mode squeeze symplectic for the
// (x1, p1, x2, p2) ordering; used as the oracle for apply_two_mode_squeezer.
Mat4 reference_squeeze_matrix(double r) {
  Mat4 s = Mat4::Zero();
  const double ch = std::cosh(r), sh = std::sinh(r);
  s(0, 0) = ch; s(0, 2) = sh;
  s(1, 1) = ch; s(1, 3) = -sh;
  s(2, 0) = sh; s(2, 2) = ch;
  s(3, 1) = -sh; s(3, 3) = ch;
  return s;
}

double photon_flux(const GaussianTwoModeState& s, int mode) {
  return (s.mean(2 * mode) * s.mean(2 * mode) + s.mean(2 * mode + 1) * s.mean(2 * mode + 1)) / 4.0;
}

}  // namespace

TEST_CASE("vacuum state is exact") {
  const auto v = GaussianTwoModeState::vacuum();
  CHECK(v.mean.isZero(0.0));
  CHECK(v.cov.isIdentity(0.0));
  CHECK(min_uncertainty_eigenvalue(v) >= -1e-12);
}

TEST_CASE("squeezer with unit gain is the identity") {
  auto state = displace(GaussianTwoModeState::vacuum(), 0, {1.5, -0.5});
  const auto out = apply_two_mode_squeezer(state, {1.0});
  CHECK((out.mean - state.mean).cwiseAbs().maxCoeff() == doctest::Approx(0.0).epsilon(1e-14));
  CHECK((out.cov - state.cov).cwiseAbs().maxCoeff() == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(SqueezerParams{1.0}.squeeze_parameter() == 0.0);
}

TEST_CASE("squeezer rejects de-amplification") {
  CHECK_THROWS_AS(apply_two_mode_squeezer(GaussianTwoModeState::vacuum(), {0.5}),
                  std::invalid_argument);
}

TEST_CASE("gain-2 covariance matches the explicit symplectic product") {
  const double r = std::acosh(std::sqrt(2.0));
  const Mat4 s = reference_squeeze_matrix(r);
  const Mat4 expected_cov = s * s.transpose();

  const auto out = apply_two_mode_squeezer(GaussianTwoModeState::vacuum(), {2.0});
  CHECK((out.cov - expected_cov).cwiseAbs().maxCoeff() < 1e-12);

  Eigen::SelfAdjointEigenSolver<Mat4> eig(out.cov);
  const auto ev = eig.eigenvalues();
  CHECK(ev(0) == doctest::Approx(std::exp(-2.0 * r)).epsilon(1e-12));
  CHECK(ev(1) == doctest::Approx(std::exp(-2.0 * r)).epsilon(1e-12));
  CHECK(ev(2) == doctest::Approx(std::exp(2.0 * r)).epsilon(1e-12));
  CHECK(ev(3) == doctest::Approx(std::exp(2.0 * r)).epsilon(1e-12));
}

TEST_CASE("bright probe seed picks up gain G and G-1") {
  const double g = 4.0;
  const auto seeded = displace(GaussianTwoModeState::vacuum(), 0, {50.0, 0.0});
  const double n_in = photon_flux(seeded, 0);
  const auto out = apply_two_mode_squeezer(seeded, {g});
  CHECK(photon_flux(out, 0) / n_in == doctest::Approx(g).epsilon(1e-12));
  CHECK(photon_flux(out, 1) / n_in == doctest::Approx(g - 1.0).epsilon(1e-12));
}

TEST_CASE("twin beams with gain 4 sit at a quarter of shot noise") {
  const auto state = balanced_twin_beam_state(4.0, 1e6);
  CHECK(intensity_difference_noise(state, 1e6) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(min_uncertainty_eigenvalue(state) >= -1e-9);
}

TEST_CASE("unit transmission leaves states untouched") {
  auto state = apply_two_mode_squeezer(GaussianTwoModeState::vacuum(), {3.0});
  state = displace(state, 0, {2.0, 1.0});
  const auto out = apply_loss(state, {1.0, Arm::both});
  CHECK((out.cov - state.cov).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK((out.mean - state.mean).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("full loss restores vacuum and shot noise") {
  const auto squeezed = apply_two_mode_squeezer(GaussianTwoModeState::vacuum(), {8.0});
  const auto out = apply_loss(squeezed, {0.0, Arm::both});
  CHECK(out.cov.isIdentity(1e-14));
  CHECK(out.mean.isZero(1e-14));
  CHECK(intensity_difference_noise(out, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("loss rejects transmissions outside [0, 1]") {
  const auto v = GaussianTwoModeState::vacuum();
  CHECK_THROWS_AS(apply_loss(v, {-0.1, Arm::both}), std::invalid_argument);
  CHECK_THROWS_AS(apply_loss(v, {1.1, Arm::probe}), std::invalid_argument);
}

TEST_CASE("symmetric loss on gain-4 twin beams gives 0.5065 of shot noise") {
  const double eta = 0.94 * 0.70;
  auto state = balanced_twin_beam_state(4.0, 1e8);
  state = apply_loss(state, {eta, Arm::both});
  const double ratio = intensity_difference_noise(state, 1e8);
  CHECK(ratio == doctest::Approx(closed_form_noise(eta, 4.0)).epsilon(1e-12));
  CHECK(ratio == doctest::Approx(0.5065).epsilon(1e-4));
}

TEST_CASE("matched per-arm loss agrees with the closed form") {
  auto state = balanced_twin_beam_state(4.0, 1e6);
  state = apply_loss(state, {0.36, Arm::probe});
  state = apply_loss(state, {0.36, Arm::conjugate});
  CHECK(intensity_difference_noise(state, 1e6) ==
        doctest::Approx(closed_form_noise(0.36, 4.0)).epsilon(1e-9));
}

TEST_CASE("two coherent beams are shot limited") {
  auto state = displace(GaussianTwoModeState::vacuum(), 0, {3.0, 0.0});
  state = displace(state, 1, {1.0, 2.0});
  CHECK(intensity_difference_noise(state, 10.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("difference noise is flux independent across six decades") {
  double reference = 0.0;
  for (const double flux : {1e3, 1e5, 1e7, 1e9}) {
    const auto state = balanced_twin_beam_state(4.0, flux);
    const double ratio = intensity_difference_noise(state, flux);
    if (reference == 0.0) {
      reference = ratio;
    } else {
      CHECK(std::abs(ratio - reference) < 1e-9);
    }
  }
  CHECK_THROWS_AS(intensity_difference_noise(GaussianTwoModeState::vacuum(), 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(intensity_difference_noise(GaussianTwoModeState::vacuum(), -1.0),
                  std::invalid_argument);
}

TEST_CASE("closed-form noise scalars") {
  CHECK(closed_form_noise(0.0, 4.0) == 1.0);
  CHECK(closed_form_noise(1.0, 4.0) == 0.25);
  CHECK(closed_form_noise(0.34, 4.0) == doctest::Approx(0.745).epsilon(1e-12));
  CHECK(noise_ratio_to_db(closed_form_noise(0.34, 4.0)) == doctest::Approx(1.2784).epsilon(1e-4));
  CHECK_THROWS_AS(closed_form_noise(-0.1, 4.0), std::invalid_argument);
  CHECK_THROWS_AS(closed_form_noise(0.5, 0.5), std::invalid_argument);
}

TEST_CASE("1.28 dB inverts to a transmission of 0.340") {
  const double s = db_to_noise_ratio(1.28);
  const double eta = (1.0 - s) / (1.0 - 1.0 / 4.0);
  CHECK(eta == doctest::Approx(0.340).epsilon(0.005 / 0.340));
}

TEST_CASE("decibel conversions") {
  CHECK(noise_ratio_to_db(1.0) == 0.0);
  CHECK(noise_ratio_to_db(0.25) == doctest::Approx(6.0206).epsilon(1e-4));
  CHECK(noise_ratio_to_db(std::pow(10.0, 0.02)) == doctest::Approx(-0.2).epsilon(1e-12));
  for (const double ratio : {0.07, 0.25, 0.5, 1.0, 1.3}) {
    CHECK(db_to_noise_ratio(noise_ratio_to_db(ratio)) == doctest::Approx(ratio).epsilon(1e-12));
  }
  CHECK_THROWS_AS(noise_ratio_to_db(0.0), std::invalid_argument);
  CHECK_THROWS_AS(noise_ratio_to_db(-2.0), std::invalid_argument);
}

TEST_CASE("covariance engine reproduces the closed form on a coarse grid") {
  for (double eta = 0.0; eta <= 1.0 + 1e-12; eta += 0.1) {
    for (const double g : {1.0, 1.5, 2.0, 4.0, 8.0}) {
      auto state = balanced_twin_beam_state(g, 1e6);
      state = apply_loss(state, {std::min(eta, 1.0), Arm::both});
      const double engine = intensity_difference_noise(state, 1e6);
      CHECK(std::abs(engine - closed_form_noise(std::min(eta, 1.0), g)) < 1e-9);
      CHECK(min_uncertainty_eigenvalue(state) >= -1e-9);
    }
  }
}

TEST_CASE("closed form is monotone and bounded") {
  for (const double g : {1.5, 2.0, 4.0, 8.0}) {
    double prev = closed_form_noise(0.0, g);
    for (double eta = 0.05; eta <= 1.0 + 1e-12; eta += 0.05) {
      const double cur = closed_form_noise(std::min(eta, 1.0), g);
      CHECK(cur < prev);
      CHECK(cur >= 1.0 / g);
      CHECK(cur <= 1.0);
      prev = cur;
    }
  }
  for (double eta = 0.0; eta <= 1.0 + 1e-12; eta += 0.1) {
    CHECK(closed_form_noise(std::min(eta, 1.0), 1.0) == 1.0);
  }
}

TEST_CASE("every pipeline state stays physical") {
  auto state = GaussianTwoModeState::vacuum();
  CHECK(min_uncertainty_eigenvalue(state) >= -1e-9);
  state = displace(state, 0, {4.0, 0.0});
  state = apply_two_mode_squeezer(state, {6.0});
  CHECK(min_uncertainty_eigenvalue(state) >= -1e-9);
  state = apply_loss(state, {0.3, Arm::probe});
  CHECK(min_uncertainty_eigenvalue(state) >= -1e-9);
  state = apply_loss(state, {0.8, Arm::conjugate});
  CHECK(min_uncertainty_eigenvalue(state) >= -1e-9);
  state = apply_two_mode_squeezer(state, {2.0});
  CHECK(min_uncertainty_eigenvalue(state) >= -1e-9);
}

TEST_CASE("asymmetric covariance is rejected") {
  GaussianTwoModeState bad;
  bad.cov(0, 1) = 0.5;  // no matching (1, 0) entry
  CHECK_THROWS_AS(validate_state(bad), std::invalid_argument);
}
