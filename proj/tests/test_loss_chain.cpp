#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "eotsim/loss_chain.hpp"

using namespace eotsim::chain;
using eotsim::quantum::Arm;

TEST_CASE("empty chain transmits everything") {
  LossChain chain;
  CHECK(chain.effective_transmission(Arm::probe) == 1.0);
  CHECK(chain.effective_transmission(Arm::conjugate) == 1.0);
}

TEST_CASE("quoted experiment losses multiply out") {
  LossChain chain({{"vapor", 0.70, Arm::both}, {"detector", 0.94, Arm::both}});
  CHECK(chain.effective_transmission(Arm::probe) == doctest::Approx(0.658).epsilon(1e-12));

  chain.add({"eot", 0.359, Arm::both});
  CHECK(chain.effective_transmission(Arm::probe) == doctest::Approx(0.2362).epsilon(1e-3));
}

TEST_CASE("effective transmission ignores element order") {
  std::vector<LossElement> elements = {{"a", 0.7, Arm::both},
                                       {"b", 0.94, Arm::both},
                                       {"c", 0.359, Arm::both},
                                       {"d", 0.5, Arm::probe}};
  const double probe_ref = LossChain(elements).effective_transmission(Arm::probe);
  const double conj_ref = LossChain(elements).effective_transmission(Arm::conjugate);
  std::sort(elements.begin(), elements.end(),
            [](const auto& x, const auto& y) { return x.name < y.name; });
  do {
    LossChain chain(elements);
    CHECK(chain.effective_transmission(Arm::probe) == doctest::Approx(probe_ref).epsilon(1e-12));
    CHECK(chain.effective_transmission(Arm::conjugate) == doctest::Approx(conj_ref).epsilon(1e-12));
  } while (std::next_permutation(elements.begin(), elements.end(),
                                 [](const auto& x, const auto& y) { return x.name < y.name; }));
}

TEST_CASE("duplicate names and bad transmissions are rejected") {
  LossChain chain({{"nd", 0.5, Arm::both}});
  CHECK_THROWS_AS(chain.add({"nd", 0.7, Arm::both}), std::invalid_argument);
  CHECK_THROWS_AS(chain.add({"bad", 1.2, Arm::both}), std::invalid_argument);
  CHECK_THROWS_AS(chain.add({"", 0.5, Arm::both}), std::invalid_argument);
  CHECK_THROWS_AS(chain.set_normalization({"missing"}), std::invalid_argument);
}

TEST_CASE("lossless chain with gain 4 predicts 6.02 dB") {
  LossChain chain;
  CHECK(predicted_squeezing_db(chain, 4.0) == doctest::Approx(6.0206).epsilon(1e-4));
}

TEST_CASE("device transmission of 0.34 on the normalized axis gives 1.28 dB") {
  LossChain chain({{"vapor", 0.70, Arm::both},
                   {"detector", 0.94, Arm::both},
                   {"eot", 0.34, Arm::both}},
                  {"vapor", "detector"});
  CHECK(chain.normalized_transmission(Arm::probe) == doctest::Approx(0.34).epsilon(1e-12));
  CHECK(predicted_squeezing_db(chain, 4.0) == doctest::Approx(1.28).epsilon(0.005));
}

TEST_CASE("strong balanced attenuation leaves 0.29 dB") {
  LossChain chain({{"nd", 0.0867, Arm::both}});
  CHECK(predicted_squeezing_db(chain, 4.0) == doctest::Approx(0.29).epsilon(0.01));
}

TEST_CASE("an opaque element forces shot noise") {
  LossChain chain({{"block", 0.0, Arm::both}, {"detector", 0.94, Arm::both}});
  CHECK(predicted_squeezing_db(chain, 4.0) == 0.0);
}

TEST_CASE("covariance prediction matches the closed form for symmetric chains") {
  LossChain chain({{"vapor", 0.70, Arm::both}, {"detector", 0.94, Arm::both}});
  CHECK(predicted_squeezing_covariance_db(chain, 4.0) ==
        doctest::Approx(predicted_squeezing_db(chain, 4.0)).epsilon(1e-9));
  CHECK(predicted_squeezing_db(chain, 4.0) == doctest::Approx(2.95).epsilon(0.01));
}

TEST_CASE("probe-only attenuation is handled by the covariance engine") {
  LossChain chain({{"nd", 0.36, Arm::probe}});
  CHECK_THROWS_AS(predicted_squeezing_db(chain, 4.0), std::invalid_argument);
  const double db = predicted_squeezing_covariance_db(chain, 4.0);
  CHECK(db > 0.0);
  CHECK(db < predicted_squeezing_covariance_db(LossChain({{"nd", 0.36, Arm::both}}), 4.0) + 3.0);
}

TEST_CASE("gain inference scalars") {
  CHECK(*infer_gain(0.0, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(*infer_gain(6.0206, 1.0) == doctest::Approx(4.0).epsilon(1e-4));
  CHECK(*infer_gain(4.0, 0.9) == doctest::Approx(3.02).epsilon(0.005));
}

TEST_CASE("gain inference refuses impossible observations") {
  // Noise ratio below the loss floor: no gain explains it.
  CHECK(!infer_gain(10.0, 0.5).has_value());
  // Anti-squeezing needs G < 1, outside the model.
  CHECK(!infer_gain(-0.2, 0.5).has_value());
  CHECK_THROWS_AS(infer_gain(1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(infer_gain(1.0, 1.5), std::invalid_argument);
}

TEST_CASE("inference inverts prediction across the parameter plane") {
  std::mt19937 rng(321);
  std::uniform_real_distribution<double> eta_dist(0.01, 1.0);
  std::uniform_real_distribution<double> gain_dist(1.0, 10.0);
  for (int i = 0; i < 300; ++i) {
    const double eta = eta_dist(rng);
    const double gain = gain_dist(rng);
    LossChain chain({{"nd", eta, Arm::both}});
    const double db = predicted_squeezing_db(chain, gain);
    const auto recovered = infer_gain(db, eta);
    REQUIRE(recovered.has_value());
    CHECK(std::abs(*recovered - gain) < 1e-9 * gain);
  }
}

TEST_CASE("uniform ensembles collapse to the single-mode value") {
  const double eta = 0.36;
  const double single = ensemble_noise_db(SpatialModeEnsemble{{{1.0, eta}}}, 4.0);
  SpatialModeEnsemble uniform;
  for (int i = 0; i < 100; ++i) {
    uniform.modes.push_back({0.01, eta});
  }
  CHECK(std::abs(ensemble_noise_db(uniform, 4.0) - single) < 1e-12);
}

TEST_CASE("ensemble noise is the weighted average of mode ratios") {
  SpatialModeEnsemble two;
  two.modes = {{0.5, 1.0}, {0.5, 0.0}};
  const double expected_ratio = (0.25 + 1.0) / 2.0;
  CHECK(ensemble_noise_db(two, 4.0) ==
        doctest::Approx(-10.0 * std::log10(expected_ratio)).epsilon(1e-12));
}

TEST_CASE("ensemble validation") {
  CHECK_THROWS_AS(ensemble_noise_db(SpatialModeEnsemble{}, 4.0), std::invalid_argument);
  CHECK_THROWS_AS(ensemble_noise_db(SpatialModeEnsemble{{{0.4, 0.5}}}, 4.0),
                  std::invalid_argument);  // weights must sum to 1
  CHECK_THROWS_AS(ensemble_noise_db(SpatialModeEnsemble{{{1.0, 1.5}}}, 4.0),
                  std::invalid_argument);
  // All weight on one mode equals the single-mode result.
  SpatialModeEnsemble one;
  one.modes = {{1.0, 0.42}, {0.0, 0.1}};
  CHECK(ensemble_noise_db(one, 4.0) ==
        doctest::Approx(ensemble_noise_db(SpatialModeEnsemble{{{1.0, 0.42}}}, 4.0))
            .epsilon(1e-12));
}
