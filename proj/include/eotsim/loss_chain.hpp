#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "eotsim/quantum.hpp"

namespace eotsim::chain {

using quantum::Arm;

struct LossElement {
  std::string name;
  double eta = 1.0;
  Arm arm = Arm::both;
};

// Ordered sequence of named transmission elements. Elements listed in the
// normalization set are folded out of the reported transmission axis: the
// squeezing model is evaluated on the product of the remaining elements,
// which is how measured curves are conventionally plotted against the
// device-only transmission.
class LossChain {
 public:
  LossChain() = default;
  explicit LossChain(std::vector<LossElement> elements,
                     std::set<std::string> normalization_set = {});

  void add(LossElement element);
  void set_normalization(std::set<std::string> names);
  void set_eta(const std::string& name, double eta);

  const std::vector<LossElement>& elements() const { return elements_; }
  const std::set<std::string>& normalization_set() const { return normalization_set_; }

  // Full physical transmission of one arm (product over member etas).
  double effective_transmission(Arm arm) const;
  // Same product with the normalization-set elements divided out.
  double normalized_transmission(Arm arm) const;

 private:
  std::vector<LossElement> elements_;
  std::set<std::string> normalization_set_;
};

// Closed-form squeezing predicted for the chain, in dB. Evaluates
// 1 - eta + eta/G on the normalized transmission; if the full physical
// transmission of either arm is zero the result is 0 dB (no light, shot
// noise). Requires the normalized transmission of both arms to agree, since
// the closed form assumes symmetric loss; use the covariance variant for
// asymmetric chains.
double predicted_squeezing_db(const LossChain& chain, double gain);

// Covariance-engine prediction for arbitrary (possibly asymmetric) chains:
// a balanced twin-beam pair with ideal difference noise 1/G propagated
// through the per-arm normalized transmissions. Matches
// predicted_squeezing_db exactly for symmetric chains.
double predicted_squeezing_covariance_db(const LossChain& chain, double gain);

// Inverts the closed-form model: G such that 1 - eta + eta/G reproduces the
// observed squeezing. No physical G >= 1 exists when the observed noise
// ratio S satisfies S <= 1 - eta (loss alone cannot explain it) or S > 1
// (anti-squeezing); both return nullopt.
std::optional<double> infer_gain(double observed_db, double eta);

struct SpatialMode {
  double weight = 0.0;
  double eta = 1.0;
};

// Independent two-mode squeezed pairs, one per spatial mode, detected with
// additive photocurrents: the total difference noise is the weight-averaged
// per-mode noise ratio.
struct SpatialModeEnsemble {
  std::vector<SpatialMode> modes;
};

void validate_ensemble(const SpatialModeEnsemble& ensemble);
double ensemble_noise_db(const SpatialModeEnsemble& ensemble, double gain);

}  // namespace eotsim::chain
