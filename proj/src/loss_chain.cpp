#include "eotsim/loss_chain.hpp"

#include <cmath>
#include <stdexcept>

namespace eotsim::chain {

namespace {

void check_element(const LossElement& element) {
  if (element.name.empty()) {
    throw std::invalid_argument("loss element needs a name");
  }
  if (!(element.eta >= 0.0 && element.eta <= 1.0)) {
    throw std::invalid_argument("loss element '" + element.name +
                                "': transmission must lie in [0, 1]");
  }
}

bool touches(const LossElement& element, Arm arm) {
  return element.arm == Arm::both || element.arm == arm;
}

}  // namespace

LossChain::LossChain(std::vector<LossElement> elements,
                     std::set<std::string> normalization_set) {
  for (auto& e : elements) {
    add(std::move(e));
  }
  set_normalization(std::move(normalization_set));
}

void LossChain::add(LossElement element) {
  check_element(element);
  for (const auto& existing : elements_) {
    if (existing.name == element.name) {
      throw std::invalid_argument("duplicate loss element name '" + element.name + "'");
    }
  }
  elements_.push_back(std::move(element));
}

void LossChain::set_normalization(std::set<std::string> names) {
  for (const auto& name : names) {
    bool found = false;
    for (const auto& e : elements_) {
      found = found || e.name == name;
    }
    if (!found) {
      throw std::invalid_argument("normalization set references unknown element '" + name + "'");
    }
  }
  normalization_set_ = std::move(names);
}

void LossChain::set_eta(const std::string& name, double eta) {
  for (auto& e : elements_) {
    if (e.name == name) {
      LossElement updated = e;
      updated.eta = eta;
      check_element(updated);
      e = updated;
      return;
    }
  }
  throw std::invalid_argument("no loss element named '" + name + "'");
}

double LossChain::effective_transmission(Arm arm) const {
  if (arm == Arm::both) {
    throw std::invalid_argument("query one arm at a time");
  }
  double product = 1.0;
  for (const auto& e : elements_) {
    if (touches(e, arm)) {
      product *= e.eta;
    }
  }
  return product;
}

double LossChain::normalized_transmission(Arm arm) const {
  if (arm == Arm::both) {
    throw std::invalid_argument("query one arm at a time");
  }
  double product = 1.0;
  for (const auto& e : elements_) {
    if (touches(e, arm) && !normalization_set_.contains(e.name)) {
      product *= e.eta;
    }
  }
  return product;
}

double predicted_squeezing_db(const LossChain& chain, double gain) {
  if (chain.effective_transmission(Arm::probe) == 0.0 &&
      chain.effective_transmission(Arm::conjugate) == 0.0) {
    return 0.0;
  }
  const double eta_p = chain.normalized_transmission(Arm::probe);
  const double eta_c = chain.normalized_transmission(Arm::conjugate);
  if (std::abs(eta_p - eta_c) > 1e-12) {
    throw std::invalid_argument(
        "closed-form prediction requires symmetric arms; use the covariance variant");
  }
  return quantum::noise_ratio_to_db(quantum::closed_form_noise(eta_p, gain));
}

double predicted_squeezing_covariance_db(const LossChain& chain, double gain) {
  auto state = quantum::balanced_twin_beam_state(gain, 1e6);
  state = quantum::apply_loss(state, {chain.normalized_transmission(Arm::probe), Arm::probe});
  state = quantum::apply_loss(state, {chain.normalized_transmission(Arm::conjugate), Arm::conjugate});
  return quantum::noise_ratio_to_db(quantum::intensity_difference_noise(state, 1e6));
}

std::optional<double> infer_gain(double observed_db, double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) {
    throw std::invalid_argument("transmission must lie in (0, 1]");
  }
  const double ratio = quantum::db_to_noise_ratio(observed_db);
  if (ratio <= 1.0 - eta || ratio > 1.0) {
    return std::nullopt;
  }
  return eta / (ratio - 1.0 + eta);
}

void validate_ensemble(const SpatialModeEnsemble& ensemble) {
  if (ensemble.modes.empty()) {
    throw std::invalid_argument("spatial mode ensemble is empty");
  }
  double sum = 0.0;
  double comp = 0.0;
  for (const auto& mode : ensemble.modes) {
    if (!(mode.weight >= 0.0)) {
      throw std::invalid_argument("spatial mode weights must be non-negative");
    }
    if (!(mode.eta >= 0.0 && mode.eta <= 1.0)) {
      throw std::invalid_argument("spatial mode transmission must lie in [0, 1]");
    }
    const double y = mode.weight - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw std::invalid_argument("spatial mode weights must sum to 1");
  }
}

double ensemble_noise_db(const SpatialModeEnsemble& ensemble, double gain) {
  validate_ensemble(ensemble);
  // Compensated sums keep the uniform-ensemble collapse exact to ~1e-15 even
  // for very large mode counts.
  double num = 0.0, num_c = 0.0;
  double den = 0.0, den_c = 0.0;
  for (const auto& mode : ensemble.modes) {
    const double term = mode.weight * quantum::closed_form_noise(mode.eta, gain);
    double y = term - num_c;
    double t = num + y;
    num_c = (t - num) - y;
    num = t;

    y = mode.weight - den_c;
    t = den + y;
    den_c = (t - den) - y;
    den = t;
  }
  return quantum::noise_ratio_to_db(num / den);
}

}  // namespace eotsim::chain
