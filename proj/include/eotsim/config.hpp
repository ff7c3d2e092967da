#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "eotsim/fdtd.hpp"
#include "eotsim/loss_chain.hpp"
#include "eotsim/scenarios.hpp"

namespace eotsim::config {

struct MonitorConfig {
  std::vector<double> wavelengths_nm;  // resolved list
  double fieldmap_z_nm = -10.0;        // relative to the film bottom face
  std::optional<double> fieldmap_wavelength_nm;  // empty = near-IR argmax of a spectrum run
  double fieldmap_crop_nm = 0.0;                 // 0 = full unit cell
};

struct QuantumConfig {
  double gain = 4.0;
  chain::LossChain chain;
  std::vector<double> eta_axis;  // transmission axis for the model curve
  quantum::Arm nd_arm = quantum::Arm::both;
  std::string eot_element = "eot";
  std::optional<std::string> sweep_csv;  // polarization.csv from a prior run
};

struct PolarizationConfig {
  std::vector<double> angles_deg;
  double wavelength_nm = 795.0;
  scenarios::SweepMethod method = scenarios::SweepMethod::basis;
};

struct RunSection {
  double decay_threshold = 1e-5;
  long max_steps = 200000;
  fdtd::NormalizationKind normalization = fdtd::NormalizationKind::vacuum;
};

struct RunConfig {
  std::map<std::string, materials::MaterialModel> materials;  // builtins plus overrides
  fdtd::DeviceStack stack;
  fdtd::GridSpec grid;
  fdtd::SourceSpec source;
  MonitorConfig monitors;
  RunSection run;
  QuantumConfig quantum;
  PolarizationConfig polarization;
  std::string output_dir = "out";
};

// Parses and validates the JSON config. Unknown keys anywhere are rejected
// (fail fast). Throws ConfigError with the offending path in the message.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(const std::string& json_text);

// Fully resolved echo of the configuration (defaults filled in), serialized
// canonically; every run writes this next to its outputs.
std::string resolved_json(const RunConfig& config);
std::uint64_t config_hash(const RunConfig& config);

fdtd::RunPolicy run_policy(const RunConfig& config, int workers);

}  // namespace eotsim::config
