#pragma once

// Experiment configuration: one JSON file drives every CLI subcommand.
// Unknown keys are rejected so typos do not silently fall back to defaults.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sgpuq/dataset.hpp"
#include "sgpuq/forward_model.hpp"
#include "sgpuq/inference.hpp"
#include "sgpuq/sampling.hpp"

namespace sgpuq {

struct SimulateSettings {
  double size = 500.0;
  double profile_strain = 0.008;
};

struct DataSettings {
  std::filesystem::path dir = "data";  ///< relative paths resolve against out_dir
  std::vector<double> sizes = kPillarSizes;
  int replicates = 5;
  NoiseModel noise;
  SgpParams truth;  ///< synthetic truth for gen-data
};

enum class SensitivityModel { Sgp, Additive, Ishigami };

struct SensitivitySettings {
  std::size_t n = 1000;
  std::size_t replicates = 4;
  std::vector<double> sizes = kPillarSizes;
  SensitivityModel model = SensitivityModel::Sgp;
  double max_failure_fraction = 0.01;
};

enum class CalibrationTarget { Sgp, Gaussian };

struct InferenceSettings {
  ChainConfig chain;
  LikelihoodSpec likelihood;  ///< empty sigma settings: estimate from data
  CaseSplit split = CaseSplit::case_one();
  CalibrationTarget target = CalibrationTarget::Sgp;
  std::optional<std::filesystem::path> resume;     ///< existing samples file
  std::optional<std::filesystem::path> posterior;  ///< samples used by predict
  std::size_t n_draws = 100;
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  int jobs = 1;
  std::filesystem::path out_dir = "out";
  ForwardModel model;  ///< solver settings plus the base parameter set
  ParamBox prior = ParamBox::pillar_priors();
  SimulateSettings simulate;
  DataSettings data;
  SensitivitySettings sensitivity;
  InferenceSettings inference;

  /// Throws ValidationError on any violated invariant.
  void validate() const;
  /// `path` resolved against out_dir unless absolute.
  std::filesystem::path resolve(const std::filesystem::path& path) const;
};

/// Parses JSON text. Throws ValidationError naming the offending key.
ExperimentConfig parse_config(const std::string& json_text);
/// Throws IoError if unreadable, ValidationError if malformed.
ExperimentConfig load_config(const std::filesystem::path& path);
/// Full effective configuration as JSON (used for sidecar snapshots).
std::string config_to_json(const ExperimentConfig& config);

/// Seed for a named subsystem, derived from the root seed.
std::uint64_t subsystem_seed(std::uint64_t root, const std::string& subsystem);

}  // namespace sgpuq
