#pragma once

// Stress-strain datasets: directory ingestion, export, synthetic generation
// and train/test splits by pillar size.

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "sgpuq/curve.hpp"
#include "sgpuq/forward_model.hpp"

namespace sgpuq {

enum class Provenance { Ingested, Synthetic };

std::string to_string(Provenance p);

struct DatasetEntry {
  double size = 0.0;  ///< pillar size L [nm]
  int replicate = 1;
  StressStrainCurve curve;
};

/// Replicate spread at one size, on the grid of the first replicate.
struct SizeNoiseSummary {
  double size = 0.0;
  std::size_t replicates = 0;
  double mean_stress = 0.0;   ///< over all points and replicates
  double pooled_std = 0.0;    ///< sqrt of the point-averaged unbiased replicate variance
  double relative_std = 0.0;  ///< pooled_std / mean_stress
};

struct Dataset {
  std::vector<DatasetEntry> entries;  ///< sorted by (size, replicate)
  Provenance provenance = Provenance::Ingested;

  /// Throws ValidationError on non-positive sizes or non-monotone strain.
  void validate() const;
  std::vector<double> sizes() const;
  std::vector<const DatasetEntry*> at_size(double size) const;
  bool has_size(double size) const;
  /// Throws ValidationError if a size has a single replicate.
  SizeNoiseSummary noise_summary(double size) const;
  std::vector<SizeNoiseSummary> noise_summary() const;
  /// Entries whose size is listed; throws MissingSize for absent sizes.
  Dataset subset(const std::vector<double>& sizes) const;
};

/// Size comparison tolerant to decimal round-off in file names.
bool same_size(double a, double b) noexcept;

/// File name `L<size>_r<replicate>.csv` for an entry.
std::string entry_file_name(double size, int replicate);

/// Reads every `L<size>_r<replicate>.csv` in `dir`. Strain is stored as a
/// magnitude; a curve with negative mean stress is sign-flipped.
/// Throws IoError, ParseError or ValidationError.
Dataset ingest(const std::filesystem::path& dir);

/// Writes one CSV per entry into `dir` (created if absent).
void export_dataset(const Dataset& dataset, const std::filesystem::path& dir);

/// Replicate noise: stress_ij = F_j s_i + e_ij with a mean-one lognormal
/// curve factor F_j and Gaussian point noise e_ij. The two parts share the
/// requested variance so that the expected pooled replicate std equals
/// relative_std times the mean truth stress.
struct NoiseModel {
  double relative_std = 0.20;
  double curve_share = 0.09;  ///< fraction of the variance carried by F_j
  void validate() const;
};

Dataset generate_synthetic(const SgpParams& truth, const std::vector<double>& sizes, int replicates,
                           const NoiseModel& noise, std::uint64_t seed, const ForwardModel& model = {},
                           int jobs = 1);

struct CaseSplit {
  std::string label;
  std::vector<double> training;
  std::vector<double> testing;

  void validate() const;
  /// Train on 300-1000 nm, test on 200 nm.
  static CaseSplit case_one();
  /// Train on 200-700 nm, test on 1000 nm.
  static CaseSplit case_two();
};

/// (training, testing). Throws MissingSize for a size absent from the data.
std::pair<Dataset, Dataset> case_split(const Dataset& dataset, const CaseSplit& split);

inline const std::vector<double> kPillarSizes{200.0, 300.0, 500.0, 700.0, 1000.0};

}  // namespace sgpuq
