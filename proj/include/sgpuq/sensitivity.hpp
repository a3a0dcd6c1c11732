#pragma once

// Total-effect (Jansen-form) Sobol indices over Saltelli designs.
//
// Batch evaluation comes in two flavours with identical results: a serial
// reference loop and an OpenMP loop over rows. Outputs are stored by row
// index, so the parallel result does not depend on scheduling.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sgpuq/forward_model.hpp"
#include "sgpuq/sampling.hpp"

namespace sgpuq {

/// Scalar model of one parameter row. May throw SolverFailure, which marks
/// the row as failed instead of aborting the batch.
using RowModel = std::function<double(std::span<const double>)>;
/// Scalar model of one parameter row at a given pillar size [nm].
using SizedModel = std::function<double(std::span<const double>, double)>;

struct BatchResult {
  std::vector<double> values;             ///< NaN for failed rows
  std::vector<std::size_t> failed_rows;   ///< ascending
};

BatchResult evaluate_batch_serial(const SampleMatrix& matrix, const RowModel& model);
BatchResult evaluate_batch_parallel(const SampleMatrix& matrix, const RowModel& model, int jobs);

/// Strain-energy QoI of every row at one size. Throws SolverFailure if more
/// than max_failure_fraction of the rows fail.
BatchResult evaluate_qoi_batch(const SampleMatrix& matrix, double length, const ForwardModel& model, int jobs,
                               double max_failure_fraction = 0.01);

/// S_k = (1/2N) sum_j (yA_j - yAB^(k)_j)^2, divided by the unbiased variance
/// of the pooled (yA, yB) values when `normalize` is set. Non-finite entries
/// are dropped pairwise per k. Throws ZeroVariance if the pooled variance is
/// below 1e-30.
std::vector<double> total_effect_indices(std::span<const double> y_a, std::span<const double> y_b,
                                         const std::vector<std::vector<double>>& y_ab, bool normalize = true);

struct IndexSummary {
  std::string parameter;
  std::optional<double> size;  ///< nullopt: index of the across-size mean QoI
  std::vector<double> replicates;
  double mean = 0.0;
  double std = 0.0;  ///< sample standard deviation over replicates (0 for R = 1)
};

struct SensitivityReport {
  std::vector<IndexSummary> entries;
  std::vector<double> sizes;
  std::size_t n = 0;
  std::size_t replicates = 0;
  std::uint64_t seed = 0;
  std::size_t evaluations_per_size = 0;  ///< R N (K + 2)
  /// Scatter-plot data: the A matrix of the first replicate and its QoI per
  /// size, with the across-size mean last.
  SampleMatrix scatter_inputs;
  std::vector<std::vector<double>> scatter_qoi;

  /// nullopt size selects the size-averaged entry.
  const IndexSummary& at(const std::string& parameter, std::optional<double> size) const;
  /// Mean over parameters of std / |mean| for one size (or the average).
  double mean_relative_std(std::optional<double> size) const;
};

struct SweepOptions {
  std::size_t n = 1000;
  std::size_t replicates = 4;
  std::uint64_t seed = 0;
  int jobs = 1;
  double max_failure_fraction = 0.01;
};

/// Indices per size and for the mean QoI over all sizes, replicated over
/// independent designs. The same design rows are evaluated at every size.
SensitivityReport size_sweep_sensitivity(const ParamBox& box, const std::vector<double>& sizes,
                                         const SizedModel& model, const SweepOptions& options);

/// Convenience overload running the SGP strain-energy model.
SensitivityReport size_sweep_sensitivity(const ParamBox& box, const std::vector<double>& sizes,
                                         const ForwardModel& model, const SweepOptions& options);

/// `parameter,size,S_mean,S_std`; the averaged entry uses size `mean`.
void write_indices_csv(const std::filesystem::path& path, const SensitivityReport& report);

/// K parameter columns (box order) followed by `qoi`.
void scatter_export(const SampleMatrix& matrix, std::span<const double> qoi, const ParamBox& box,
                    const std::filesystem::path& path);

}  // namespace sgpuq
