#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sgpuq/curve.hpp"

namespace sgpuq {

/// Strain-energy density of one loading history [GPa].
struct QoiValue {
  double value = 0.0;
  std::string source;
};

inline constexpr double kQoiStrain = 0.008;

/// Trapezoidal integral of |stress| d|strain| over [0, up_to_strain] on the
/// curve's own grid. An implicit (0, 0) point is used when the curve starts
/// above zero strain. If the grid stops short of up_to_strain by no more than
/// its last spacing, the last segment is extrapolated; otherwise throws
/// CurveTooShort.
QoiValue strain_energy(const StressStrainCurve& curve, double up_to_strain = kQoiStrain,
                       std::string source = {});

/// Right-continuous empirical distribution function of a sample set.
class EmpiricalCdf {
 public:
  explicit EmpiricalCdf(std::vector<double> samples);

  double operator()(double x) const noexcept;
  const std::vector<double>& sorted() const noexcept { return sorted_; }
  double mean() const noexcept;

 private:
  std::vector<double> sorted_;
};

/// Integral of |F_a - F_b| over the real line, computed exactly on the union
/// of step locations (the 1-Wasserstein distance between the samples).
double cdf_l1_distance(std::span<const double> a, std::span<const double> b);

/// Discrepancy between data and model QoI distributions:
/// integral |F_data - F_model| / mean(data).
/// Throws EmptySamples if either set is empty, ZeroMean if mean(data) == 0.
double cdf_error(std::span<const double> data_samples, std::span<const double> model_samples);
double cdf_error(const std::vector<QoiValue>& data_samples, const std::vector<QoiValue>& model_samples);

struct CdfErrorStats {
  double value = 0.0;  ///< cdf_error of the full sets
  double mean = 0.0;   ///< over bootstrap resamples of both sets
  double std = 0.0;
};

/// cdf_error with a bootstrap spread: both sets are resampled with
/// replacement `resamples` times.
CdfErrorStats cdf_error_bootstrap(std::span<const double> data_samples, std::span<const double> model_samples,
                                  std::size_t resamples, std::uint64_t seed);

}  // namespace sgpuq
