#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace sgpuq {

/// Ordered (strain, stress) samples of one monotonic loading history.
/// Solver output is stored as magnitudes; stress in GPa.
struct StressStrainCurve {
  std::vector<double> strain;
  std::vector<double> stress;

  std::size_t size() const noexcept { return strain.size(); }
  bool empty() const noexcept { return strain.empty(); }

  /// Linear interpolation; clamps to the end values outside the grid.
  double stress_at(double eps) const;
  /// Interpolates onto another strain grid.
  std::vector<double> resample(const std::vector<double>& grid) const;
};

/// CSV with header `strain,stress_gpa`, 12 significant digits.
void write_curve_csv(std::ostream& os, const StressStrainCurve& curve);
void write_curve_csv(const std::filesystem::path& path, const StressStrainCurve& curve);

/// Parses the CSV format above. Throws ParseError(file, line) on malformed
/// rows; no monotonicity checks (see ingest for validation).
StressStrainCurve read_curve_csv(std::istream& is, const std::string& name = "<stream>");
StressStrainCurve read_curve_csv(const std::filesystem::path& path);

/// Stress at the 0.2% plastic-offset line E (eps - 0.002); returns NaN if the
/// curve never crosses it. Slope E is taken as an input.
double offset_flow_stress(const StressStrainCurve& curve, double elastic_modulus, double offset = 0.002);

/// Least-squares slope of stress versus strain over [lo, hi].
double tangent_slope(const StressStrainCurve& curve, double lo, double hi);

}  // namespace sgpuq
