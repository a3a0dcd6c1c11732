#include "sgpuq/curve.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "sgpuq/errors.hpp"

namespace sgpuq {

double StressStrainCurve::stress_at(double eps) const {
  if (strain.empty()) throw ValidationError("stress_at on an empty curve");
  if (eps <= strain.front()) return stress.front();
  if (eps >= strain.back()) return stress.back();
  const auto it = std::upper_bound(strain.begin(), strain.end(), eps);
  const auto i = static_cast<std::size_t>(it - strain.begin());
  const double t = (eps - strain[i - 1]) / (strain[i] - strain[i - 1]);
  return stress[i - 1] + t * (stress[i] - stress[i - 1]);
}

std::vector<double> StressStrainCurve::resample(const std::vector<double>& grid) const {
  std::vector<double> out;
  out.reserve(grid.size());
  for (double e : grid) out.push_back(stress_at(e));
  return out;
}

void write_curve_csv(std::ostream& os, const StressStrainCurve& curve) {
  os << "strain,stress_gpa\n" << std::setprecision(12);
  for (std::size_t i = 0; i < curve.size(); ++i) os << curve.strain[i] << ',' << curve.stress[i] << '\n';
}

void write_curve_csv(const std::filesystem::path& path, const StressStrainCurve& curve) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  write_curve_csv(os, curve);
  if (!os) throw IoError("write failed: " + path.string());
}

StressStrainCurve read_curve_csv(std::istream& is, const std::string& name) {
  StressStrainCurve curve;
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(is, line)) throw ParseError(name, 1, "missing header");
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "strain,stress_gpa") throw ParseError(name, lineno, "expected header 'strain,stress_gpa'");
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError(name, lineno, "expected two comma-separated fields");
    try {
      std::size_t used = 0;
      const std::string a = line.substr(0, comma);
      const std::string b = line.substr(comma + 1);
      const double e = std::stod(a, &used);
      if (used != a.size()) throw std::invalid_argument(a);
      const double s = std::stod(b, &used);
      if (used != b.size()) throw std::invalid_argument(b);
      if (!std::isfinite(e) || !std::isfinite(s)) throw std::invalid_argument("non-finite");
      curve.strain.push_back(e);
      curve.stress.push_back(s);
    } catch (const std::logic_error&) {
      throw ParseError(name, lineno, "malformed number in '" + line + "'");
    }
  }
  return curve;
}

StressStrainCurve read_curve_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  return read_curve_csv(is, path.string());
}

double offset_flow_stress(const StressStrainCurve& curve, double elastic_modulus, double offset) {
  // g(eps) = stress - E (eps - offset) is positive before the crossing.
  double g_prev = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const double g = curve.stress[i] - elastic_modulus * (curve.strain[i] - offset);
    if (i > 0 && g_prev > 0.0 && g <= 0.0) {
      const double t = g_prev / (g_prev - g);
      return curve.stress[i - 1] + t * (curve.stress[i] - curve.stress[i - 1]);
    }
    g_prev = g;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double tangent_slope(const StressStrainCurve& curve, double lo, double hi) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  // Small tolerance so grid points landing on the window edges by rounding count.
  const double tol = 1e-12;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const double x = curve.strain[i];
    if (x < lo - tol || x > hi + tol) continue;
    const double y = curve.stress[i];
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) throw ValidationError("tangent_slope: fewer than two points in window");
  const double nn = static_cast<double>(n);
  return (nn * sxy - sx * sy) / (nn * sxx - sx * sx);
}

}  // namespace sgpuq
