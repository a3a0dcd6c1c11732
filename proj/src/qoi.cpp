#include "sgpuq/qoi.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sgpuq/errors.hpp"
#include "sgpuq/rng.hpp"

namespace sgpuq {

QoiValue strain_energy(const StressStrainCurve& curve, double up_to_strain, std::string source) {
  if (curve.empty()) throw CurveTooShort("strain_energy: empty curve");
  if (!(up_to_strain > 0.0)) throw ValidationError("strain_energy: up_to_strain must be > 0");

  std::vector<double> x, y;
  x.reserve(curve.size() + 1);
  y.reserve(curve.size() + 1);
  if (std::abs(curve.strain.front()) > 0.0) {
    x.push_back(0.0);
    y.push_back(0.0);
  }
  for (std::size_t i = 0; i < curve.size(); ++i) {
    x.push_back(std::abs(curve.strain[i]));
    y.push_back(std::abs(curve.stress[i]));
  }
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (x[i] < x[i - 1]) throw ValidationError("strain_energy: strain grid must be non-decreasing");
  }

  if (x.back() < up_to_strain) {
    const std::size_t n = x.size();
    const double spacing = n >= 2 ? x[n - 1] - x[n - 2] : 0.0;
    // Rounding slack so a grid built as k * dt still counts as reaching its end.
    const double slack = 1e-9 * up_to_strain;
    if (n < 2 || up_to_strain - x.back() > spacing + slack) {
      throw CurveTooShort("strain_energy: curve ends at " + std::to_string(x.back()) + ", needs " +
                          std::to_string(up_to_strain));
    }
    const double slope = spacing > 0.0 ? (y[n - 1] - y[n - 2]) / spacing : 0.0;
    y.push_back(y.back() + slope * (up_to_strain - x.back()));
    x.push_back(up_to_strain);
  }

  double q = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (x[i - 1] >= up_to_strain) break;
    double x1 = x[i], y1 = y[i];
    if (x1 > up_to_strain) {
      const double t = (up_to_strain - x[i - 1]) / (x1 - x[i - 1]);
      y1 = y[i - 1] + t * (y1 - y[i - 1]);
      x1 = up_to_strain;
    }
    q += 0.5 * (x1 - x[i - 1]) * (y1 + y[i - 1]);
  }
  return {q, std::move(source)};
}

EmpiricalCdf::EmpiricalCdf(std::vector<double> samples) : sorted_(std::move(samples)) {
  std::sort(sorted_.begin(), sorted_.end());
}

double EmpiricalCdf::operator()(double x) const noexcept {
  if (sorted_.empty()) return 0.0;
  const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
  return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
}

double EmpiricalCdf::mean() const noexcept {
  if (sorted_.empty()) return 0.0;
  return std::accumulate(sorted_.begin(), sorted_.end(), 0.0) / static_cast<double>(sorted_.size());
}

double cdf_l1_distance(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw EmptySamples("cdf distance needs non-empty sample sets");
  const EmpiricalCdf fa({a.begin(), a.end()});
  const EmpiricalCdf fb({b.begin(), b.end()});
  std::vector<double> knots;
  knots.reserve(a.size() + b.size());
  knots.insert(knots.end(), fa.sorted().begin(), fa.sorted().end());
  knots.insert(knots.end(), fb.sorted().begin(), fb.sorted().end());
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

  // Both CDFs are constant on [knots[i], knots[i+1]).
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    total += std::abs(fa(knots[i]) - fb(knots[i])) * (knots[i + 1] - knots[i]);
  }
  return total;
}

double cdf_error(std::span<const double> data_samples, std::span<const double> model_samples) {
  if (data_samples.empty() || model_samples.empty()) throw EmptySamples("cdf_error: empty sample set");
  const double mean =
      std::accumulate(data_samples.begin(), data_samples.end(), 0.0) / static_cast<double>(data_samples.size());
  if (mean == 0.0) throw ZeroMean("cdf_error: data mean is zero");
  return cdf_l1_distance(data_samples, model_samples) / mean;
}

double cdf_error(const std::vector<QoiValue>& data_samples, const std::vector<QoiValue>& model_samples) {
  std::vector<double> d, m;
  d.reserve(data_samples.size());
  m.reserve(model_samples.size());
  for (const auto& q : data_samples) d.push_back(q.value);
  for (const auto& q : model_samples) m.push_back(q.value);
  return cdf_error(d, m);
}

CdfErrorStats cdf_error_bootstrap(std::span<const double> data, std::span<const double> model, std::size_t resamples,
                                  std::uint64_t seed) {
  CdfErrorStats out;
  out.value = cdf_error(data, model);
  if (resamples == 0) {
    out.mean = out.value;
    return out;
  }
  Rng rng(seed);
  std::vector<double> d(data.size()), m(model.size()), values;
  for (std::size_t b = 0; b < resamples; ++b) {
    for (auto& v : d) v = data[rng.below(data.size())];
    for (auto& v : m) v = model[rng.below(model.size())];
    try {
      values.push_back(cdf_error(d, m));
    } catch (const ZeroMean&) {
    }
  }
  if (values.empty()) throw ZeroMean("cdf_error_bootstrap: every resample had zero data mean");
  const double n = static_cast<double>(values.size());
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  out.std = values.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  return out;
}

}  // namespace sgpuq
