#include "sgpuq/sensitivity.hpp"

#include <omp.h>

#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "sgpuq/errors.hpp"
#include "sgpuq/rng.hpp"

namespace sgpuq {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

BatchResult collect(std::vector<double> values) {
  BatchResult out;
  for (std::size_t i = 0; i < values.size(); ++i)
    if (!std::isfinite(values[i])) out.failed_rows.push_back(i);
  out.values = std::move(values);
  return out;
}

// Runs f(i) for i in [0, n) on up to `jobs` threads. SolverFailure leaves
// NaN in place; any other exception is rethrown after the loop.
template <class F>
std::vector<double> parallel_fill(std::size_t n, int jobs, F&& f) {
  std::vector<double> values(n, kNaN);
  std::exception_ptr error;
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 1) num_threads(jobs < 1 ? 1 : jobs)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      values[static_cast<std::size_t>(i)] = f(static_cast<std::size_t>(i));
    } catch (const SolverFailure&) {
    } catch (...) {
#pragma omp critical(sgpuq_batch_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return values;
}

void check_failures(const BatchResult& r, double max_fraction, const char* what) {
  if (r.values.empty()) return;
  const double frac = static_cast<double>(r.failed_rows.size()) / static_cast<double>(r.values.size());
  if (frac > max_fraction) {
    std::ostringstream msg;
    msg << what << ": " << r.failed_rows.size() << " of " << r.values.size() << " rows failed";
    throw SolverFailure(msg.str());
  }
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

BatchResult evaluate_batch_serial(const SampleMatrix& matrix, const RowModel& model) {
  std::vector<double> values(matrix.rows, kNaN);
  for (std::size_t i = 0; i < matrix.rows; ++i) {
    try {
      values[i] = model(matrix.row(i));
    } catch (const SolverFailure&) {
    }
  }
  return collect(std::move(values));
}

BatchResult evaluate_batch_parallel(const SampleMatrix& matrix, const RowModel& model, int jobs) {
  return collect(parallel_fill(matrix.rows, jobs, [&](std::size_t i) { return model(matrix.row(i)); }));
}

BatchResult evaluate_qoi_batch(const SampleMatrix& matrix, double length, const ForwardModel& model, int jobs,
                               double max_failure_fraction) {
  auto r = evaluate_batch_parallel(
      matrix, [&](std::span<const double> theta) { return model.strain_energy(theta, length); }, jobs);
  check_failures(r, max_failure_fraction, "QoI batch");
  return r;
}

std::vector<double> total_effect_indices(std::span<const double> y_a, std::span<const double> y_b,
                                         const std::vector<std::vector<double>>& y_ab, bool normalize) {
  const std::size_t n = y_a.size();
  if (n == 0) throw EmptySamples("total_effect_indices: no samples");
  if (y_b.size() != n) throw ValidationError("total_effect_indices: yA and yB differ in length");
  for (const auto& col : y_ab)
    if (col.size() != n) throw ValidationError("total_effect_indices: yAB column length mismatch");

  double variance = 1.0;
  if (normalize) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (std::isfinite(y_a[j])) sum += y_a[j], ++count;
      if (std::isfinite(y_b[j])) sum += y_b[j], ++count;
    }
    if (count < 2) throw ZeroVariance("total_effect_indices: fewer than two finite outputs");
    const double m = sum / static_cast<double>(count);
    double ss = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (std::isfinite(y_a[j])) ss += (y_a[j] - m) * (y_a[j] - m);
      if (std::isfinite(y_b[j])) ss += (y_b[j] - m) * (y_b[j] - m);
    }
    variance = ss / static_cast<double>(count - 1);
    if (!(variance >= 1e-30)) throw ZeroVariance("total_effect_indices: pooled variance below 1e-30");
  }

  std::vector<double> s(y_ab.size());
  for (std::size_t k = 0; k < y_ab.size(); ++k) {
    double acc = 0.0;
    std::size_t used = 0;
    for (std::size_t j = 0; j < n; ++j) {
      const double d = y_a[j] - y_ab[k][j];
      if (!std::isfinite(d)) continue;
      acc += d * d;
      ++used;
    }
    if (used == 0) throw EmptySamples("total_effect_indices: no finite pairs for a parameter");
    s[k] = acc / (2.0 * static_cast<double>(used)) / variance;
  }
  return s;
}

const IndexSummary& SensitivityReport::at(const std::string& parameter, std::optional<double> size) const {
  for (const auto& e : entries) {
    if (e.parameter != parameter) continue;
    if (!size && !e.size) return e;
    if (size && e.size && *e.size == *size) return e;
  }
  throw OutOfRange("no sensitivity entry for " + parameter);
}

double SensitivityReport::mean_relative_std(std::optional<double> size) const {
  double acc = 0.0;
  std::size_t count = 0;
  for (const auto& e : entries) {
    if (size.has_value() != e.size.has_value()) continue;
    if (size && *size != *e.size) continue;
    if (e.mean == 0.0) continue;
    acc += e.std / std::abs(e.mean);
    ++count;
  }
  if (count == 0) throw EmptySamples("mean_relative_std: no matching entries");
  return acc / static_cast<double>(count);
}

SensitivityReport size_sweep_sensitivity(const ParamBox& box, const std::vector<double>& sizes,
                                         const SizedModel& model, const SweepOptions& options) {
  box.validate();
  if (sizes.empty()) throw ValidationError("size_sweep_sensitivity: no sizes");
  if (options.n < 2) throw ValidationError("size_sweep_sensitivity: N must be at least 2");
  if (options.replicates < 1) throw ValidationError("size_sweep_sensitivity: R must be at least 1");

  const std::size_t k_dim = box.size();
  const std::size_t n = options.n;
  const std::size_t n_sizes = sizes.size();
  const std::size_t blocks = k_dim + 2;  // A, B, AB_1..AB_K

  // replicate -> size (or n_sizes for the mean) -> parameter -> S
  std::vector<std::vector<std::vector<double>>> s_rep(options.replicates);
  SampleMatrix first_a;
  std::vector<std::vector<double>> first_qoi;

  for (std::size_t rep = 0; rep < options.replicates; ++rep) {
    const auto design = saltelli_matrices(box, n, derive_seed(options.seed, rep));
    auto block = [&](std::size_t b) -> const SampleMatrix& {
      return b == 0 ? design.a : b == 1 ? design.b : design.ab[b - 2];
    };

    // One flat task per (block row, size); y[size][block * n + row].
    const std::size_t rows = blocks * n;
    auto flat = parallel_fill(rows * n_sizes, options.jobs, [&](std::size_t t) {
      const std::size_t si = t % n_sizes;
      const std::size_t row = t / n_sizes;
      return model(block(row / n).row(row % n), sizes[si]);
    });

    std::vector<std::vector<double>> y(n_sizes + 1, std::vector<double>(rows));
    for (std::size_t row = 0; row < rows; ++row) {
      double sum = 0.0;
      for (std::size_t si = 0; si < n_sizes; ++si) {
        y[si][row] = flat[row * n_sizes + si];
        sum += y[si][row];  // NaN propagates into the mean
      }
      y[n_sizes][row] = sum / static_cast<double>(n_sizes);
    }

    if (rep == 0) {
      first_a = design.a;
      for (std::size_t si = 0; si <= n_sizes; ++si) first_qoi.emplace_back(y[si].begin(), y[si].begin() + n);
    }
    for (std::size_t si = 0; si <= n_sizes; ++si) {
      check_failures(collect(y[si]), options.max_failure_fraction, "sensitivity batch");
      std::span<const double> all(y[si]);
      std::vector<std::vector<double>> y_ab(k_dim);
      for (std::size_t k = 0; k < k_dim; ++k) {
        auto part = all.subspan((k + 2) * n, n);
        y_ab[k].assign(part.begin(), part.end());
      }
      s_rep[rep].push_back(total_effect_indices(all.subspan(0, n), all.subspan(n, n), y_ab, true));
    }
  }

  SensitivityReport report;
  report.sizes = sizes;
  report.n = n;
  report.replicates = options.replicates;
  report.seed = options.seed;
  report.evaluations_per_size = options.replicates * n * blocks;
  report.scatter_inputs = std::move(first_a);
  report.scatter_qoi = std::move(first_qoi);
  const auto names = box.names();
  for (std::size_t si = 0; si <= n_sizes; ++si) {
    for (std::size_t k = 0; k < k_dim; ++k) {
      IndexSummary e;
      e.parameter = names[k];
      if (si < n_sizes) e.size = sizes[si];
      for (std::size_t rep = 0; rep < options.replicates; ++rep) e.replicates.push_back(s_rep[rep][si][k]);
      e.mean = mean_of(e.replicates);
      e.std = sample_std(e.replicates);
      report.entries.push_back(std::move(e));
    }
  }
  return report;
}

SensitivityReport size_sweep_sensitivity(const ParamBox& box, const std::vector<double>& sizes,
                                         const ForwardModel& model, const SweepOptions& options) {
  return size_sweep_sensitivity(
      box, sizes, [&model](std::span<const double> theta, double length) { return model.strain_energy(theta, length); },
      options);
}

void write_indices_csv(const std::filesystem::path& path, const SensitivityReport& report) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path.string());
  os << "parameter,size,S_mean,S_std\n" << std::setprecision(10);
  for (const auto& e : report.entries) {
    os << e.parameter << ',';
    if (e.size) os << *e.size; else os << "mean";
    os << ',' << e.mean << ',' << e.std << '\n';
  }
  if (!os) throw IoError("write failed: " + path.string());
}

void scatter_export(const SampleMatrix& matrix, std::span<const double> qoi, const ParamBox& box,
                    const std::filesystem::path& path) {
  if (qoi.size() != matrix.rows) throw ValidationError("scatter_export: QoI length does not match matrix rows");
  if (box.size() != matrix.cols) throw ValidationError("scatter_export: box does not match matrix columns");
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path.string());
  for (const auto& name : box.names()) os << name << ',';
  os << "qoi\n" << std::setprecision(17);
  for (std::size_t i = 0; i < matrix.rows; ++i) {
    for (std::size_t j = 0; j < matrix.cols; ++j) os << matrix(i, j) << ',';
    os << qoi[i] << '\n';
  }
  if (!os) throw IoError("write failed: " + path.string());
}

}  // namespace sgpuq
