#include "sgpuq/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <regex>
#include <iomanip>
#include <sstream>

#include "sgpuq/errors.hpp"
#include "sgpuq/rng.hpp"

namespace sgpuq {

namespace fs = std::filesystem;

std::string to_string(Provenance p) { return p == Provenance::Synthetic ? "synthetic" : "ingested"; }

bool same_size(double a, double b) noexcept { return std::abs(a - b) <= 1e-9 * std::max(std::abs(a), std::abs(b)); }

std::string entry_file_name(double size, int replicate) {
  std::ostringstream os;
  os << 'L';
  if (size == std::floor(size) && size < 1e15)
    os << static_cast<long long>(size);
  else
    os << std::setprecision(12) << size;
  os << "_r" << replicate << ".csv";
  return os.str();
}

void Dataset::validate() const {
  if (entries.empty()) throw ValidationError("dataset is empty");
  for (const auto& e : entries) {
    const std::string tag = entry_file_name(e.size, e.replicate);
    if (!(e.size > 0.0) || !std::isfinite(e.size)) throw ValidationError(tag + ": size must be positive");
    if (e.curve.size() < 2) throw ValidationError(tag + ": curve needs at least two points");
    if (e.curve.strain.size() != e.curve.stress.size()) throw ValidationError(tag + ": column length mismatch");
    for (std::size_t i = 1; i < e.curve.size(); ++i)
      if (!(e.curve.strain[i] > e.curve.strain[i - 1]))
        throw ValidationError(tag + ": strain is not strictly increasing at row " + std::to_string(i + 1));
  }
}

std::vector<double> Dataset::sizes() const {
  std::vector<double> out;
  for (const auto& e : entries)
    if (std::none_of(out.begin(), out.end(), [&](double s) { return same_size(s, e.size); })) out.push_back(e.size);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<const DatasetEntry*> Dataset::at_size(double size) const {
  std::vector<const DatasetEntry*> out;
  for (const auto& e : entries)
    if (same_size(e.size, size)) out.push_back(&e);
  return out;
}

bool Dataset::has_size(double size) const {
  return std::any_of(entries.begin(), entries.end(), [&](const auto& e) { return same_size(e.size, size); });
}

SizeNoiseSummary Dataset::noise_summary(double size) const {
  const auto reps = at_size(size);
  if (reps.empty()) throw MissingSize("no data at size " + std::to_string(size));
  if (reps.size() < 2) throw ValidationError("noise summary needs at least two replicates");
  const auto& grid = reps.front()->curve.strain;
  const std::size_t n = grid.size();
  std::vector<std::vector<double>> values;
  for (const auto* e : reps) values.push_back(e->curve.resample(grid));

  SizeNoiseSummary s;
  s.size = size;
  s.replicates = reps.size();
  double total = 0.0, var_sum = 0.0;
  const double m = static_cast<double>(reps.size());
  for (std::size_t i = 0; i < n; ++i) {
    double mean = 0.0;
    for (const auto& v : values) mean += v[i];
    mean /= m;
    double ss = 0.0;
    for (const auto& v : values) ss += (v[i] - mean) * (v[i] - mean);
    var_sum += ss / (m - 1.0);
    total += mean;
  }
  s.mean_stress = total / static_cast<double>(n);
  s.pooled_std = std::sqrt(var_sum / static_cast<double>(n));
  s.relative_std = s.mean_stress != 0.0 ? s.pooled_std / std::abs(s.mean_stress) : 0.0;
  return s;
}

std::vector<SizeNoiseSummary> Dataset::noise_summary() const {
  std::vector<SizeNoiseSummary> out;
  for (double s : sizes()) out.push_back(noise_summary(s));
  return out;
}

Dataset Dataset::subset(const std::vector<double>& wanted) const {
  Dataset out;
  out.provenance = provenance;
  for (double s : wanted)
    if (!has_size(s)) throw MissingSize("dataset has no size " + std::to_string(s) + " nm");
  for (const auto& e : entries)
    if (std::any_of(wanted.begin(), wanted.end(), [&](double s) { return same_size(s, e.size); }))
      out.entries.push_back(e);
  return out;
}

namespace {

void sort_entries(std::vector<DatasetEntry>& entries) {
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    return a.size != b.size ? a.size < b.size : a.replicate < b.replicate;
  });
}

}  // namespace

Dataset ingest(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  static const std::regex pattern(R"(L([0-9]+(?:\.[0-9]+)?)_r([0-9]+)\.csv)");
  std::vector<std::pair<fs::path, std::pair<double, int>>> files;
  for (const auto& item : fs::directory_iterator(dir)) {
    if (!item.is_regular_file() || item.path().extension() != ".csv") continue;
    const std::string name = item.path().filename().string();
    std::smatch m;
    if (!std::regex_match(name, m, pattern))
      throw ValidationError(name + ": expected a file name of the form L<size_nm>_r<replicate>.csv");
    files.push_back({item.path(), {std::stod(m[1].str()), std::stoi(m[2].str())}});
  }
  if (files.empty()) throw ValidationError("no dataset files in " + dir.string());
  std::sort(files.begin(), files.end());

  Dataset ds;
  ds.provenance = Provenance::Ingested;
  ds.entries.resize(files.size());
  std::exception_ptr error;
  const auto count = static_cast<std::ptrdiff_t>(files.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      const auto& [path, key] = files[static_cast<std::size_t>(i)];
      auto curve = read_curve_csv(path);
      double mean = 0.0;
      for (auto& e : curve.strain) e = std::abs(e);
      for (double s : curve.stress) mean += s;
      if (mean < 0.0)
        for (auto& s : curve.stress) s = -s;
      ds.entries[static_cast<std::size_t>(i)] = {key.first, key.second, std::move(curve)};
    } catch (...) {
#pragma omp critical(sgpuq_ingest_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  sort_entries(ds.entries);
  ds.validate();
  return ds;
}

void export_dataset(const Dataset& dataset, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  for (const auto& e : dataset.entries) write_curve_csv(dir / entry_file_name(e.size, e.replicate), e.curve);
}

void NoiseModel::validate() const {
  if (!(relative_std >= 0.0) || !std::isfinite(relative_std)) throw ValidationError("noise relative_std must be >= 0");
  if (!(curve_share >= 0.0 && curve_share <= 1.0)) throw ValidationError("noise curve_share must lie in [0, 1]");
}

Dataset generate_synthetic(const SgpParams& truth, const std::vector<double>& sizes, int replicates,
                           const NoiseModel& noise, std::uint64_t seed, const ForwardModel& model, int jobs) {
  if (replicates < 1) throw ValidationError("replicates must be >= 1");
  if (sizes.empty()) throw ValidationError("no sizes requested");
  noise.validate();
  truth.validate();
  const auto theta = truth.calibrated();
  ForwardModel fm = model;
  fm.base = truth;

  std::vector<StressStrainCurve> clean(sizes.size());
  std::exception_ptr error;
  const auto n_sizes = static_cast<std::ptrdiff_t>(sizes.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(jobs < 1 ? 1 : jobs)
  for (std::ptrdiff_t i = 0; i < n_sizes; ++i) {
    try {
      clean[static_cast<std::size_t>(i)] = fm.curve(theta, sizes[static_cast<std::size_t>(i)]);
    } catch (...) {
#pragma omp critical(sgpuq_synth_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);

  Dataset ds;
  ds.provenance = Provenance::Synthetic;
  for (std::size_t si = 0; si < sizes.size(); ++si) {
    const auto& s = clean[si].stress;
    double m = 0.0, q = 0.0;
    for (double v : s) m += v, q += v * v;
    m /= static_cast<double>(s.size());
    q /= static_cast<double>(s.size());
    // Expected pooled variance c^2 q + a^2 q must equal (T m)^2.
    const double total = noise.relative_std * noise.relative_std * m * m / q;
    const double c2 = noise.curve_share * total;
    const double sigma_log = std::sqrt(std::log1p(c2));
    const double sigma_add = std::sqrt((1.0 - noise.curve_share) * total * q);
    for (int r = 1; r <= replicates; ++r) {
      Rng rng(derive_seed(seed, si * 1000003u + static_cast<std::uint64_t>(r)));
      const double factor = std::exp(sigma_log * rng.normal() - 0.5 * sigma_log * sigma_log);
      DatasetEntry e{sizes[si], r, clean[si]};
      for (auto& v : e.curve.stress) v = factor * v + sigma_add * rng.normal();
      ds.entries.push_back(std::move(e));
    }
  }
  sort_entries(ds.entries);
  return ds;
}

void CaseSplit::validate() const {
  if (training.empty() || testing.empty()) throw ValidationError("case split needs training and testing sizes");
  for (double a : training)
    for (double b : testing)
      if (same_size(a, b)) throw ValidationError("size " + std::to_string(a) + " is in both training and testing");
}

CaseSplit CaseSplit::case_one() { return {"Case I", {300.0, 500.0, 700.0, 1000.0}, {200.0}}; }
CaseSplit CaseSplit::case_two() { return {"Case II", {200.0, 300.0, 500.0, 700.0}, {1000.0}}; }

std::pair<Dataset, Dataset> case_split(const Dataset& dataset, const CaseSplit& split) {
  split.validate();
  return {dataset.subset(split.training), dataset.subset(split.testing)};
}

}  // namespace sgpuq
