#include "sgpuq/sampling.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <set>

#include "sgpuq/errors.hpp"
#include "sgpuq/rng.hpp"

namespace sgpuq {

void ParamBox::validate() const {
  if (ranges.empty()) throw ValidationError("ParamBox: no parameters");
  std::set<std::string> seen;
  for (const auto& r : ranges) {
    if (!(r.lower < r.upper)) throw ValidationError("ParamBox: lower must be < upper for " + r.name);
    if (!seen.insert(r.name).second) throw ValidationError("ParamBox: duplicate name " + r.name);
  }
}

bool ParamBox::contains(std::span<const double> theta) const noexcept {
  if (theta.size() != ranges.size()) return false;
  for (std::size_t k = 0; k < ranges.size(); ++k) {
    if (!(theta[k] >= ranges[k].lower && theta[k] <= ranges[k].upper)) return false;
  }
  return true;
}

std::vector<std::string> ParamBox::names() const {
  std::vector<std::string> out;
  out.reserve(ranges.size());
  for (const auto& r : ranges) out.push_back(r.name);
  return out;
}

ParamBox ParamBox::pillar_priors() {
  return {{{"l_dis", 40.0, 900.0},
           {"l_en", 120.0, 450.0},
           {"Y", 0.02, 0.21},
           {"h", 0.00001, 0.75},
           {"r", 0.2, 450.0},
           {"E", 118.43, 140.64}}};
}

ParamBox ParamBox::unit(std::size_t k) {
  ParamBox box;
  for (std::size_t i = 0; i < k; ++i) box.ranges.push_back({"x" + std::to_string(i + 1), 0.0, 1.0});
  return box;
}

SampleMatrix lhs_sample(const ParamBox& box, std::size_t n, std::uint64_t seed) {
  box.validate();
  if (n < 1) throw ValidationError("lhs_sample: n must be >= 1");
  SampleMatrix m;
  m.rows = n;
  m.cols = box.size();
  m.values.resize(n * m.cols);
  m.seed = seed;
  m.kind = MatrixKind::Lhs;

  Rng rng(seed);
  std::vector<std::size_t> perm(n);
  const double dn = static_cast<double>(n);
  for (std::size_t j = 0; j < m.cols; ++j) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(perm));
    const auto& r = box.ranges[j];
    for (std::size_t i = 0; i < n; ++i) {
      const double unit = (static_cast<double>(perm[i]) + rng.uniform()) / dn;
      double v = r.lower + unit * r.width();
      if (v >= r.upper) v = std::nextafter(r.upper, r.lower);
      m(i, j) = v;
    }
  }
  return m;
}

SaltelliDesign saltelli_matrices(const ParamBox& box, std::size_t n, std::uint64_t seed) {
  if (n < 2) throw ValidationError("saltelli_matrices: n must be >= 2");
  SaltelliDesign d;
  d.a = lhs_sample(box, n, derive_seed(seed, 0));
  d.a.kind = MatrixKind::A;
  d.b = lhs_sample(box, n, derive_seed(seed, 1));
  d.b.kind = MatrixKind::B;
  d.ab.reserve(box.size());
  for (std::size_t k = 0; k < box.size(); ++k) {
    SampleMatrix ab = d.a;
    ab.kind = MatrixKind::AB;
    ab.column_from_b = k;
    for (std::size_t i = 0; i < n; ++i) ab(i, k) = d.b(i, k);
    d.ab.push_back(std::move(ab));
  }
  return d;
}

void write_matrix_csv(std::ostream& os, const SampleMatrix& m, const ParamBox& box) {
  if (box.size() != m.cols) throw ValidationError("write_matrix_csv: box/matrix column mismatch");
  for (std::size_t j = 0; j < m.cols; ++j) os << (j ? "," : "") << box.ranges[j].name;
  os << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < m.rows; ++i) {
    for (std::size_t j = 0; j < m.cols; ++j) os << (j ? "," : "") << m(i, j);
    os << '\n';
  }
}

void write_matrix_csv(const std::filesystem::path& path, const SampleMatrix& m, const ParamBox& box) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  write_matrix_csv(os, m, box);
}

}  // namespace sgpuq
