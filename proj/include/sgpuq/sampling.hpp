#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace sgpuq {

struct ParamRange {
  std::string name;
  double lower = 0.0;
  double upper = 1.0;

  double width() const noexcept { return upper - lower; }
};

/// Independent uniform priors over named parameters.
struct ParamBox {
  std::vector<ParamRange> ranges;

  std::size_t size() const noexcept { return ranges.size(); }
  void validate() const;
  bool contains(std::span<const double> theta) const noexcept;
  std::vector<std::string> names() const;

  /// Uniform ranges of (l_dis, l_en, Y, h, r, E) used for the micro-pillar
  /// sensitivity study and as calibration priors.
  static ParamBox pillar_priors();
  /// Unit hypercube with names x1..xK.
  static ParamBox unit(std::size_t k);
};

enum class MatrixKind { Lhs, A, B, AB };

/// Row-major N x K design matrix.
struct SampleMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;
  std::uint64_t seed = 0;
  MatrixKind kind = MatrixKind::Lhs;
  std::size_t column_from_b = 0;  ///< k for AB_k

  double operator()(std::size_t i, std::size_t j) const noexcept { return values[i * cols + j]; }
  double& operator()(std::size_t i, std::size_t j) noexcept { return values[i * cols + j]; }
  std::span<const double> row(std::size_t i) const noexcept { return {values.data() + i * cols, cols}; }
};

/// Latin hypercube design: each column places exactly one point in each of
/// the n equal strata of its range, with independent random permutations
/// across columns. Deterministic in `seed`.
SampleMatrix lhs_sample(const ParamBox& box, std::size_t n, std::uint64_t seed);

struct SaltelliDesign {
  SampleMatrix a;
  SampleMatrix b;
  std::vector<SampleMatrix> ab;  ///< ab[k] = A with column k taken from B

  /// Distinct model inputs, N (K + 2).
  std::size_t evaluation_count() const noexcept { return a.rows * (ab.size() + 2); }
};

/// A and B are independent LHS draws from sub-seeds of `seed`.
SaltelliDesign saltelli_matrices(const ParamBox& box, std::size_t n, std::uint64_t seed);

/// CSV with the box names as header; full double round-trip precision.
void write_matrix_csv(std::ostream& os, const SampleMatrix& m, const ParamBox& box);
void write_matrix_csv(const std::filesystem::path& path, const SampleMatrix& m, const ParamBox& box);

}  // namespace sgpuq
