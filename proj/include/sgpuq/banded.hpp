#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sgpuq {

/// Square banded matrix in LAPACK general-band storage (column-major, kl
/// extra rows reserved for pivoting fill-in), solved by band LU with partial
/// pivoting.
class BandedMatrix {
 public:
  BandedMatrix() = default;
  BandedMatrix(std::size_t n, std::size_t lower, std::size_t upper);

  std::size_t size() const noexcept { return n_; }
  std::size_t lower() const noexcept { return kl_; }
  std::size_t upper() const noexcept { return ku_; }

  bool in_band(std::size_t i, std::size_t j) const noexcept {
    return j + kl_ >= i && i + ku_ >= j;
  }

  /// Element access; (i, j) must lie inside the band.
  double& operator()(std::size_t i, std::size_t j) noexcept { return ab_[index(i, j)]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return ab_[index(i, j)]; }

  /// Value at (i, j), zero outside the band.
  double at(std::size_t i, std::size_t j) const noexcept { return in_band(i, j) ? (*this)(i, j) : 0.0; }

  void set_zero();
  void clear_row(std::size_t i);

  std::vector<double> multiply(std::span<const double> x) const;

  /// Solves A x = rhs on a copy of the factorization workspace; the matrix
  /// itself is left untouched. Throws std::runtime_error if A is singular.
  std::vector<double> solve(std::span<const double> rhs) const;

 private:
  std::size_t ldab() const noexcept { return 2 * kl_ + ku_ + 1; }
  std::size_t index(std::size_t i, std::size_t j) const noexcept { return j * ldab() + kl_ + ku_ + i - j; }

  std::size_t n_ = 0;
  std::size_t kl_ = 0;
  std::size_t ku_ = 0;
  std::vector<double> ab_;
};

}  // namespace sgpuq
