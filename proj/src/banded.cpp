#include "sgpuq/banded.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sgpuq {

BandedMatrix::BandedMatrix(std::size_t n, std::size_t lower, std::size_t upper)
    : n_(n), kl_(lower), ku_(upper), ab_(n * (2 * lower + upper + 1), 0.0) {}

void BandedMatrix::set_zero() { std::fill(ab_.begin(), ab_.end(), 0.0); }

void BandedMatrix::clear_row(std::size_t i) {
  const std::size_t j0 = i > kl_ ? i - kl_ : 0;
  const std::size_t j1 = std::min(n_ - 1, i + ku_);
  for (std::size_t j = j0; j <= j1; ++j) (*this)(i, j) = 0.0;
}

std::vector<double> BandedMatrix::multiply(std::span<const double> x) const {
  std::vector<double> y(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    const std::size_t j0 = i > kl_ ? i - kl_ : 0;
    const std::size_t j1 = std::min(n_ - 1, i + ku_);
    double acc = 0.0;
    for (std::size_t j = j0; j <= j1; ++j) acc += (*this)(i, j) * x[j];
    y[i] = acc;
  }
  return y;
}

std::vector<double> BandedMatrix::solve(std::span<const double> rhs) const {
  if (rhs.size() != n_) throw std::invalid_argument("BandedMatrix::solve: size mismatch");
  std::vector<double> lu = ab_;
  std::vector<double> x(rhs.begin(), rhs.end());
  std::vector<std::size_t> piv(n_);
  const std::size_t ld = ldab();
  const std::size_t diag = kl_ + ku_;
  auto at = [&](std::size_t i, std::size_t j) -> double& { return lu[j * ld + diag + i - j]; };

  // Unblocked band LU with partial pivoting; U gains up to kl extra
  // superdiagonals from row interchanges.
  std::size_t ju = 0;
  for (std::size_t j = 0; j < n_; ++j) {
    const std::size_t km = std::min(kl_, n_ - 1 - j);
    std::size_t p = j;
    double best = std::abs(at(j, j));
    for (std::size_t i = j + 1; i <= j + km; ++i) {
      if (std::abs(at(i, j)) > best) {
        best = std::abs(at(i, j));
        p = i;
      }
    }
    piv[j] = p;
    if (best == 0.0) throw std::runtime_error("banded solve failed: singular at column " + std::to_string(j));
    ju = std::max(ju, std::min(p + ku_, n_ - 1));
    if (p != j) {
      for (std::size_t c = j; c <= ju; ++c) std::swap(at(j, c), at(p, c));
    }
    const double inv = 1.0 / at(j, j);
    for (std::size_t i = j + 1; i <= j + km; ++i) at(i, j) *= inv;
    for (std::size_t c = j + 1; c <= ju; ++c) {
      const double u = at(j, c);
      if (u == 0.0) continue;
      for (std::size_t i = j + 1; i <= j + km; ++i) at(i, c) -= at(i, j) * u;
    }
  }

  for (std::size_t j = 0; j < n_; ++j) {
    if (piv[j] != j) std::swap(x[j], x[piv[j]]);
    const std::size_t km = std::min(kl_, n_ - 1 - j);
    for (std::size_t i = j + 1; i <= j + km; ++i) x[i] -= at(i, j) * x[j];
  }
  for (std::size_t jj = n_; jj-- > 0;) {
    const std::size_t c1 = std::min(n_ - 1, jj + diag);
    double acc = x[jj];
    for (std::size_t c = jj + 1; c <= c1; ++c) acc -= at(jj, c) * x[c];
    x[jj] = acc / at(jj, jj);
  }
  return x;
}

}  // namespace sgpuq
