#pragma once

#include <span>

#include "sgpuq/curve.hpp"
#include "sgpuq/fem.hpp"
#include "sgpuq/qoi.hpp"

namespace sgpuq {

/// Everything needed to turn a calibrated parameter vector and a pillar size
/// into a compression response. Stateless and safe to share across threads.
struct ForwardModel {
  SgpParams base;  ///< supplies m, q, nu; calibrated entries are overwritten
  std::size_t n_elements = 30;
  std::size_t quadrature_order = 3;
  LoadProgram program;
  SolverOptions solver;
  double qoi_strain = kQoiStrain;

  SgpParams params(std::span<const double> theta) const { return base.with_calibrated(theta); }
  Mesh1D mesh(double length) const { return Mesh1D::uniform(length, n_elements, quadrature_order); }

  /// (|strain|, |stress|) curve; throws SolverFailure on solver breakdown.
  StressStrainCurve curve(std::span<const double> theta, double length) const;
  double strain_energy(std::span<const double> theta, double length) const;
};

}  // namespace sgpuq
