#include "sgpuq/forward_model.hpp"

namespace sgpuq {

StressStrainCurve ForwardModel::curve(std::span<const double> theta, double length) const {
  return run_compression(params(theta), mesh(length), program, solver).curve;
}

double ForwardModel::strain_energy(std::span<const double> theta, double length) const {
  return sgpuq::strain_energy(curve(theta, length), qoi_strain).value;
}

}  // namespace sgpuq
