#include "sgpuq/constitutive.hpp"

#include <cmath>
#include <string>

#include "sgpuq/errors.hpp"

namespace sgpuq {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError("SgpParams: " + what);
}

}  // namespace

void SgpParams::validate() const {
  require(l_dis > 0.0, "l_dis must be > 0");
  require(l_en > 0.0, "l_en must be > 0");
  require(yield_strength > 0.0, "yield strength must be > 0");
  require(h_iso > 0.0, "h must be > 0");
  require(r_iso > 0.0, "r must be > 0");
  require(elastic_modulus > 0.0, "E must be > 0");
  require(rate_coeff > 0.0, "q must be > 0");
  require(rate_power >= 0.0 && rate_power <= 1.0, "m must lie in [0, 1]");
  require(poisson >= 0.0 && poisson < 0.5, "poisson must lie in [0, 0.5)");
  require(shear_modulus() > 0.0, "shear modulus must be > 0");
}

SgpParams SgpParams::with_calibrated(std::span<const double> theta) const {
  if (theta.size() != kCalibrated) {
    throw ValidationError("expected " + std::to_string(kCalibrated) + " calibrated parameters, got " +
                          std::to_string(theta.size()));
  }
  SgpParams out = *this;
  out.l_dis = theta[0];
  out.l_en = theta[1];
  out.yield_strength = theta[2];
  out.h_iso = theta[3];
  out.r_iso = theta[4];
  out.elastic_modulus = theta[5];
  return out;
}

double cauchy_stress(const MaterialPointState& state, const SgpParams& p) noexcept {
  return p.elastic_modulus * (state.eps_total - state.eps_plastic);
}

double energetic_microstress_r(const MaterialPointState& state, const SgpParams& p) noexcept {
  const double ep = state.eps_plastic;
  const double magnitude = -p.h_iso * std::expm1(-p.r_iso * std::abs(ep));
  return std::copysign(magnitude, ep);
}

double energetic_microstress_r_derivative(double eps_plastic, const SgpParams& p) noexcept {
  return p.h_iso * p.r_iso * std::exp(-p.r_iso * std::abs(eps_plastic));
}

double energetic_microstress_s(const MaterialPointState& state, const SgpParams& p) noexcept {
  return p.shear_modulus() * p.l_en * p.l_en * state.eps_plastic_grad;
}

double effective_flow_rate(double rate, double grad_rate, const SgpParams& p, double rate_floor) noexcept {
  const double lg = p.l_dis * grad_rate;
  return std::sqrt(rate * rate + lg * lg + rate_floor * rate_floor);
}

DissipativeStresses dissipative_microstresses(const MaterialPointState& state, const SgpParams& p,
                                              double rate_floor) noexcept {
  return dissipative_tangent(state.plastic_rate(), state.plastic_grad_rate(), p, rate_floor).stress;
}

DissipativeTangent dissipative_tangent(double rate, double grad_rate, const SgpParams& p,
                                       double rate_floor) noexcept {
  const double w = effective_flow_rate(rate, grad_rate, p, rate_floor);
  const double l2 = p.l_dis * p.l_dis;
  const double m = p.rate_power;

  // phi = Y (w/q)^m / w and its derivative with respect to w.
  const double scale = (m == 0.0) ? 1.0 : std::pow(w / p.rate_coeff, m);
  const double phi = p.yield_strength * scale / w;
  const double dphi_dw = (m - 1.0) * phi / w;

  const double dw_drate = rate / w;
  const double dw_dgrad = l2 * grad_rate / w;

  DissipativeTangent t;
  t.stress.r = phi * rate;
  t.stress.s = phi * l2 * grad_rate;
  t.dr_drate = phi + rate * dphi_dw * dw_drate;
  t.dr_dgrad_rate = rate * dphi_dw * dw_dgrad;
  t.ds_drate = l2 * grad_rate * dphi_dw * dw_drate;
  t.ds_dgrad_rate = l2 * phi + l2 * grad_rate * dphi_dw * dw_dgrad;
  return t;
}

}  // namespace sgpuq
