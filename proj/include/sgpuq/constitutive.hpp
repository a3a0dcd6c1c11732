#pragma once

// Pointwise constitutive relations of the one-dimensional strain gradient
// plasticity model. Units throughout: stress in GPa, length in nm, time in s.

#include <array>
#include <cstddef>
#include <span>
#include <string_view>

namespace sgpuq {

/// Material parameters of the gradient plasticity model.
///
/// The first six entries form the calibrated vector (l_dis, l_en, Y, h, r, E);
/// the visco-plastic pair (m, q) is fixed at (0, 1) for rate-independent
/// response. Poisson's ratio only enters through the shear modulus.
struct SgpParams {
  double l_dis = 20.0;             ///< dissipative length scale [nm]
  double l_en = 75.0;              ///< energetic length scale [nm]
  double yield_strength = 0.047;   ///< Y [GPa]
  double h_iso = 0.062;            ///< isotropic hardening modulus h [GPa]
  double r_iso = 298.42;           ///< isotropic hardening exponent r [-]
  double elastic_modulus = 128.44; ///< E [GPa]
  double rate_power = 0.0;         ///< m [-]
  double rate_coeff = 1.0;         ///< q [1/s]
  double poisson = 0.3;            ///< nu [-]

  static constexpr std::size_t kCalibrated = 6;
  static constexpr std::array<std::string_view, kCalibrated> kNames{"l_dis", "l_en", "Y", "h", "r", "E"};

  /// mu = E / (2 (1 + nu))
  double shear_modulus() const noexcept { return elastic_modulus / (2.0 * (1.0 + poisson)); }

  /// Throws ValidationError naming the first violated bound.
  void validate() const;

  std::array<double, kCalibrated> calibrated() const noexcept {
    return {l_dis, l_en, yield_strength, h_iso, r_iso, elastic_modulus};
  }

  /// Copy of *this with the six calibrated entries replaced, in kNames order.
  SgpParams with_calibrated(std::span<const double> theta) const;

  /// 500 nm pillar reference set: E=128.44, Y=0.047, h=0.062, r=298.42,
  /// l_en=75 nm, l_dis=20 nm, m=0, q=1.
  static SgpParams reference_pillar() { return {}; }
};

/// Kinematic state at a quadrature point for one implicit time step.
struct MaterialPointState {
  double eps_total = 0.0;
  double eps_plastic = 0.0;
  double eps_plastic_grad = 0.0;       ///< [1/nm]
  double eps_plastic_prev = 0.0;
  double eps_plastic_grad_prev = 0.0;  ///< [1/nm]
  double dt = 1.0;                     ///< [s]

  double plastic_rate() const noexcept { return (eps_plastic - eps_plastic_prev) / dt; }
  double plastic_grad_rate() const noexcept { return (eps_plastic_grad - eps_plastic_grad_prev) / dt; }
};

inline constexpr double kDefaultRateFloor = 1e-8;  // [1/s]

struct DissipativeStresses {
  double r = 0.0;  ///< R_dis [GPa]
  double s = 0.0;  ///< S_dis [GPa nm]
};

/// Dissipative stresses together with their partial derivatives with respect
/// to the plastic rate and the plastic-gradient rate.
struct DissipativeTangent {
  DissipativeStresses stress;
  double dr_drate = 0.0;
  double dr_dgrad_rate = 0.0;
  double ds_drate = 0.0;
  double ds_dgrad_rate = 0.0;
};

/// T = E (eps - eps_p)
double cauchy_stress(const MaterialPointState& state, const SgpParams& p) noexcept;

/// R_en = sign(eps_p) h (1 - exp(-r |eps_p|)), accumulated strain p = |eps_p|.
double energetic_microstress_r(const MaterialPointState& state, const SgpParams& p) noexcept;
double energetic_microstress_r_derivative(double eps_plastic, const SgpParams& p) noexcept;

/// S_en = mu l_en^2 grad(eps_p)
double energetic_microstress_s(const MaterialPointState& state, const SgpParams& p) noexcept;

/// Effective nonlocal flow rate with the regularising floor:
/// sqrt(rate^2 + l_dis^2 grad_rate^2 + floor^2).
double effective_flow_rate(double rate, double grad_rate, const SgpParams& p,
                           double rate_floor = kDefaultRateFloor) noexcept;

/// R_dis = Y (w/q)^m rate / w,  S_dis = Y l_dis^2 (w/q)^m grad_rate / w.
DissipativeStresses dissipative_microstresses(const MaterialPointState& state, const SgpParams& p,
                                              double rate_floor = kDefaultRateFloor) noexcept;

/// Same stresses as a function of the rates, with analytic partials.
DissipativeTangent dissipative_tangent(double rate, double grad_rate, const SgpParams& p,
                                       double rate_floor = kDefaultRateFloor) noexcept;

}  // namespace sgpuq
