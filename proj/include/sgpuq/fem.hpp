#pragma once

// Dual-mixed finite element solver for the 1D micro-pillar compression problem.
//
// Unknowns: displacement u on quadratic (3-node) elements and plastic strain
// eps_p on linear (2-node) elements over the same mesh. Boundary conditions:
// u(0) = 0, u(L) = u_dagger, eps_p(0) = eps_p(L) = 0 (micro-clamped).
//
// The global unknown vector interleaves the fields so every element touches
// five consecutive dofs: vertex i holds (u, eps_p) at (3i, 3i+1) and the
// midpoint of element i holds u at 3i+2. The Jacobian is then banded with
// half-bandwidth 4.

#include <cstddef>
#include <vector>

#include "sgpuq/banded.hpp"
#include "sgpuq/constitutive.hpp"
#include "sgpuq/curve.hpp"

namespace sgpuq {

struct Mesh1D {
  double length = 500.0;           ///< L [nm]
  std::size_t n_elements = 30;
  std::size_t quadrature_order = 3;  ///< Gauss-Legendre points per element
  std::vector<double> nodes;       ///< vertex coordinates, 0 .. L

  static Mesh1D uniform(double length, std::size_t n_elements = 30, std::size_t quadrature_order = 3);
  void validate() const;
  double element_size(std::size_t e) const noexcept { return nodes[e + 1] - nodes[e]; }
};

struct MixedField {
  std::vector<double> u;      ///< 2 n_elements + 1 values: vertex, mid, vertex, ...
  std::vector<double> eps_p;  ///< n_elements + 1 vertex values

  static MixedField zeros(const Mesh1D& mesh);

  std::size_t num_dofs() const noexcept { return u.size() + eps_p.size(); }

  /// Interleaved global vector and its inverse.
  std::vector<double> pack() const;
  static MixedField unpack(const std::vector<double>& x, const Mesh1D& mesh);
};

/// Global dof numbering.
constexpr std::size_t vertex_u_dof(std::size_t i) noexcept { return 3 * i; }
constexpr std::size_t vertex_ep_dof(std::size_t i) noexcept { return 3 * i + 1; }
constexpr std::size_t midpoint_u_dof(std::size_t e) noexcept { return 3 * e + 2; }

struct LoadProgram {
  double strain_rate = -1.0;     ///< [1/s]
  double dt = 5.0e-5;            ///< [s]
  double final_strain = -0.008;  ///< signed applied strain at the end

  void validate() const;
  std::size_t num_steps() const;
};

struct SolverOptions {
  double rel_tol = 1e-10;   ///< relative to the initial residual of the step
  double abs_tol = 1e-12;   ///< absolute floor
  int max_iter = 25;
  int max_bisection_depth = 10;
  int remerge_after = 2;    ///< consecutive substep successes before doubling again
  double rate_floor = kDefaultRateFloor;
  /// Start each increment from a linear extrapolation of the last accepted
  /// increment, falling back to the previous converged state if that fails.
  bool extrapolate = true;
};

struct StepRecord {
  double applied_strain = 0.0;  ///< signed u_dagger / L
  double stress = 0.0;          ///< signed element-average T on the last element [GPa]
  std::vector<double> eps_p;    ///< vertex values
  int newton_iterations = 0;    ///< summed over substeps
  int substeps = 1;
  double residual = 0.0;        ///< infinity norm at acceptance of the last substep
};

struct SolveTrace {
  std::vector<StepRecord> steps;  ///< one per accepted program step
};

struct CompressionResult {
  StressStrainCurve curve;  ///< (|strain|, |stress|), one row per accepted step
  SolveTrace trace;
  MixedField final_state;
};

/// Residual of the two weak equations, evaluated by Gauss quadrature.
/// Rows of constrained dofs hold (value - prescribed value).
std::vector<double> assemble_residual(const MixedField& fields, const MixedField& prev, double dt,
                                      const SgpParams& params, const Mesh1D& mesh, double u_dagger,
                                      double rate_floor = kDefaultRateFloor);

/// Analytic Jacobian of assemble_residual with respect to the packed dofs.
BandedMatrix assemble_jacobian(const MixedField& fields, const MixedField& prev, double dt,
                               const SgpParams& params, const Mesh1D& mesh,
                               double rate_floor = kDefaultRateFloor);

struct NewtonResult {
  MixedField fields;
  int iterations = 0;
  double residual = 0.0;
};

/// Solves one implicit increment. Newton starts from `initial_guess` when
/// given, else from `prev`, with prescribed values inserted either way.
/// Convergence: residual inf-norm <= max(rel_tol * |r(prev)|, abs_tol), where
/// r(prev) is the residual of the previous state with the new boundary
/// values. Throws NonConvergence after options.max_iter iterations.
NewtonResult newton_step_solve(const MixedField& prev, double u_dagger, double dt, const SgpParams& params,
                               const Mesh1D& mesh, const SolverOptions& options = {},
                               const MixedField* initial_guess = nullptr);

/// Steps u_dagger = strain_rate L t over the program. A failing increment is
/// bisected (up to options.max_bisection_depth levels); throws SolverFailure
/// when that budget is exhausted.
CompressionResult run_compression(const SgpParams& params, const Mesh1D& mesh, const LoadProgram& program,
                                  const SolverOptions& options = {});

/// Element-average of T over element e.
double element_average_stress(const MixedField& fields, const SgpParams& params, const Mesh1D& mesh,
                              std::size_t e);

struct PlasticProfile {
  double applied_strain = 0.0;     ///< |strain| of the selected step
  std::vector<double> y_over_l;
  std::vector<double> eps_p;       ///< signed vertex values
};

/// Plastic strain over y/L at the accepted step nearest to |at_strain|.
/// Throws OutOfRange if at_strain lies outside [0, max applied |strain|].
PlasticProfile plastic_profile(const SolveTrace& trace, const Mesh1D& mesh, double at_strain);

/// Distance from the wall (fraction of L) at which |eps_p| first reaches
/// `fraction` of its midspan value, by linear interpolation between vertices.
double boundary_layer_width(const PlasticProfile& profile, double fraction = 0.9);

}  // namespace sgpuq
