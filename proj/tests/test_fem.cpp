#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "sgpuq/errors.hpp"
#include "sgpuq/fem.hpp"
#include "sgpuq/qoi.hpp"

using namespace sgpuq;

namespace {

double inf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Linear displacement u = u_dagger x / L on the quadratic nodes, zero eps_p.
MixedField elastic_field(const Mesh1D& mesh, double u_dagger) {
  auto f = MixedField::zeros(mesh);
  for (std::size_t e = 0; e < mesh.n_elements; ++e) {
    f.u[2 * e] = u_dagger * mesh.nodes[e] / mesh.length;
    f.u[2 * e + 1] = u_dagger * 0.5 * (mesh.nodes[e] + mesh.nodes[e + 1]) / mesh.length;
  }
  f.u.back() = u_dagger;
  return f;
}

CompressionResult solve(const SgpParams& p, double length = 500.0, std::size_t n_el = 30) {
  return run_compression(p, Mesh1D::uniform(length, n_el), LoadProgram{});
}

SgpParams with_lengths(double l_dis, double l_en) {
  SgpParams p;
  p.l_dis = l_dis;
  p.l_en = l_en;
  return p;
}

}  // namespace

TEST(Mesh, UniformAndValidation) {
  const auto m = Mesh1D::uniform(500.0, 30);
  ASSERT_EQ(m.nodes.size(), 31u);
  EXPECT_EQ(m.nodes.front(), 0.0);
  EXPECT_EQ(m.nodes.back(), 500.0);
  EXPECT_THROW(Mesh1D::uniform(500.0, 1), ValidationError);
  EXPECT_THROW(Mesh1D::uniform(500.0, 30, 2), ValidationError);
  Mesh1D bad = m;
  std::swap(bad.nodes[3], bad.nodes[4]);
  EXPECT_THROW(bad.validate(), ValidationError);
}

TEST(MixedField, DofCountsAndPacking) {
  const auto m = Mesh1D::uniform(500.0, 30);
  auto f = MixedField::zeros(m);
  EXPECT_EQ(f.u.size(), 61u);
  EXPECT_EQ(f.eps_p.size(), 31u);
  for (std::size_t i = 0; i < f.u.size(); ++i) f.u[i] = static_cast<double>(i);
  for (std::size_t i = 0; i < f.eps_p.size(); ++i) f.eps_p[i] = -static_cast<double>(i);
  const auto x = f.pack();
  EXPECT_EQ(x[vertex_u_dof(2)], f.u[4]);
  EXPECT_EQ(x[midpoint_u_dof(2)], f.u[5]);
  EXPECT_EQ(x[vertex_ep_dof(2)], f.eps_p[2]);
  const auto g = MixedField::unpack(x, m);
  EXPECT_EQ(g.u, f.u);
  EXPECT_EQ(g.eps_p, f.eps_p);
}

TEST(LoadProgram, DefaultsAndValidation) {
  LoadProgram p;
  EXPECT_EQ(p.num_steps(), 160u);
  p.strain_rate = 1.0;
  EXPECT_THROW(p.validate(), ValidationError);
  p = {};
  p.dt = 0.0;
  EXPECT_THROW(p.validate(), ValidationError);
}

TEST(Residual, ZeroStateIsZero) {
  const auto m = Mesh1D::uniform(500.0, 30);
  const auto z = MixedField::zeros(m);
  const auto r = assemble_residual(z, z, 5e-5, SgpParams{}, m, 0.0);
  EXPECT_EQ(inf_norm(r), 0.0);
}

TEST(Residual, ElasticFieldBalancesMacroEquation) {
  // Exact elastic field: the displacement rows vanish; the plastic rows
  // carry -int T w, which is what forces eps_p to stay put only as Y grows.
  const auto m = Mesh1D::uniform(500.0, 30);
  const double ud = -0.004 * 500.0;
  const auto f = elastic_field(m, ud);
  SgpParams p;
  p.yield_strength = 1e3;
  const auto r = assemble_residual(f, f, 5e-5, p, m, ud);
  const double scale = p.elastic_modulus * 0.004;
  for (std::size_t e = 0; e < m.n_elements; ++e) {
    EXPECT_LT(std::abs(r[vertex_u_dof(e)]), 1e-12 * scale);
    EXPECT_LT(std::abs(r[midpoint_u_dof(e)]), 1e-12 * scale);
  }
}

TEST(Residual, ConvergedElasticSolutionWithUnreachableYield) {
  const auto m = Mesh1D::uniform(500.0, 30);
  SgpParams p;
  p.yield_strength = 1e3;
  const double ud = -0.004 * 500.0;
  const auto res = newton_step_solve(elastic_field(m, 0.98 * ud), ud, 5e-5, p, m);
  const auto r = assemble_residual(res.fields, elastic_field(m, 0.98 * ud), 5e-5, p, m, ud);
  EXPECT_LT(inf_norm(r), 1e-12 * p.elastic_modulus * 0.004 * 500.0);
  EXPECT_LT(inf_norm(res.fields.eps_p), 1e-10);
  const auto exact = elastic_field(m, ud);
  for (std::size_t i = 0; i < exact.u.size(); ++i) EXPECT_NEAR(res.fields.u[i], exact.u[i], 1e-9 * std::abs(ud));
}

TEST(Jacobian, MatchesCentralDifferences) {
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  const double dt = 5e-5;
  for (int trial = 0; trial < 20; ++trial) {
    SgpParams p;
    p.l_dis = 40.0 + 400.0 * (uni(gen) + 1.0);
    p.l_en = 20.0 + 200.0 * (uni(gen) + 1.0);
    p.rate_power = trial % 4 == 0 ? 0.2 : 0.0;
    const double length = 300.0 + 200.0 * (uni(gen) + 1.0);
    const auto m = Mesh1D::uniform(length, 30);
    const double ud = -0.004 * length * (1.0 + 0.5 * uni(gen));
    auto prev = elastic_field(m, 0.99 * ud);
    auto f = elastic_field(m, ud);
    for (std::size_t i = 1; i + 1 < f.u.size(); ++i) f.u[i] += 1e-3 * length * 0.004 * uni(gen);
    for (std::size_t i = 1; i + 1 < f.eps_p.size(); ++i) {
      prev.eps_p[i] = 1e-3 * (uni(gen) - 1.0);
      f.eps_p[i] = prev.eps_p[i] + 2e-4 * uni(gen);
    }
    const auto jac = assemble_jacobian(f, prev, dt, p, m);
    auto x = f.pack();
    const std::size_t n = x.size();
    std::vector<std::vector<double>> fd(n, std::vector<double>(n, 0.0));
    for (std::size_t j = 0; j < n; ++j) {
      const double h = 1e-7 * std::max(std::abs(x[j]), j % 3 == 1 ? 1e-3 : length * 0.004);
      auto xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      const auto rp = assemble_residual(MixedField::unpack(xp, m), prev, dt, p, m, ud);
      const auto rm = assemble_residual(MixedField::unpack(xm, m), prev, dt, p, m, ud);
      for (std::size_t i = 0; i < n; ++i) fd[i][j] = (rp[i] - rm[i]) / (2.0 * h);
    }
    for (std::size_t i = 0; i < n; ++i) {
      double row_scale = 0.0, err = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        row_scale = std::max(row_scale, std::abs(jac.at(i, j)));
        err = std::max(err, std::abs(jac.at(i, j) - fd[i][j]));
      }
      ASSERT_LT(err, 1e-5 * row_scale) << "trial " << trial << " row " << i;
    }
  }
}

TEST(Newton, ElasticStepConvergesQuickly) {
  const auto m = Mesh1D::uniform(500.0, 30);
  const SgpParams p;
  const auto res = newton_step_solve(MixedField::zeros(m), -5e-5 * 500.0, 5e-5, p, m);
  EXPECT_LE(res.iterations, 3);
  EXPECT_LT(inf_norm(res.fields.eps_p), 1e-10);
  EXPECT_EQ(res.fields.u.front(), 0.0);
  EXPECT_EQ(res.fields.u.back(), -5e-5 * 500.0);
}

TEST(Newton, ZeroIterationsThrows) {
  const auto m = Mesh1D::uniform(500.0, 30);
  SolverOptions o;
  o.max_iter = 0;
  EXPECT_THROW(newton_step_solve(MixedField::zeros(m), -0.025, 5e-5, SgpParams{}, m, o), NonConvergence);
}

TEST(Compression, ExhaustedBisectionIsSolverFailure) {
  SolverOptions o;
  o.max_iter = 0;
  o.max_bisection_depth = 2;
  EXPECT_THROW(run_compression(SgpParams{}, Mesh1D::uniform(500.0, 30), LoadProgram{}, o), SolverFailure);
}

TEST(Compression, ElasticLimit) {
  SgpParams p;
  p.yield_strength = 1e3;
  const auto res = solve(p);
  ASSERT_EQ(res.curve.size(), 160u);
  for (std::size_t i = 0; i < res.curve.size(); ++i) {
    const double expect = p.elastic_modulus * res.curve.strain[i];
    EXPECT_NEAR(res.curve.stress[i], expect, 1e-3 * expect);
  }
}

TEST(Compression, TraceRecordsEveryStep) {
  const auto res = solve(SgpParams{});
  ASSERT_EQ(res.trace.steps.size(), 160u);
  for (const auto& s : res.trace.steps) {
    EXPECT_LT(s.applied_strain, 0.0);
    EXPECT_LT(s.stress, 0.0);
    EXPECT_GE(s.substeps, 1);
    EXPECT_EQ(s.eps_p.front(), 0.0);
    EXPECT_EQ(s.eps_p.back(), 0.0);
  }
  EXPECT_NEAR(res.curve.strain.back(), 0.008, 1e-12);
}

TEST(Compression, Deterministic) {
  const auto a = solve(SgpParams{});
  const auto b = solve(SgpParams{});
  EXPECT_EQ(a.curve.stress, b.curve.stress);
  for (std::size_t i = 0; i < a.trace.steps.size(); ++i) EXPECT_EQ(a.trace.steps[i].eps_p, b.trace.steps[i].eps_p);
}

TEST(Compression, PredictorDoesNotChangeTheCurve) {
  SolverOptions plain;
  plain.extrapolate = false;
  const auto a = solve(SgpParams{});
  const auto b = run_compression(SgpParams{}, Mesh1D::uniform(500.0, 30), LoadProgram{}, plain);
  for (std::size_t i = 0; i < a.curve.size(); ++i) EXPECT_NEAR(a.curve.stress[i], b.curve.stress[i], 1e-8);
}

TEST(Compression, FlowStressRisesWithDissipativeLength) {
  const SgpParams p;
  double prev_flow = 0.0, first_tangent = 0.0;
  for (double l_dis : {20.0, 50.0, 100.0}) {
    const auto c = solve(with_lengths(l_dis, 75.0)).curve;
    const double flow = offset_flow_stress(c, p.elastic_modulus);
    const double tangent = tangent_slope(c, 0.005, 0.008);
    ASSERT_TRUE(std::isfinite(flow));
    EXPECT_GT(flow, prev_flow);
    if (first_tangent == 0.0) first_tangent = tangent;
    EXPECT_NEAR(tangent, first_tangent, 0.05 * first_tangent);
    prev_flow = flow;
  }
}

TEST(Compression, TangentRisesWithEnergeticLength) {
  double prev = -1.0;
  for (double l_en : {25.0, 75.0, 150.0}) {
    const double t = tangent_slope(solve(with_lengths(20.0, l_en)).curve, 0.005, 0.008);
    EXPECT_GT(t, prev);
    prev = t;
  }
}

TEST(Compression, SizeEffectIsMonotone) {
  double prev = 1e300;
  for (double length : {200.0, 300.0, 500.0, 700.0, 1000.0}) {
    const double s = solve(SgpParams{}, length).curve.stress.back();
    EXPECT_LT(s, prev) << "L = " << length;
    prev = s;
  }
}

TEST(Compression, ClassicalLimitHasNoSizeEffect) {
  const auto p = with_lengths(1e-6, 1e-6);
  const auto a = solve(p, 200.0).curve, b = solve(p, 1000.0).curve;
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a.stress[i], b.stress[i], 0.005 * a.stress[i]);
}

TEST(Compression, MeshConvergenceOfQoi) {
  const double q30 = strain_energy(solve(SgpParams{}, 500.0, 30).curve).value;
  const double q60 = strain_energy(solve(SgpParams{}, 500.0, 60).curve).value;
  EXPECT_LT(std::abs(q60 - q30), 0.005 * q30);
}

TEST(Profile, VanishesAtWallsAndIsSymmetric) {
  const auto m = Mesh1D::uniform(500.0, 30);
  const auto res = run_compression(SgpParams{}, m, LoadProgram{});
  const auto prof = plastic_profile(res.trace, m, 0.008);
  EXPECT_EQ(prof.eps_p.front(), 0.0);
  EXPECT_EQ(prof.eps_p.back(), 0.0);
  const std::size_t n = prof.eps_p.size();
  for (std::size_t i = 0; i < n; ++i) EXPECT_LT(std::abs(prof.eps_p[i] - prof.eps_p[n - 1 - i]), 1e-8);
  EXPECT_NEAR(prof.y_over_l.back(), 1.0, 1e-15);
  EXPECT_THROW(plastic_profile(res.trace, m, 0.02), OutOfRange);
  // compressive strains are negative; the lookup goes by magnitude
  EXPECT_EQ(plastic_profile(res.trace, m, -0.008).eps_p, prof.eps_p);
  EXPECT_THROW(plastic_profile(res.trace, m, -0.02), OutOfRange);
}

TEST(Profile, BoundaryLayerShrinksWithDissipativeLength) {
  // With a small energetic length the layer width tracks l_dis.
  const auto m = Mesh1D::uniform(500.0, 30);
  double prev = 1.0;
  for (double l_dis : {100.0, 50.0, 20.0}) {
    const auto res = run_compression(with_lengths(l_dis, 1.0), m, LoadProgram{});
    const double w = boundary_layer_width(plastic_profile(res.trace, m, 0.008));
    EXPECT_LT(w, prev) << "l_dis = " << l_dis;
    prev = w;
  }
}

TEST(Profile, BoundaryLayerSetByEnergeticLengthAtReference) {
  const auto m = Mesh1D::uniform(500.0, 30);
  std::vector<double> w;
  for (double l_dis : {20.0, 50.0, 100.0}) {
    const auto res = run_compression(with_lengths(l_dis, 75.0), m, LoadProgram{});
    w.push_back(boundary_layer_width(plastic_profile(res.trace, m, 0.008)));
  }
  const auto [lo, hi] = std::minmax_element(w.begin(), w.end());
  EXPECT_LT(*hi - *lo, 0.02 * *hi);
}
