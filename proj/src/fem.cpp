#include "sgpuq/fem.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <string>

#include "sgpuq/errors.hpp"

namespace sgpuq {

namespace {

struct GaussRule {
  std::vector<double> points;
  std::vector<double> weights;
};

GaussRule gauss_legendre(std::size_t n) {
  GaussRule rule;
  rule.points.resize(n);
  rule.weights.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
        p0 = p1;
        p1 = pk;
      }
      if (n == 1) p0 = 1.0;
      dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.points[i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  if (n == 1) {
    rule.points[0] = 0.0;
    rule.weights[0] = 2.0;
  }
  return rule;
}

// Shape functions on the reference element [-1, 1].
// Quadratic displacement: vertex, midpoint, vertex.
constexpr std::array<double, 3> quad_shape(double xi) {
  return {0.5 * xi * (xi - 1.0), 1.0 - xi * xi, 0.5 * xi * (xi + 1.0)};
}
constexpr std::array<double, 3> quad_shape_deriv(double xi) { return {xi - 0.5, -2.0 * xi, xi + 0.5}; }
constexpr std::array<double, 2> lin_shape(double xi) { return {0.5 * (1.0 - xi), 0.5 * (1.0 + xi)}; }

// Local dof order [u_left, ep_left, u_mid, u_right, ep_right] maps to
// global 3e + {0, 1, 2, 3, 4}.
constexpr std::array<std::size_t, 3> kLocalU{0, 2, 3};
constexpr std::array<std::size_t, 2> kLocalEp{1, 4};

struct ElementValues {
  double h = 0.0;
  std::array<double, 5> x{};
  std::array<double, 5> x_prev{};
};

ElementValues gather(const std::vector<double>& x, const std::vector<double>& x_prev, const Mesh1D& mesh,
                     std::size_t e) {
  ElementValues ev;
  ev.h = mesh.element_size(e);
  for (std::size_t a = 0; a < 5; ++a) {
    ev.x[a] = x[3 * e + a];
    ev.x_prev[a] = x_prev[3 * e + a];
  }
  return ev;
}

struct PointKinematics {
  std::array<double, 3> dn{};  // d(quadratic shape)/dy
  std::array<double, 2> m{};   // linear shape
  std::array<double, 2> dm{};  // d(linear shape)/dy
  MaterialPointState state;
};

PointKinematics kinematics(const ElementValues& ev, double xi, double dt) {
  PointKinematics k;
  const auto dq = quad_shape_deriv(xi);
  const double jac = 2.0 / ev.h;
  for (std::size_t a = 0; a < 3; ++a) k.dn[a] = dq[a] * jac;
  k.m = lin_shape(xi);
  k.dm = {-1.0 / ev.h, 1.0 / ev.h};

  MaterialPointState& s = k.state;
  s.dt = dt;
  for (std::size_t a = 0; a < 3; ++a) s.eps_total += k.dn[a] * ev.x[kLocalU[a]];
  for (std::size_t b = 0; b < 2; ++b) {
    const double ep = ev.x[kLocalEp[b]];
    const double ep_prev = ev.x_prev[kLocalEp[b]];
    s.eps_plastic += k.m[b] * ep;
    s.eps_plastic_prev += k.m[b] * ep_prev;
    s.eps_plastic_grad += k.dm[b] * ep;
    s.eps_plastic_grad_prev += k.dm[b] * ep_prev;
  }
  return k;
}

std::vector<std::size_t> constrained_dofs(const Mesh1D& mesh) {
  const std::size_t n = mesh.n_elements;
  return {vertex_u_dof(0), vertex_ep_dof(0), vertex_u_dof(n), vertex_ep_dof(n)};
}

void check_sizes(const MixedField& f, const Mesh1D& mesh) {
  if (f.u.size() != 2 * mesh.n_elements + 1 || f.eps_p.size() != mesh.n_elements + 1) {
    throw ValidationError("MixedField size does not match mesh");
  }
}

}  // namespace

Mesh1D Mesh1D::uniform(double length, std::size_t n_elements, std::size_t quadrature_order) {
  Mesh1D mesh;
  mesh.length = length;
  mesh.n_elements = n_elements;
  mesh.quadrature_order = quadrature_order;
  mesh.nodes.resize(n_elements + 1);
  for (std::size_t i = 0; i <= n_elements; ++i) {
    mesh.nodes[i] = length * static_cast<double>(i) / static_cast<double>(n_elements);
  }
  mesh.nodes.back() = length;  // i/n * L can miss L by an ulp
  mesh.validate();
  return mesh;
}

void Mesh1D::validate() const {
  if (!(length > 0.0)) throw ValidationError("mesh length must be > 0");
  if (n_elements < 2) throw ValidationError("mesh needs at least 2 elements");
  if (quadrature_order < 3) throw ValidationError("quadrature order must be >= 3");
  if (nodes.size() != n_elements + 1) throw ValidationError("mesh node count mismatch");
  if (nodes.front() != 0.0 || nodes.back() != length) throw ValidationError("mesh must span [0, L]");
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    if (!(nodes[i] > nodes[i - 1])) throw ValidationError("mesh nodes must be strictly increasing");
  }
}

MixedField MixedField::zeros(const Mesh1D& mesh) {
  return {std::vector<double>(2 * mesh.n_elements + 1, 0.0), std::vector<double>(mesh.n_elements + 1, 0.0)};
}

std::vector<double> MixedField::pack() const {
  const std::size_t n = eps_p.size() - 1;
  std::vector<double> x(num_dofs());
  for (std::size_t i = 0; i <= n; ++i) {
    x[vertex_u_dof(i)] = u[2 * i];
    x[vertex_ep_dof(i)] = eps_p[i];
    if (i < n) x[midpoint_u_dof(i)] = u[2 * i + 1];
  }
  return x;
}

MixedField MixedField::unpack(const std::vector<double>& x, const Mesh1D& mesh) {
  MixedField f = zeros(mesh);
  if (x.size() != f.num_dofs()) throw ValidationError("packed vector size does not match mesh");
  const std::size_t n = mesh.n_elements;
  for (std::size_t i = 0; i <= n; ++i) {
    f.u[2 * i] = x[vertex_u_dof(i)];
    f.eps_p[i] = x[vertex_ep_dof(i)];
    if (i < n) f.u[2 * i + 1] = x[midpoint_u_dof(i)];
  }
  return f;
}

void LoadProgram::validate() const {
  if (!(dt > 0.0)) throw ValidationError("load program dt must be > 0");
  if (!(std::abs(final_strain) > 0.0)) throw ValidationError("final strain must be non-zero");
  if (!(strain_rate != 0.0) || std::signbit(strain_rate) != std::signbit(final_strain)) {
    throw ValidationError("strain rate and final strain must share a sign");
  }
}

std::size_t LoadProgram::num_steps() const {
  validate();
  const double steps = final_strain / (strain_rate * dt);
  return static_cast<std::size_t>(std::max(1.0, std::round(steps)));
}

namespace {

const GaussRule& cached_rule(std::size_t order) {
  static const std::array<GaussRule, 11> rules = [] {
    std::array<GaussRule, 11> r;
    for (std::size_t n = 1; n < r.size(); ++n) r[n] = gauss_legendre(n);
    return r;
  }();
  if (order == 0 || order >= rules.size()) throw ValidationError("unsupported quadrature order");
  return rules[order];
}

// Residual and (optionally) Jacobian on packed vectors, one pass over the
// quadrature points.
void evaluate_system(std::span<const double> x, std::span<const double> x_prev, double dt,
                     const SgpParams& params, const Mesh1D& mesh, double u_dagger, double rate_floor,
                     std::vector<double>& r, BandedMatrix* jac) {
  const GaussRule& rule = cached_rule(mesh.quadrature_order);
  const double mu_len2 = params.shear_modulus() * params.l_en * params.l_en;
  const double young = params.elastic_modulus;
  r.assign(x.size(), 0.0);
  if (jac) jac->set_zero();

  for (std::size_t e = 0; e < mesh.n_elements; ++e) {
    ElementValues ev;
    ev.h = mesh.element_size(e);
    for (std::size_t a = 0; a < 5; ++a) {
      ev.x[a] = x[3 * e + a];
      ev.x_prev[a] = x_prev[3 * e + a];
    }
    std::array<double, 5> re{};
    std::array<std::array<double, 5>, 5> ke{};
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const PointKinematics k = kinematics(ev, rule.points[q], dt);
      const double wq = rule.weights[q] * 0.5 * ev.h;
      const MaterialPointState& s = k.state;

      const double t = cauchy_stress(s, params);
      const auto tan = dissipative_tangent(s.plastic_rate(), s.plastic_grad_rate(), params, rate_floor);
      const double rr = energetic_microstress_r(s, params) + tan.stress.r;
      const double ss = mu_len2 * s.eps_plastic_grad + tan.stress.s;

      for (std::size_t a = 0; a < 3; ++a) re[kLocalU[a]] += wq * t * k.dn[a];
      for (std::size_t b = 0; b < 2; ++b) re[kLocalEp[b]] += wq * ((rr - t) * k.m[b] + ss * k.dm[b]);
      if (!jac) continue;

      // Partials of T, R, S with respect to the local dofs.
      const double dren = energetic_microstress_r_derivative(s.eps_plastic, params);
      std::array<double, 5> dt_dx{}, dr_dx{}, ds_dx{};
      for (std::size_t a = 0; a < 3; ++a) dt_dx[kLocalU[a]] = young * k.dn[a];
      for (std::size_t b = 0; b < 2; ++b) {
        const std::size_t j = kLocalEp[b];
        const double drate = k.m[b] / dt;
        const double dgrad = k.dm[b] / dt;
        dt_dx[j] = -young * k.m[b];
        dr_dx[j] = dren * k.m[b] + tan.dr_drate * drate + tan.dr_dgrad_rate * dgrad;
        ds_dx[j] = mu_len2 * k.dm[b] + tan.ds_drate * drate + tan.ds_dgrad_rate * dgrad;
      }
      for (std::size_t j = 0; j < 5; ++j) {
        for (std::size_t a = 0; a < 3; ++a) ke[kLocalU[a]][j] += wq * dt_dx[j] * k.dn[a];
        for (std::size_t b = 0; b < 2; ++b) {
          ke[kLocalEp[b]][j] += wq * ((dr_dx[j] - dt_dx[j]) * k.m[b] + ds_dx[j] * k.dm[b]);
        }
      }
    }
    for (std::size_t a = 0; a < 5; ++a) r[3 * e + a] += re[a];
    if (jac) {
      for (std::size_t a = 0; a < 5; ++a) {
        for (std::size_t j = 0; j < 5; ++j) (*jac)(3 * e + a, 3 * e + j) += ke[a][j];
      }
    }
  }

  const std::size_t n = mesh.n_elements;
  r[vertex_u_dof(0)] = x[vertex_u_dof(0)];
  r[vertex_ep_dof(0)] = x[vertex_ep_dof(0)];
  r[vertex_u_dof(n)] = x[vertex_u_dof(n)] - u_dagger;
  r[vertex_ep_dof(n)] = x[vertex_ep_dof(n)];
  if (jac) {
    for (std::size_t d : constrained_dofs(mesh)) {
      jac->clear_row(d);
      (*jac)(d, d) = 1.0;
    }
  }
}

void impose_essential(std::vector<double>& x, const Mesh1D& mesh, double u_dagger) {
  const std::size_t n = mesh.n_elements;
  x[vertex_u_dof(0)] = 0.0;
  x[vertex_ep_dof(0)] = 0.0;
  x[vertex_u_dof(n)] = u_dagger;
  x[vertex_ep_dof(n)] = 0.0;
}

double inf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double a : v) m = std::max(m, std::abs(a));
  return m;
}

}  // namespace

std::vector<double> assemble_residual(const MixedField& fields, const MixedField& prev, double dt,
                                      const SgpParams& params, const Mesh1D& mesh, double u_dagger,
                                      double rate_floor) {
  check_sizes(fields, mesh);
  check_sizes(prev, mesh);
  std::vector<double> r;
  evaluate_system(fields.pack(), prev.pack(), dt, params, mesh, u_dagger, rate_floor, r, nullptr);
  return r;
}

BandedMatrix assemble_jacobian(const MixedField& fields, const MixedField& prev, double dt,
                               const SgpParams& params, const Mesh1D& mesh, double rate_floor) {
  check_sizes(fields, mesh);
  check_sizes(prev, mesh);
  const std::vector<double> x = fields.pack();
  BandedMatrix jac(x.size(), 4, 4);
  std::vector<double> r;
  evaluate_system(x, prev.pack(), dt, params, mesh, 0.0, rate_floor, r, &jac);
  return jac;
}

double element_average_stress(const MixedField& fields, const SgpParams& params, const Mesh1D& mesh,
                              std::size_t e) {
  const std::vector<double> x = fields.pack();
  const ElementValues ev = gather(x, x, mesh, e);
  const GaussRule& rule = cached_rule(mesh.quadrature_order);
  double acc = 0.0;
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    acc += rule.weights[q] * cauchy_stress(kinematics(ev, rule.points[q], 1.0).state, params);
  }
  return 0.5 * acc;
}

NewtonResult newton_step_solve(const MixedField& prev, double u_dagger, double dt, const SgpParams& params,
                               const Mesh1D& mesh, const SolverOptions& options, const MixedField* initial_guess) {
  if (!(dt > 0.0)) throw ValidationError("newton_step_solve: dt must be > 0");
  check_sizes(prev, mesh);
  const std::vector<double> x_prev = prev.pack();
  std::vector<double> x = x_prev;
  impose_essential(x, mesh, u_dagger);

  BandedMatrix jac(x.size(), 4, 4);
  std::vector<double> r;
  // The tolerance is always relative to the residual of the previous state,
  // whatever starting point is used.
  evaluate_system(x, x_prev, dt, params, mesh, u_dagger, options.rate_floor, r, nullptr);
  const double target = std::max(options.rel_tol * inf_norm(r), options.abs_tol);
  if (initial_guess) {
    check_sizes(*initial_guess, mesh);
    x = initial_guess->pack();
    impose_essential(x, mesh, u_dagger);
  }
  evaluate_system(x, x_prev, dt, params, mesh, u_dagger, options.rate_floor, r, &jac);
  double norm = inf_norm(r);
  int iter = 0;
  while (!(norm <= target)) {
    if (iter >= options.max_iter || !std::isfinite(norm)) throw NonConvergence(iter, norm);
    for (double& v : r) v = -v;
    std::vector<double> dx;
    try {
      dx = jac.solve(r);
    } catch (const std::runtime_error&) {
      throw NonConvergence(iter, norm);
    }
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += dx[i];
    impose_essential(x, mesh, u_dagger);
    ++iter;
    evaluate_system(x, x_prev, dt, params, mesh, u_dagger, options.rate_floor, r, &jac);
    norm = inf_norm(r);
  }
  NewtonResult out;
  out.fields = MixedField::unpack(x, mesh);
  out.iterations = iter;
  out.residual = norm;
  return out;
}

CompressionResult run_compression(const SgpParams& params, const Mesh1D& mesh, const LoadProgram& program,
                                  const SolverOptions& options) {
  params.validate();
  mesh.validate();
  const std::size_t n_steps = program.num_steps();
  if (options.max_bisection_depth < 0 || options.max_bisection_depth > 30) {
    throw ValidationError("max_bisection_depth must lie in [0, 30]");
  }

  // Sub-increments are counted in integer ticks of dt / 2^max_depth so the
  // substep boundaries land exactly on program step boundaries.
  const int max_depth = options.max_bisection_depth;
  const long long ticks_per_step = 1LL << max_depth;
  const double tick = program.dt / static_cast<double>(ticks_per_step);
  const double boundary_velocity = program.strain_rate * mesh.length;

  CompressionResult result;
  result.trace.steps.reserve(n_steps);
  result.curve.strain.reserve(n_steps);
  result.curve.stress.reserve(n_steps);
  MixedField state = MixedField::zeros(mesh);
  MixedField before = state;
  long long last_incr = 0;

  int depth = 0;
  int successes = 0;
  for (std::size_t step = 1; step <= n_steps; ++step) {
    const long long step_begin = static_cast<long long>(step - 1) * ticks_per_step;
    const long long step_end = step_begin + ticks_per_step;
    long long now = step_begin;
    StepRecord record;
    record.substeps = 0;
    while (now < step_end) {
      const long long incr = std::min(ticks_per_step >> depth, step_end - now);
      const long long next = now + incr;
      const double t_next = static_cast<double>(next) * tick;
      const double u_next = boundary_velocity * t_next;
      const double h_next = static_cast<double>(incr) * tick;
      try {
        NewtonResult nr;
        bool solved = false;
        if (options.extrapolate && last_incr > 0) {
          // Linear predictor from the last accepted increment, scaled to the
          // current increment length; on failure retry from the previous state.
          const double ratio = static_cast<double>(incr) / static_cast<double>(last_incr);
          MixedField guess = state;
          for (std::size_t i = 0; i < guess.u.size(); ++i) guess.u[i] += ratio * (state.u[i] - before.u[i]);
          for (std::size_t i = 0; i < guess.eps_p.size(); ++i) {
            guess.eps_p[i] += ratio * (state.eps_p[i] - before.eps_p[i]);
          }
          try {
            nr = newton_step_solve(state, u_next, h_next, params, mesh, options, &guess);
            solved = true;
          } catch (const NonConvergence& nc) {
            record.newton_iterations += nc.iterations();
          }
        }
        if (!solved) nr = newton_step_solve(state, u_next, h_next, params, mesh, options);
        before = std::move(state);
        last_incr = incr;
        state = std::move(nr.fields);
        record.newton_iterations += nr.iterations;
        record.residual = nr.residual;
        ++record.substeps;
        now = next;
        if (depth > 0 && ++successes >= options.remerge_after) {
          --depth;
          successes = 0;
        }
      } catch (const NonConvergence& nc) {
        successes = 0;
        if (++depth > max_depth) {
          throw SolverFailure("load bisection exhausted at step " + std::to_string(step) + ": " + nc.what());
        }
      }
    }

    record.applied_strain = program.strain_rate * program.dt * static_cast<double>(step);
    record.stress = element_average_stress(state, params, mesh, mesh.n_elements - 1);
    record.eps_p = state.eps_p;
    result.curve.strain.push_back(std::abs(record.applied_strain));
    result.curve.stress.push_back(std::abs(record.stress));
    result.trace.steps.push_back(std::move(record));
  }
  result.final_state = std::move(state);
  return result;
}

PlasticProfile plastic_profile(const SolveTrace& trace, const Mesh1D& mesh, double at_strain) {
  if (trace.steps.empty()) throw OutOfRange("plastic_profile: empty trace");
  const double target = std::abs(at_strain);
  const double last = std::abs(trace.steps.back().applied_strain);
  if (!(target <= last * (1.0 + 1e-12))) {
    throw OutOfRange("plastic_profile: strain " + std::to_string(at_strain) + " outside program range [0, " +
                     std::to_string(last) + "]");
  }
  std::size_t best = 0;
  double best_dist = std::abs(std::abs(trace.steps[0].applied_strain) - target);
  for (std::size_t i = 1; i < trace.steps.size(); ++i) {
    const double d = std::abs(std::abs(trace.steps[i].applied_strain) - target);
    if (d < best_dist) {
      best = i;
      best_dist = d;
    }
  }
  PlasticProfile profile;
  profile.applied_strain = std::abs(trace.steps[best].applied_strain);
  profile.eps_p = trace.steps[best].eps_p;
  profile.y_over_l.reserve(mesh.nodes.size());
  for (double y : mesh.nodes) profile.y_over_l.push_back(y / mesh.length);
  return profile;
}

double boundary_layer_width(const PlasticProfile& profile, double fraction) {
  const std::size_t n = profile.eps_p.size();
  if (n < 3) throw ValidationError("boundary_layer_width: profile too short");
  // Midspan value by linear interpolation at y/L = 0.5.
  double mid = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    if (profile.y_over_l[i] >= 0.5) {
      const double t = (0.5 - profile.y_over_l[i - 1]) / (profile.y_over_l[i] - profile.y_over_l[i - 1]);
      mid = std::abs(profile.eps_p[i - 1]) + t * (std::abs(profile.eps_p[i]) - std::abs(profile.eps_p[i - 1]));
      break;
    }
  }
  const double level = fraction * mid;
  for (std::size_t i = 1; i < n; ++i) {
    const double a = std::abs(profile.eps_p[i - 1]);
    const double b = std::abs(profile.eps_p[i]);
    if (b >= level) {
      const double t = (b == a) ? 0.0 : (level - a) / (b - a);
      return profile.y_over_l[i - 1] + t * (profile.y_over_l[i] - profile.y_over_l[i - 1]);
    }
  }
  return 0.5;
}

}  // namespace sgpuq
