#include "sgpuq/inference.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sgpuq/errors.hpp"
#include "sgpuq/qoi.hpp"
#include "sgpuq/rng.hpp"

namespace sgpuq {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace

// ---------------------------------------------------------------- likelihood

double LikelihoodSpec::sigma_for(double size) const {
  for (const auto& [s, v] : sigma_by_size)
    if (same_size(s, size)) return v;
  if (sigma) return *sigma;
  throw ValidationError("no noise sigma for size " + std::to_string(size) + " nm");
}

void LikelihoodSpec::validate() const {
  if (stride < 1) throw ValidationError("likelihood stride must be >= 1");
  if (sigma && !(*sigma > 0.0)) throw ValidationError("likelihood sigma must be > 0");
  for (const auto& [s, v] : sigma_by_size)
    if (!(v > 0.0)) throw ValidationError("likelihood sigma at " + std::to_string(s) + " nm must be > 0");
}

LikelihoodSpec LikelihoodSpec::from_dataset(const Dataset& training) {
  LikelihoodSpec spec;
  for (const auto& s : training.noise_summary()) spec.sigma_by_size[s.size] = s.pooled_std;
  spec.validate();
  return spec;
}

ModelCache::ModelCache(ForwardModel model, std::size_t capacity) : model_(std::move(model)), capacity_(capacity) {}

std::string ModelCache::key(std::span<const double> theta, double length) {
  std::string k;
  char buf[32];
  for (double v : theta) {
    std::snprintf(buf, sizeof buf, "%.11e|", v);
    k += buf;
  }
  std::snprintf(buf, sizeof buf, "%.11e", length);
  return k + buf;
}

std::shared_ptr<const StressStrainCurve> ModelCache::curve(std::span<const double> theta, double length) {
  const std::string k = key(theta, length);
  {
    std::lock_guard lock(mutex_);
    if (auto it = map_.find(k); it != map_.end()) {
      ++hits_;
      return it->second;
    }
  }
  ++misses_;
  std::shared_ptr<const StressStrainCurve> c;
  try {
    c = std::make_shared<const StressStrainCurve>(model_.curve(theta, length));
  } catch (const SolverFailure&) {
    ++failures_;
    throw;
  }
  if (capacity_ == 0) return c;
  std::lock_guard lock(mutex_);
  if (map_.emplace(k, c).second) {
    order_.push_back(k);
    while (map_.size() > capacity_) {
      map_.erase(order_.front());
      order_.pop_front();
    }
  }
  return c;
}

double log_likelihood(const CurveModel& model, const Dataset& training, const LikelihoodSpec& spec) {
  const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
  double total = 0.0;
  for (double size : training.sizes()) {
    const double sigma = spec.sigma_for(size);
    const double log_sigma = std::log(sigma);
    const double inv_two_var = 0.5 / (sigma * sigma);
    const StressStrainCurve curve = model(size);
    for (const auto* e : training.at_size(size)) {
      const auto& c = e->curve;
      for (std::size_t i = 0; i < c.size(); i += spec.stride) {
        const double r = curve.stress_at(c.strain[i]) - c.stress[i];
        total += -half_log_2pi - log_sigma - r * r * inv_two_var;
      }
    }
  }
  return total;
}

double log_likelihood(std::span<const double> theta, const Dataset& training, const LikelihoodSpec& spec,
                      ModelCache& cache) {
  try {
    return log_likelihood([&](double size) { return *cache.curve(theta, size); }, training, spec);
  } catch (const SolverFailure& e) {
    std::ostringstream msg;
    msg << "log_likelihood: solver failure at theta = [" << std::setprecision(6);
    for (std::size_t k = 0; k < theta.size(); ++k) msg << (k ? ", " : "") << theta[k];
    msg << "]: " << e.what() << '\n';
    std::clog << msg.str();
    return kNegInf;
  }
}

// ---------------------------------------------------------------- samplers

void ChainConfig::validate() const {
  if (n_chains < 1) throw ValidationError("n_chains must be >= 1");
  if (chain_length < 100) throw ValidationError("chain_length must be >= 100");
  if (!(burn_in_fraction >= 0.0 && burn_in_fraction < 1.0)) throw ValidationError("burn_in_fraction must lie in [0, 1)");
  if (!(proposal_fraction > 0.0)) throw ValidationError("proposal_fraction must be > 0");
  for (double s : proposal_std)
    if (!(s > 0.0)) throw ValidationError("proposal_std entries must be > 0");
  if (adaptation_interval < 1) throw ValidationError("adaptation_interval must be >= 1");
  if (adaptation_scale < 0.0) throw ValidationError("adaptation_scale must be >= 0");
  if (!(adaptation_epsilon >= 0.0)) throw ValidationError("adaptation_epsilon must be >= 0");
  if (!(dr_scale > 0.0)) throw ValidationError("dr_scale must be > 0");
}

std::vector<double> PosteriorEnsemble::column(std::size_t k) const {
  std::vector<double> out(size());
  for (std::size_t i = 0; i < size(); ++i) out[i] = samples[i * dim + k];
  return out;
}

std::vector<double> PosteriorEnsemble::mean() const {
  if (size() == 0) throw EmptyEnsemble("mean: empty ensemble");
  std::vector<double> m(dim, 0.0);
  for (std::size_t i = 0; i < size(); ++i)
    for (std::size_t k = 0; k < dim; ++k) m[k] += samples[i * dim + k];
  for (auto& v : m) v /= static_cast<double>(size());
  return m;
}

std::vector<std::vector<double>> lhs_initial_states(const ParamBox& box, std::size_t n_chains, std::uint64_t seed) {
  const auto m = lhs_sample(box, n_chains, seed);
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < m.rows; ++i) out.emplace_back(m.row(i).begin(), m.row(i).end());
  return out;
}

namespace {

struct ChainOutput {
  std::vector<double> states;  // chain_length x K
  std::vector<double> log_post;
  std::size_t accepted = 0;
};

std::vector<double> initial_std(const ParamBox& box, const ChainConfig& c) {
  if (!c.proposal_std.empty()) {
    if (c.proposal_std.size() != box.size()) throw ValidationError("proposal_std length does not match the box");
    return c.proposal_std;
  }
  std::vector<double> s;
  for (const auto& r : box.ranges) s.push_back(c.proposal_fraction * r.width());
  return s;
}

// u < exp(diff) in log form; a NaN difference (both -inf) rejects.
bool accept(Rng& rng, double log_ratio) { return std::log(rng.uniform_open_low()) < log_ratio; }

ChainOutput mh_chain(const LogDensity& f, const ParamBox& box, const ChainConfig& c, std::vector<double> x,
                     std::uint64_t seed) {
  const std::size_t k = box.size();
  const auto sd = initial_std(box, c);
  Rng rng(seed);
  ChainOutput out;
  out.states.reserve(c.chain_length * k);
  out.log_post.reserve(c.chain_length);
  double lp = f(x);
  std::vector<double> y(k);
  for (std::size_t t = 0; t < c.chain_length; ++t) {
    for (std::size_t i = 0; i < k; ++i) y[i] = x[i] + sd[i] * rng.normal();
    if (box.contains(y)) {
      const double lpy = f(y);
      if (accept(rng, lpy - lp)) {
        x = y;
        lp = lpy;
        ++out.accepted;
      }
    }
    out.states.insert(out.states.end(), x.begin(), x.end());
    out.log_post.push_back(lp);
  }
  return out;
}

// log(1 - exp(a)) for a <= 0
double log1m_exp(double a) { return a >= 0.0 ? kNegInf : std::log1p(-std::exp(a)); }

ChainOutput dram_chain(const LogDensity& f, const ParamBox& box, const ChainConfig& c, std::vector<double> x,
                       std::uint64_t seed) {
  using Eigen::Index;
  const std::size_t k = box.size();
  const auto ki = static_cast<Index>(k);
  const auto sd = initial_std(box, c);
  const double s_d = c.adaptation_scale > 0.0 ? c.adaptation_scale : 2.38 * 2.38 / static_cast<double>(k);

  Eigen::MatrixXd chol = Eigen::MatrixXd::Zero(ki, ki);
  for (std::size_t i = 0; i < k; ++i) chol(static_cast<Index>(i), static_cast<Index>(i)) = sd[i];

  Rng rng(seed);
  std::vector<double> z(k);
  // to = from + scale L z with fresh normals; summed lower-triangle so a
  // diagonal L reproduces the plain random walk exactly.
  auto propose = [&](const std::vector<double>& from, double scale, std::vector<double>& to) {
    for (auto& v : z) v = rng.normal();
    for (std::size_t i = 0; i < k; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j <= i; ++j) acc += chol(static_cast<Index>(i), static_cast<Index>(j)) * z[j];
      to[i] = from[i] + (scale == 1.0 ? acc : scale * acc);
    }
  };
  // log N(d; 0, C) up to a constant
  auto log_q = [&](const std::vector<double>& a, const std::vector<double>& b) {
    Eigen::VectorXd d(ki);
    for (std::size_t i = 0; i < k; ++i) d(static_cast<Index>(i)) = a[i] - b[i];
    const Eigen::VectorXd w = chol.triangularView<Eigen::Lower>().solve(d);
    return -0.5 * w.squaredNorm();
  };

  // running mean / scatter of the chain history
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(ki);
  Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(ki, ki);
  std::size_t seen = 0;

  ChainOutput out;
  out.states.reserve(c.chain_length * k);
  out.log_post.reserve(c.chain_length);
  double lp = f(x);
  std::vector<double> y1(k), y2(k);
  for (std::size_t t = 0; t < c.chain_length; ++t) {
    propose(x, 1.0, y1);
    double lp1 = kNegInf;
    bool moved = false;
    if (box.contains(y1)) {
      lp1 = f(y1);
      if (accept(rng, lp1 - lp)) {
        x = y1;
        lp = lp1;
        moved = true;
      }
    }
    if (!moved && c.delayed_rejection) {
      propose(x, c.dr_scale, y2);
      if (box.contains(y2)) {
        const double lp2 = f(y2);
        const double num = lp2 + log_q(y1, y2) + log1m_exp(std::min(0.0, lp1 - lp2));
        const double den = lp + log_q(y1, x) + log1m_exp(std::min(0.0, lp1 - lp));
        if (num > kNegInf && accept(rng, den > kNegInf ? num - den : std::numeric_limits<double>::infinity())) {
          x = y2;
          lp = lp2;
          moved = true;
        }
      }
    }
    if (moved) ++out.accepted;
    out.states.insert(out.states.end(), x.begin(), x.end());
    out.log_post.push_back(lp);

    if (!c.adapt) continue;
    ++seen;
    const Eigen::Map<const Eigen::VectorXd> xv(x.data(), ki);
    const Eigen::VectorXd delta = xv - mean;
    mean += delta / static_cast<double>(seen);
    scatter += delta * (xv - mean).transpose();
    if (seen >= c.adaptation_start && seen % c.adaptation_interval == 0 && seen > 1) {
      Eigen::MatrixXd cov = s_d * scatter / static_cast<double>(seen - 1);
      cov.diagonal().array() += c.adaptation_epsilon;
      Eigen::LLT<Eigen::MatrixXd> llt(cov);
      if (llt.info() == Eigen::Success) chol = llt.matrixL();
    }
  }
  return out;
}

using ChainKernel = ChainOutput (*)(const LogDensity&, const ParamBox&, const ChainConfig&, std::vector<double>,
                                    std::uint64_t);

PosteriorEnsemble run_chains(ChainKernel kernel, const LogDensity& f, const ParamBox& box, const ChainConfig& c,
                             std::vector<std::vector<double>> init) {
  box.validate();
  c.validate();
  if (init.empty()) init = lhs_initial_states(box, c.n_chains, derive_seed(c.seed, 0x1717));
  if (init.size() != c.n_chains) throw ValidationError("need one initial state per chain");
  for (const auto& x0 : init)
    if (x0.size() != box.size() || !box.contains(x0)) throw ValidationError("initial state outside the prior box");

  std::vector<ChainOutput> chains(c.n_chains);
  std::exception_ptr error;
  const auto n = static_cast<std::ptrdiff_t>(c.n_chains);
#pragma omp parallel for schedule(dynamic, 1) num_threads(c.jobs < 1 ? 1 : c.jobs)
  for (std::ptrdiff_t ci = 0; ci < n; ++ci) {
    const auto i = static_cast<std::size_t>(ci);
    try {
      chains[i] = kernel(f, box, c, init[i], derive_seed(c.seed, i));
    } catch (...) {
#pragma omp critical(sgpuq_chain_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);

  PosteriorEnsemble ens;
  ens.names = box.names();
  ens.dim = box.size();
  ens.config = c;
  const auto burn = static_cast<std::size_t>(std::floor(c.burn_in_fraction * static_cast<double>(c.chain_length)));
  for (std::size_t i = 0; i < c.n_chains; ++i) {
    const auto& ch = chains[i];
    ens.samples.insert(ens.samples.end(), ch.states.begin() + static_cast<std::ptrdiff_t>(burn * ens.dim),
                       ch.states.end());
    ens.log_post.insert(ens.log_post.end(), ch.log_post.begin() + static_cast<std::ptrdiff_t>(burn),
                        ch.log_post.end());
    ens.chain_of.insert(ens.chain_of.end(), c.chain_length - burn, i);
    ens.acceptance_rates.push_back(static_cast<double>(ch.accepted) / static_cast<double>(c.chain_length));
  }
  return ens;
}

}  // namespace

PosteriorEnsemble mh_sample(const LogDensity& log_post, const ParamBox& box, const ChainConfig& config,
                            std::vector<std::vector<double>> init) {
  return run_chains(&mh_chain, log_post, box, config, std::move(init));
}

PosteriorEnsemble dram_sample(const LogDensity& log_post, const ParamBox& box, const ChainConfig& config,
                              std::vector<std::vector<double>> init) {
  return run_chains(&dram_chain, log_post, box, config, std::move(init));
}

// ---------------------------------------------------------------- summaries

std::vector<double> map_estimate(const PosteriorEnsemble& ens) {
  if (ens.size() == 0) throw EmptyEnsemble("map_estimate: empty ensemble");
  std::size_t best = 0;
  for (std::size_t i = 1; i < ens.size(); ++i)
    if (ens.log_post[i] > ens.log_post[best]) best = i;
  const auto s = ens.sample(best);
  return {s.begin(), s.end()};
}

std::vector<double> information_measure(const PosteriorEnsemble& ens, const ParamBox& box) {
  if (ens.size() == 0) throw EmptyEnsemble("information_measure: empty ensemble");
  if (box.size() != ens.dim) throw ValidationError("information_measure: box does not match ensemble");
  if (ens.size() < 2) return std::vector<double>(ens.dim, 0.0);
  const auto m = ens.mean();
  std::vector<double> out(ens.dim);
  for (std::size_t k = 0; k < ens.dim; ++k) {
    double ss = 0.0;
    for (std::size_t i = 0; i < ens.size(); ++i) {
      const double d = ens.samples[i * ens.dim + k] - m[k];
      ss += d * d;
    }
    const double var = ss / static_cast<double>(ens.size() - 1);
    const double w = box.ranges[k].width();
    out[k] = var / (w * w / 12.0);
  }
  return out;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw EmptySamples("quantile: no values");
  if (!(q >= 0.0 && q <= 1.0)) throw ValidationError("quantile: q must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::pair<double, double> central_interval(const PosteriorEnsemble& ens, std::size_t k, double mass) {
  if (ens.size() == 0) throw EmptyEnsemble("central_interval: empty ensemble");
  const auto col = ens.column(k);
  const double tail = 0.5 * (1.0 - mass);
  return {quantile(col, tail), quantile(col, 1.0 - tail)};
}

double effective_sample_size(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 4) return static_cast<double>(n);
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  auto autocov = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) s += (x[i] - mean) * (x[i + lag] - mean);
    return s / static_cast<double>(n);
  };
  const double c0 = autocov(0);
  if (c0 <= 0.0) return static_cast<double>(n);
  // Geyer: sum consecutive pairs while their sum stays positive.
  double tau = -1.0;
  for (std::size_t m = 0; 2 * m + 1 < n; ++m) {
    const double pair = (autocov(2 * m) + autocov(2 * m + 1)) / c0;
    if (pair <= 0.0) break;
    tau += 2.0 * pair;
  }
  return static_cast<double>(n) / std::max(tau, 1.0 / static_cast<double>(n));
}

// ---------------------------------------------------------------- prediction

double PredictiveBand::mean_variance() const {
  if (std.empty()) throw EmptySamples("predictive band is empty");
  double s = 0.0;
  for (double v : std) s += v * v;
  return s / static_cast<double>(std.size());
}

PredictiveBand posterior_predict(const PosteriorEnsemble& ens, double size, std::size_t n_draws, std::uint64_t seed,
                                 const ForwardModel& model, int jobs) {
  if (ens.size() == 0) throw EmptyEnsemble("posterior_predict: empty ensemble");
  if (n_draws == 0) throw ValidationError("posterior_predict: n_draws must be >= 1");
  Rng rng(seed);
  std::vector<std::size_t> idx;
  if (n_draws <= ens.size()) {
    idx.resize(ens.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    rng.shuffle(std::span<std::size_t>(idx));
    idx.resize(n_draws);
  } else {
    for (std::size_t i = 0; i < n_draws; ++i) idx.push_back(static_cast<std::size_t>(rng.below(ens.size())));
  }

  std::vector<std::optional<StressStrainCurve>> curves(n_draws);
  std::exception_ptr error;
  const auto count = static_cast<std::ptrdiff_t>(n_draws);
#pragma omp parallel for schedule(dynamic, 1) num_threads(jobs < 1 ? 1 : jobs)
  for (std::ptrdiff_t d = 0; d < count; ++d) {
    const auto i = static_cast<std::size_t>(d);
    try {
      curves[i] = model.curve(ens.sample(idx[i]), size);
    } catch (const SolverFailure&) {
    } catch (...) {
#pragma omp critical(sgpuq_predict_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);

  PredictiveBand band;
  band.size = size;
  band.draws = n_draws;
  std::vector<std::vector<double>> rows;
  for (const auto& c : curves) {
    if (!c) {
      ++band.failed;
      continue;
    }
    if (band.strain.empty()) band.strain = c->strain;
    rows.push_back(c->resample(band.strain));
    band.qoi.push_back(strain_energy(*c, model.qoi_strain).value);
  }
  if (rows.empty()) throw SolverFailure("posterior_predict: every draw failed");

  const std::size_t n = band.strain.size();
  const auto m = static_cast<double>(rows.size());
  band.mean.resize(n);
  band.std.resize(n);
  band.q025.resize(n);
  band.q975.resize(n);
  std::vector<double> column(rows.size());
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t r = 0; r < rows.size(); ++r) s += (column[r] = rows[r][i]);
    const double mu = s / m;
    double ss = 0.0;
    for (double v : column) ss += (v - mu) * (v - mu);
    band.mean[i] = mu;
    band.std[i] = rows.size() > 1 ? std::sqrt(ss / (m - 1.0)) : 0.0;
    band.q025[i] = quantile(column, 0.025);
    band.q975[i] = quantile(column, 0.975);
  }
  return band;
}

double data_stress_variance(const Dataset& data, double size) {
  const auto s = data.noise_summary(size);
  return s.pooled_std * s.pooled_std;
}

std::vector<double> data_qoi(const Dataset& data, double size) {
  std::vector<double> q;
  for (const auto* e : data.at_size(size)) q.push_back(strain_energy(e->curve).value);
  if (q.empty()) throw MissingSize("no data at size " + std::to_string(size));
  return q;
}

// ---------------------------------------------------------------- export

namespace {

nlohmann::json config_json(const ChainConfig& c) {
  return {{"n_chains", c.n_chains},
          {"chain_length", c.chain_length},
          {"burn_in_fraction", c.burn_in_fraction},
          {"proposal_fraction", c.proposal_fraction},
          {"proposal_std", c.proposal_std},
          {"adapt", c.adapt},
          {"adaptation_start", c.adaptation_start},
          {"adaptation_interval", c.adaptation_interval},
          {"adaptation_scale", c.adaptation_scale},
          {"adaptation_epsilon", c.adaptation_epsilon},
          {"delayed_rejection", c.delayed_rejection},
          {"dr_scale", c.dr_scale},
          {"seed", c.seed}};
}

ChainConfig config_from_json(const nlohmann::json& j) {
  ChainConfig c;
  c.n_chains = j.at("n_chains").get<std::size_t>();
  c.chain_length = j.at("chain_length").get<std::size_t>();
  c.burn_in_fraction = j.at("burn_in_fraction").get<double>();
  c.proposal_fraction = j.at("proposal_fraction").get<double>();
  c.proposal_std = j.at("proposal_std").get<std::vector<double>>();
  c.adapt = j.at("adapt").get<bool>();
  c.adaptation_start = j.at("adaptation_start").get<std::size_t>();
  c.adaptation_interval = j.at("adaptation_interval").get<std::size_t>();
  c.adaptation_scale = j.at("adaptation_scale").get<double>();
  c.adaptation_epsilon = j.at("adaptation_epsilon").get<double>();
  c.delayed_rejection = j.at("delayed_rejection").get<bool>();
  c.dr_scale = j.at("dr_scale").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

}  // namespace

void write_samples(const std::filesystem::path& path, const PosteriorEnsemble& ens) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path.string());
  os << "# config " << config_json(ens.config).dump() << '\n';
  os << "# acceptance";
  os << std::setprecision(17);
  for (double a : ens.acceptance_rates) os << ' ' << a;
  os << "\nchain";
  for (const auto& n : ens.names) os << ',' << n;
  os << ",log_post\n";
  for (std::size_t i = 0; i < ens.size(); ++i) {
    os << ens.chain_of[i];
    for (double v : ens.sample(i)) os << ',' << v;
    os << ',' << ens.log_post[i] << '\n';
  }
  if (!os) throw IoError("write failed: " + path.string());
}

PosteriorEnsemble read_samples(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  const std::string file = path.string();
  PosteriorEnsemble ens;
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.rfind("# config ", 0) == 0) {
      try {
        ens.config = config_from_json(nlohmann::json::parse(line.substr(9)));
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(file, lineno, std::string("bad config record: ") + e.what());
      }
      continue;
    }
    if (line.rfind("# acceptance", 0) == 0) {
      std::istringstream ss(line.substr(12));
      double a;
      while (ss >> a) ens.acceptance_rates.push_back(a);
      continue;
    }
    if (line[0] == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
    if (!header) {
      if (fields.size() < 3 || fields.front() != "chain" || fields.back() != "log_post")
        throw ParseError(file, lineno, "expected header chain,<names...>,log_post");
      ens.names.assign(fields.begin() + 1, fields.end() - 1);
      ens.dim = ens.names.size();
      header = true;
      continue;
    }
    if (fields.size() != ens.dim + 2) throw ParseError(file, lineno, "wrong number of fields");
    try {
      ens.chain_of.push_back(std::stoul(fields[0]));
      for (std::size_t k = 0; k < ens.dim; ++k) ens.samples.push_back(std::stod(fields[k + 1]));
      const std::string& lp = fields.back();
      ens.log_post.push_back(lp == "-inf" ? kNegInf : std::stod(lp));
    } catch (const std::logic_error&) {
      throw ParseError(file, lineno, "malformed number");
    }
  }
  if (!header) throw ParseError(file, lineno, "missing header");
  return ens;
}

std::string summary_json(const PosteriorEnsemble& ens, const ParamBox& box) {
  const auto map = map_estimate(ens);
  const auto info = information_measure(ens, box);
  const auto mean = ens.mean();
  nlohmann::ordered_json j;
  j["n_samples"] = ens.size();
  j["n_chains"] = ens.config.n_chains;
  j["chain_length"] = ens.config.chain_length;
  j["burn_in_fraction"] = ens.config.burn_in_fraction;
  j["seed"] = ens.config.seed;
  j["acceptance_rates"] = ens.acceptance_rates;
  for (std::size_t k = 0; k < ens.dim; ++k) {
    const auto [lo, hi] = central_interval(ens, k);
    j["parameters"][ens.names[k]] = {{"map", map[k]},
                                     {"mean", mean[k]},
                                     {"interval95", {lo, hi}},
                                     {"information", info[k]},
                                     {"prior", {box.ranges[k].lower, box.ranges[k].upper}}};
  }
  return j.dump(2) + "\n";
}

}  // namespace sgpuq
