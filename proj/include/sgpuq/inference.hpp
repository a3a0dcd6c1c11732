#pragma once

// Bayesian calibration: Gaussian i.i.d. likelihood over replicate curves,
// random-walk Metropolis and DRAM samplers, and posterior summaries.

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "sgpuq/dataset.hpp"
#include "sgpuq/forward_model.hpp"
#include "sgpuq/sampling.hpp"

namespace sgpuq {

/// Noise standard deviation per data point. Lookup order: per-size entry,
/// then the single `sigma` if set.
struct LikelihoodSpec {
  std::map<double, double> sigma_by_size;  ///< [GPa]
  std::optional<double> sigma;             ///< [GPa]
  std::size_t stride = 1;                  ///< use every stride-th data point

  double sigma_for(double size) const;
  void validate() const;
  /// Per-size sigma = pooled replicate std of the data at that size.
  static LikelihoodSpec from_dataset(const Dataset& training);
};

/// Memoised solves keyed by (theta rounded to 12 significant digits, L).
/// Thread-safe; bounded, evicting the oldest entries first.
class ModelCache {
 public:
  explicit ModelCache(ForwardModel model, std::size_t capacity = 4096);

  /// Throws SolverFailure like ForwardModel::curve (failures are not cached).
  std::shared_ptr<const StressStrainCurve> curve(std::span<const double> theta, double length);

  const ForwardModel& model() const noexcept { return model_; }
  std::size_t hits() const noexcept { return hits_; }
  std::size_t misses() const noexcept { return misses_; }
  std::size_t failures() const noexcept { return failures_; }

 private:
  static std::string key(std::span<const double> theta, double length);

  ForwardModel model_;
  std::size_t capacity_;
  std::mutex mutex_;
  std::unordered_map<std::string, std::shared_ptr<const StressStrainCurve>> map_;
  std::list<std::string> order_;
  std::atomic<std::size_t> hits_{0}, misses_{0}, failures_{0};
};

/// Model curve for a pillar size.
using CurveModel = std::function<StressStrainCurve(double size)>;

/// sum_size sum_replicate sum_point [-ln(2 pi)/2 - ln sigma - (d - D)^2 / (2 sigma^2)],
/// with the model stress linearly interpolated onto each data strain grid.
double log_likelihood(const CurveModel& model, const Dataset& training, const LikelihoodSpec& spec);

/// SGP likelihood. A SolverFailure yields -infinity.
double log_likelihood(std::span<const double> theta, const Dataset& training, const LikelihoodSpec& spec,
                      ModelCache& cache);

using LogDensity = std::function<double(std::span<const double>)>;

struct ChainConfig {
  std::size_t n_chains = 10;
  std::size_t chain_length = 10000;  ///< stored states per chain, burn-in included
  double burn_in_fraction = 0.10;
  double proposal_fraction = 0.05;   ///< initial proposal std as a fraction of each prior range
  std::vector<double> proposal_std;  ///< explicit initial std; overrides proposal_fraction when set
  bool adapt = true;
  std::size_t adaptation_start = 500;
  std::size_t adaptation_interval = 100;
  double adaptation_scale = 0.0;  ///< s_d; 0 selects 2.38^2 / K
  double adaptation_epsilon = 1e-10;
  bool delayed_rejection = true;
  double dr_scale = 0.2;  ///< second-stage proposal std relative to the first
  std::uint64_t seed = 0;
  int jobs = 1;  ///< chains run concurrently on up to this many threads

  void validate() const;
};

struct PosteriorEnsemble {
  std::vector<std::string> names;
  std::size_t dim = 0;
  std::vector<double> samples;   ///< row-major, retained states of all chains in chain order
  std::vector<double> log_post;  ///< one per retained sample
  std::vector<std::size_t> chain_of;   ///< chain index per retained sample
  std::vector<double> acceptance_rates;  ///< one per chain
  ChainConfig config;

  std::size_t size() const noexcept { return log_post.size(); }
  std::span<const double> sample(std::size_t i) const noexcept { return {samples.data() + i * dim, dim}; }
  std::vector<double> column(std::size_t k) const;
  std::vector<double> mean() const;
};

/// Initial states: LHS over the box, one row per chain.
std::vector<std::vector<double>> lhs_initial_states(const ParamBox& box, std::size_t n_chains, std::uint64_t seed);

/// Random-walk Metropolis with a fixed diagonal Gaussian proposal. Proposals
/// outside the box are rejected without evaluating log_post. Initial states
/// default to lhs_initial_states.
PosteriorEnsemble mh_sample(const LogDensity& log_post, const ParamBox& box, const ChainConfig& config,
                            std::vector<std::vector<double>> init = {});

/// Delayed-rejection adaptive Metropolis. With adapt and delayed_rejection
/// both off the chains are bitwise identical to mh_sample.
PosteriorEnsemble dram_sample(const LogDensity& log_post, const ParamBox& box, const ChainConfig& config,
                              std::vector<std::vector<double>> init = {});

/// Retained sample with the largest log-posterior; first one on ties.
std::vector<double> map_estimate(const PosteriorEnsemble& ens);

/// Posterior variance of each marginal over the uniform prior variance.
std::vector<double> information_measure(const PosteriorEnsemble& ens, const ParamBox& box);

/// Linear-interpolation sample quantile, q in [0, 1].
double quantile(std::vector<double> values, double q);

/// Central interval holding `mass` of marginal k.
std::pair<double, double> central_interval(const PosteriorEnsemble& ens, std::size_t k, double mass = 0.95);

/// Effective sample size of one series from its autocorrelation (initial
/// positive sequence estimator).
double effective_sample_size(std::span<const double> series);

struct PredictiveBand {
  double size = 0.0;
  std::vector<double> strain;
  std::vector<double> mean, std, q025, q975;
  std::vector<double> qoi;  ///< strain-energy samples, one per successful draw
  std::size_t draws = 0;
  std::size_t failed = 0;

  /// Point-averaged predictive stress variance.
  double mean_variance() const;
};

/// Solves the model at n_draws posterior samples (without replacement when
/// n_draws <= ensemble size) and summarises the stress on the common strain
/// grid of the solver. Failed draws are dropped and counted.
PredictiveBand posterior_predict(const PosteriorEnsemble& ens, double size, std::size_t n_draws, std::uint64_t seed,
                                 const ForwardModel& model, int jobs = 1);

/// Point-averaged unbiased replicate variance of the data at one size, on the
/// grid of the first replicate.
double data_stress_variance(const Dataset& data, double size);

/// Strain energy of every data curve at one size.
std::vector<double> data_qoi(const Dataset& data, double size);

/// Line records: header `chain,<names...>,log_post`, then one sample per line.
/// Acceptance rates travel in a leading `# acceptance` comment.
void write_samples(const std::filesystem::path& path, const PosteriorEnsemble& ens);
PosteriorEnsemble read_samples(const std::filesystem::path& path);

/// Key-value summary (JSON): MAP, I(theta_k), 95% intervals, acceptance.
std::string summary_json(const PosteriorEnsemble& ens, const ParamBox& box);

}  // namespace sgpuq
