#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <numbers>

#include "sgpuq/errors.hpp"
#include "sgpuq/inference.hpp"
#include "sgpuq/rng.hpp"

using namespace sgpuq;

namespace {

Dataset three_point_dataset() {
  Dataset d;
  d.entries.push_back({500.0, 1, {{0.001, 0.002, 0.003}, {0.10, 0.18, 0.21}}});
  d.entries.push_back({500.0, 2, {{0.001, 0.002, 0.003}, {0.12, 0.17, 0.25}}});
  return d;
}

// Model curve with stress 100 * strain.
StressStrainCurve line(double) { return {{0.0, 0.004}, {0.0, 0.4}}; }

std::pair<double, double> moments(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return {m, s / static_cast<double>(v.size() - 1)};
}

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
  const auto [ma, va] = moments(a);
  const auto [mb, vb] = moments(b);
  double c = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) c += (a[i] - ma) * (b[i] - mb);
  return c / static_cast<double>(a.size() - 1) / std::sqrt(va * vb);
}

ChainConfig small_config(std::size_t chains, std::size_t length, std::uint64_t seed) {
  ChainConfig c;
  c.n_chains = chains;
  c.chain_length = length;
  c.seed = seed;
  return c;
}

const LogDensity kStdNormal = [](std::span<const double> x) { return -0.5 * x[0] * x[0]; };

const LogDensity kCorrelated = [](std::span<const double> x) {
  const double r = 0.8;
  return -0.5 * (x[0] * x[0] - 2.0 * r * x[0] * x[1] + x[1] * x[1]) / (1.0 - r * r);
};

}  // namespace

TEST(Likelihood, ZeroMisfit) {
  Dataset d;
  d.entries.push_back({500.0, 1, {{0.001, 0.002, 0.003}, {0.1, 0.2, 0.3}}});
  d.entries.push_back({500.0, 2, {{0.001, 0.002, 0.003}, {0.1, 0.2, 0.3}}});
  LikelihoodSpec spec;
  spec.sigma = 1.0;
  const double expect = -(3.0 * 2.0 / 2.0) * std::log(2.0 * std::numbers::pi);
  EXPECT_NEAR(log_likelihood(&line, d, spec), expect, 1e-12);
}

TEST(Likelihood, HandComputedResiduals) {
  // residuals: (0.1-0.10, 0.2-0.18, 0.3-0.21, 0.1-0.12, 0.2-0.17, 0.3-0.25)
  const auto d = three_point_dataset();
  LikelihoodSpec spec;
  spec.sigma = 0.05;
  const double misfit = 0.0 + 0.0004 + 0.0081 + 0.0004 + 0.0009 + 0.0025;
  const double expect = -6.0 * (0.5 * std::log(2.0 * std::numbers::pi) + std::log(0.05)) - misfit / (2.0 * 0.0025);
  EXPECT_NEAR(log_likelihood(&line, d, spec), expect, 1e-12);
}

TEST(Likelihood, SigmaDoubling) {
  const auto d = three_point_dataset();
  LikelihoodSpec a, b;
  a.sigma = 0.05;
  b.sigma = 0.10;
  const double misfit = 0.0123;
  const double la = log_likelihood(&line, d, a), lb = log_likelihood(&line, d, b);
  const double closed = -6.0 * std::log(2.0) + misfit / (2.0 * 0.0025) - misfit / (2.0 * 0.01);
  EXPECT_NEAR(lb - la, closed, 1e-10);
}

TEST(Likelihood, DecreasesAwayFromDataMean) {
  Dataset d;
  d.entries.push_back({500.0, 1, {{0.001}, {0.1}}});
  d.entries.push_back({500.0, 2, {{0.001}, {0.3}}});
  LikelihoodSpec spec;
  spec.sigma = 0.1;
  double prev = 1e300;
  for (double s : {0.2, 0.25, 0.3, 0.4}) {
    const double l = log_likelihood([s](double) { return StressStrainCurve{{0.0, 0.002}, {0.0, 2.0 * s}}; }, d, spec);
    EXPECT_LT(l, prev);
    prev = l;
  }
}

TEST(Likelihood, StrideAndPerSizeSigma) {
  auto d = three_point_dataset();
  LikelihoodSpec spec;
  spec.sigma_by_size[500.0] = 0.05;
  spec.stride = 2;  // points 0 and 2 only
  const double misfit = 0.0 + 0.0081 + 0.0004 + 0.0025;
  const double expect = -4.0 * (0.5 * std::log(2.0 * std::numbers::pi) + std::log(0.05)) - misfit / (2.0 * 0.0025);
  EXPECT_NEAR(log_likelihood(&line, d, spec), expect, 1e-12);
  LikelihoodSpec none;
  EXPECT_THROW(log_likelihood(&line, d, none), ValidationError);
}

TEST(Likelihood, SigmaFromReplicateSpread) {
  const auto spec = LikelihoodSpec::from_dataset(three_point_dataset());
  // point variances: 0.0002, 0.00005, 0.0008 -> mean 0.00035
  EXPECT_NEAR(spec.sigma_for(500.0), std::sqrt(0.00035), 1e-12);
}

TEST(Likelihood, SolverFailureIsMinusInfinity) {
  ForwardModel fm;
  fm.solver.max_iter = 0;
  fm.solver.max_bisection_depth = 0;
  ModelCache cache(fm);
  LikelihoodSpec spec;
  spec.sigma = 0.01;
  const auto theta = SgpParams{}.calibrated();
  EXPECT_EQ(log_likelihood(theta, three_point_dataset(), spec, cache), -std::numeric_limits<double>::infinity());
  EXPECT_EQ(cache.failures(), 1u);
}

TEST(ModelCache, ReusesSolves) {
  ModelCache cache(ForwardModel{});
  auto theta = SgpParams{}.calibrated();
  const auto a = cache.curve(theta, 500.0);
  theta[0] *= 1.0 + 1e-15;  // below the 12-digit key resolution
  const auto b = cache.curve(theta, 500.0);
  EXPECT_EQ(a.get(), b.get());
  EXPECT_EQ(cache.hits(), 1u);
  cache.curve(theta, 300.0);
  EXPECT_EQ(cache.misses(), 2u);
}

TEST(Mcmc, StandardNormalMoments) {
  ParamBox box{{{"x", -12.0, 12.0}}};
  auto c = small_config(4, 27778, 3);
  c.proposal_std = {2.4};
  for (auto sampler : {&mh_sample, &dram_sample}) {
    const auto e = sampler(kStdNormal, box, c, {});
    ASSERT_GE(e.size(), 100000u);
    const auto [m, v] = moments(e.column(0));
    EXPECT_NEAR(m, 0.0, 0.05);
    EXPECT_NEAR(v, 1.0, 0.05);
  }
}

TEST(Mcmc, CorrelatedGaussian) {
  ParamBox box{{{"x", -12.0, 12.0}, {"y", -12.0, 12.0}}};
  auto c = small_config(4, 27778, 5);
  c.proposal_std = {1.0, 1.0};
  for (auto sampler : {&mh_sample, &dram_sample}) {
    const auto e = sampler(kCorrelated, box, c, {});
    EXPECT_NEAR(correlation(e.column(0), e.column(1)), 0.8, 0.05);
    EXPECT_NEAR(moments(e.column(0)).second, 1.0, 0.05);
    EXPECT_NEAR(moments(e.column(1)).second, 1.0, 0.05);
  }
}

TEST(Mcmc, TinyProposalAcceptsAlmostAlways) {
  ParamBox box{{{"x", -12.0, 12.0}}};
  auto c = small_config(1, 5000, 1);
  c.proposal_std = {1e-6};
  const auto e = mh_sample(kStdNormal, box, c, {{0.5}});
  EXPECT_GT(e.acceptance_rates[0], 0.999);
}

TEST(Mcmc, DramReducesToMhBitwise) {
  ParamBox box{{{"x", -5.0, 5.0}, {"y", -5.0, 5.0}}};
  auto c = small_config(3, 2000, 99);
  c.adapt = false;
  c.delayed_rejection = false;
  const auto a = mh_sample(kCorrelated, box, c);
  const auto b = dram_sample(kCorrelated, box, c);
  EXPECT_EQ(std::memcmp(a.samples.data(), b.samples.data(), a.samples.size() * sizeof(double)), 0);
  EXPECT_EQ(a.log_post, b.log_post);
  EXPECT_EQ(a.acceptance_rates, b.acceptance_rates);
}

TEST(Mcmc, SameSeedSameChains) {
  ParamBox box{{{"x", -5.0, 5.0}}};
  const auto c = small_config(2, 1000, 12);
  EXPECT_EQ(dram_sample(kStdNormal, box, c).samples, dram_sample(kStdNormal, box, c).samples);
  auto c2 = c;
  c2.jobs = 2;
  EXPECT_EQ(dram_sample(kStdNormal, box, c).samples, dram_sample(kStdNormal, box, c2).samples);
}

TEST(Mcmc, SamplesStayInBoxAndBurnInDropped) {
  ParamBox box{{{"x", 0.0, 1.0}, {"y", -1.0, 0.0}}};
  auto c = small_config(2, 1000, 4);
  c.burn_in_fraction = 0.25;
  const auto e = dram_sample([](std::span<const double>) { return 0.0; }, box, c);
  EXPECT_EQ(e.size(), 1500u);
  for (std::size_t i = 0; i < e.size(); ++i) ASSERT_TRUE(box.contains(e.sample(i)));
  for (double a : e.acceptance_rates) {
    EXPECT_GT(a, 0.0);
    EXPECT_LT(a, 1.0);
  }
}

TEST(Mcmc, DetailedBalanceOnDiscreteTarget) {
  // 50 states on the unit interval; a one-step transition count matrix of
  // the MH kernel should satisfy pi_i P_ij = pi_j P_ji.
  const int states = 50;
  auto cell = [&](double x) { return std::min(states - 1, static_cast<int>(x * states)); };
  LogDensity f = [&](std::span<const double> x) {
    const double c = (cell(x[0]) + 0.5) / states;
    return -8.0 * (c - 0.3) * (c - 0.3);
  };
  ParamBox box{{{"x", 0.0, 1.0}}};
  auto c = small_config(1, 400000, 77);
  c.burn_in_fraction = 0.0;
  c.proposal_std = {0.05};
  const auto e = mh_sample(f, box, c, {{0.3}});
  std::vector<std::vector<double>> counts(states, std::vector<double>(states, 0.0));
  const auto x = e.column(0);
  for (std::size_t t = 1; t < x.size(); ++t) counts[cell(x[t - 1])][cell(x[t])] += 1.0;
  int checked = 0;
  for (int i = 0; i < states; ++i)
    for (int j = i + 1; j < states; ++j) {
      const double nij = counts[i][j], nji = counts[j][i];
      if (nij + nji < 50) continue;
      // flows i->j and j->i are equal in expectation under detailed balance;
      // 4 sigma since ~100 pairs are checked
      EXPECT_LT(std::abs(nij - nji), 4.0 * std::sqrt(nij + nji) + 1.0) << i << "->" << j;
      ++checked;
    }
  EXPECT_GT(checked, 20);
}

TEST(Mcmc, DramBeatsMhOnBanana) {
  // Twisted Gaussian: x ~ N(0, 10^2), y + 0.05 (x^2 - 100) ~ N(0, 1).
  LogDensity f = [](std::span<const double> v) {
    const double x = v[0], y = v[1] + 0.05 * (v[0] * v[0] - 100.0);
    return -0.5 * (x * x / 100.0 + y * y);
  };
  ParamBox box{{{"x", -60.0, 60.0}, {"y", -60.0, 30.0}}};
  auto c = small_config(4, 20000, 31);
  c.proposal_std = {1.0, 1.0};
  const auto mh = mh_sample(f, box, c);
  const auto dram = dram_sample(f, box, c);
  auto ess = [](const PosteriorEnsemble& e) {
    double total = 0.0;
    const std::size_t per = e.size() / e.config.n_chains;
    for (std::size_t k = 0; k < e.dim; ++k) {
      const auto col = e.column(k);
      for (std::size_t ch = 0; ch < e.config.n_chains; ++ch)
        total += effective_sample_size(std::span<const double>(col).subspan(ch * per, per));
    }
    return total;
  };
  EXPECT_GT(ess(dram), ess(mh));
}

TEST(Mcmc, RejectsBadInitAndConfig) {
  ParamBox box{{{"x", 0.0, 1.0}}};
  auto c = small_config(1, 100, 1);
  EXPECT_THROW(mh_sample(kStdNormal, box, c, {{2.0}}), ValidationError);
  c.chain_length = 50;
  EXPECT_THROW(mh_sample(kStdNormal, box, c), ValidationError);
  c = small_config(1, 100, 1);
  c.burn_in_fraction = 1.0;
  EXPECT_THROW(c.validate(), ValidationError);
}

TEST(Summaries, MapEstimate) {
  PosteriorEnsemble e;
  e.dim = 1;
  EXPECT_THROW(map_estimate(e), EmptyEnsemble);
  e.samples = {0.7};
  e.log_post = {-3.0};
  EXPECT_EQ(map_estimate(e), std::vector<double>{0.7});
  e.samples = {0.1, 0.2, 0.3};
  e.log_post = {-1.0, -0.5, -0.5};
  EXPECT_EQ(map_estimate(e), std::vector<double>{0.2});  // first of the tied maxima
}

TEST(Summaries, MapNearGaussianMode) {
  ParamBox box{{{"x", -10.0, 10.0}}};
  auto c = small_config(4, 27778, 8);
  c.proposal_std = {2.4};
  LogDensity f = [](std::span<const double> x) { return -0.5 * (x[0] - 1.5) * (x[0] - 1.5); };
  EXPECT_NEAR(map_estimate(dram_sample(f, box, c))[0], 1.5, 0.5);
}

TEST(Summaries, InformationMeasureLimits) {
  ParamBox box{{{"x", 0.0, 1.0}}};
  auto c = small_config(4, 27778, 9);
  c.proposal_std = {0.3};
  const auto flat = mh_sample([](std::span<const double>) { return 0.0; }, box, c);
  EXPECT_NEAR(information_measure(flat, box)[0], 1.0, 0.05);

  LogDensity narrow = [](std::span<const double> x) { return -0.5 * std::pow((x[0] - 0.5) / 0.01, 2); };
  c.proposal_std = {0.02};
  const auto post = dram_sample(narrow, box, c);
  EXPECT_NEAR(information_measure(post, box)[0], 1.2e-3, 1.2e-4);

  PosteriorEnsemble delta;
  delta.dim = 1;
  delta.samples.assign(100, 0.25);
  delta.log_post.assign(100, 0.0);
  EXPECT_EQ(information_measure(delta, box)[0], 0.0);
}

TEST(Summaries, QuantileAndInterval) {
  EXPECT_DOUBLE_EQ(quantile({1, 2, 3, 4, 5}, 0.5), 3.0);
  EXPECT_DOUBLE_EQ(quantile({1, 2, 3, 4, 5}, 0.25), 2.0);
  EXPECT_DOUBLE_EQ(quantile({1, 2}, 0.5), 1.5);
  EXPECT_THROW(quantile({}, 0.5), EmptySamples);
}

TEST(Summaries, EffectiveSampleSizeOfIidNoise) {
  Rng r(3);
  std::vector<double> x(20000);
  for (auto& v : x) v = r.normal();
  EXPECT_NEAR(effective_sample_size(x) / 20000.0, 1.0, 0.15);
  std::vector<double> ar(20000, 0.0);
  for (std::size_t i = 1; i < ar.size(); ++i) ar[i] = 0.9 * ar[i - 1] + r.normal();
  // AR(1) with phi = 0.9: n (1 - phi) / (1 + phi)
  EXPECT_NEAR(effective_sample_size(ar) / 20000.0, 0.1 / 1.9, 0.02);
}

TEST(Predict, CollapsedPosteriorGivesZeroWidthBand) {
  PosteriorEnsemble e;
  e.dim = 6;
  const auto theta = SgpParams{}.calibrated();
  for (int i = 0; i < 3; ++i) {
    e.samples.insert(e.samples.end(), theta.begin(), theta.end());
    e.log_post.push_back(0.0);
  }
  ForwardModel fm;
  const auto band = posterior_predict(e, 500.0, 3, 1, fm);
  const auto ref = fm.curve(theta, 500.0);
  ASSERT_EQ(band.strain.size(), ref.size());
  for (std::size_t i = 0; i < ref.size(); ++i) {
    // averaging identical values may round by an ulp
    EXPECT_LT(band.std[i], 1e-14 * std::abs(ref.stress[i]) + 1e-300);
    EXPECT_NEAR(band.mean[i], ref.stress[i], 1e-14 * std::abs(ref.stress[i]));
    EXPECT_EQ(band.q025[i], ref.stress[i]);
  }
  EXPECT_EQ(band.qoi.size(), 3u);
}

TEST(Predict, BandShrinksWithPosteriorSpread) {
  // Rescaling samples about their mean by 0.5 (variance x 0.25) halves the band.
  ParamBox box = ParamBox::pillar_priors();
  const auto init = lhs_sample(box, 40, 5);
  const auto theta0 = SgpParams{}.calibrated();
  PosteriorEnsemble wide, narrow;
  wide.dim = narrow.dim = 6;
  for (std::size_t i = 0; i < init.rows; ++i) {
    for (std::size_t k = 0; k < 6; ++k) {
      const double d = 0.02 * (init(i, k) - 0.5 * (box.ranges[k].lower + box.ranges[k].upper)) / box.ranges[k].width();
      wide.samples.push_back(theta0[k] * (1.0 + d));
      narrow.samples.push_back(theta0[k] * (1.0 + 0.5 * d));
    }
    wide.log_post.push_back(0.0);
    narrow.log_post.push_back(0.0);
  }
  ForwardModel fm;
  const auto a = posterior_predict(wide, 500.0, 40, 2, fm);
  const auto b = posterior_predict(narrow, 500.0, 40, 2, fm);
  const double ratio = std::sqrt(b.mean_variance() / a.mean_variance());
  EXPECT_NEAR(ratio, 0.5, 0.05);
}

TEST(Export, SamplesRoundTripAndSummaryIsStable) {
  ParamBox box{{{"a", 0.0, 1.0}, {"b", -1.0, 1.0}}};
  auto c = small_config(2, 300, 6);
  const auto e = dram_sample([](std::span<const double> x) { return -x[0] * x[0] - x[1] * x[1]; }, box, c);
  const auto path = std::filesystem::temp_directory_path() / "sgpuq_samples_test.csv";
  write_samples(path, e);
  const auto r = read_samples(path);
  EXPECT_EQ(r.samples, e.samples);
  EXPECT_EQ(r.log_post, e.log_post);
  EXPECT_EQ(r.chain_of, e.chain_of);
  EXPECT_EQ(r.acceptance_rates, e.acceptance_rates);
  EXPECT_EQ(summary_json(r, box), summary_json(e, box));
  std::filesystem::remove(path);
  EXPECT_THROW(read_samples(path), IoError);
}
