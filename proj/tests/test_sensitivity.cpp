#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "sgpuq/errors.hpp"
#include "sgpuq/sensitivity.hpp"

using namespace sgpuq;

namespace {

double additive(std::span<const double> x) { return x[0] + 2.0 * x[1] + 3.0 * x[2]; }

double ishigami(std::span<const double> x) {
  return std::sin(x[0]) + 7.0 * std::sin(x[1]) * std::sin(x[1]) + 0.1 * std::pow(x[2], 4) * std::sin(x[0]);
}

ParamBox ishigami_box() {
  const double pi = std::numbers::pi;
  return {{{"x1", -pi, pi}, {"x2", -pi, pi}, {"x3", -pi, pi}}};
}

SizedModel unsized(double (*f)(std::span<const double>)) {
  return [f](std::span<const double> x, double) { return f(x); };
}

}  // namespace

TEST(TotalEffect, AdditiveModel) {
  SweepOptions o;
  o.n = 4000;
  o.replicates = 1;
  o.seed = 5;
  const auto rep = size_sweep_sensitivity(ParamBox::unit(3), {1.0}, unsized(&additive), o);
  EXPECT_NEAR(rep.at("x1", 1.0).mean, 1.0 / 14.0, 0.02);
  EXPECT_NEAR(rep.at("x2", 1.0).mean, 4.0 / 14.0, 0.02);
  EXPECT_NEAR(rep.at("x3", 1.0).mean, 9.0 / 14.0, 0.03);
}

TEST(TotalEffect, IshigamiModel) {
  SweepOptions o;
  o.n = 10000;
  o.replicates = 1;
  o.seed = 8;
  const auto rep = size_sweep_sensitivity(ishigami_box(), {1.0}, unsized(&ishigami), o);
  // analytic total effects for a = 7, b = 0.1
  EXPECT_NEAR(rep.at("x1", 1.0).mean, 0.5575888552099592, 0.04);
  EXPECT_NEAR(rep.at("x2", 1.0).mean, 0.4424111447900409, 0.04);
  EXPECT_NEAR(rep.at("x3", 1.0).mean, 0.2436836640621477, 0.04);
}

TEST(TotalEffect, HandComputed) {
  // yA = {1, 2, 3}, yB = {2, 4, 6}; pooled variance of {1,2,3,2,4,6} = 3.2
  const std::vector<double> ya{1, 2, 3}, yb{2, 4, 6};
  const std::vector<std::vector<double>> yab{{1, 2, 4}, {3, 2, 3}};
  const auto raw = total_effect_indices(ya, yb, yab, false);
  EXPECT_DOUBLE_EQ(raw[0], 1.0 / 6.0);
  EXPECT_DOUBLE_EQ(raw[1], 4.0 / 6.0);
  const auto s = total_effect_indices(ya, yb, yab, true);
  EXPECT_NEAR(s[0], 1.0 / 6.0 / 3.2, 1e-15);
}

TEST(TotalEffect, PairwiseDeletion) {
  const double nan = std::nan("");
  const std::vector<double> ya{1, 2, 3, 4}, yb{2, 4, 6, 1};
  const std::vector<std::vector<double>> yab{{1, nan, 4, 4}};
  const auto raw = total_effect_indices(ya, yb, yab, false);
  EXPECT_DOUBLE_EQ(raw[0], 1.0 / 6.0);  // three usable pairs, one squared difference of 1
}

TEST(TotalEffect, ZeroVariance) {
  const std::vector<double> y{2, 2, 2};
  EXPECT_THROW(total_effect_indices(y, y, {{2, 2, 2}}), ZeroVariance);
  EXPECT_NO_THROW(total_effect_indices(y, y, {{2, 2, 2}}, false));
}

TEST(Batch, SerialAndParallelAgreeAndRecordFailures) {
  const auto m = lhs_sample(ParamBox::unit(2), 200, 3);
  RowModel f = [](std::span<const double> x) {
    if (x[0] < 0.02) throw SolverFailure("synthetic failure");
    return x[0] * x[1];
  };
  const auto a = evaluate_batch_serial(m, f);
  const auto b = evaluate_batch_parallel(m, f, 4);
  ASSERT_EQ(a.values.size(), 200u);
  EXPECT_EQ(a.failed_rows, b.failed_rows);
  EXPECT_EQ(a.failed_rows.size(), 4u);  // one LHS stratum of width 0.005 per 1% of range
  for (std::size_t i = 0; i < 200; ++i) {
    if (std::isnan(a.values[i])) {
      EXPECT_TRUE(std::isnan(b.values[i]));
    } else {
      EXPECT_EQ(a.values[i], b.values[i]);
    }
  }
}

TEST(Batch, OtherExceptionsPropagate) {
  const auto m = lhs_sample(ParamBox::unit(1), 10, 3);
  RowModel f = [](std::span<const double>) -> double { throw std::logic_error("bug"); };
  EXPECT_THROW(evaluate_batch_parallel(m, f, 2), std::logic_error);
}

TEST(Sweep, TooManyFailuresAbort) {
  SweepOptions o;
  o.n = 100;
  o.replicates = 1;
  SizedModel f = [](std::span<const double> x, double) {
    if (x[0] < 0.1) throw SolverFailure("synthetic");
    return x[0] + x[1];
  };
  EXPECT_THROW(size_sweep_sensitivity(ParamBox::unit(2), {1.0}, f, o), SolverFailure);
  o.max_failure_fraction = 0.5;
  EXPECT_NO_THROW(size_sweep_sensitivity(ParamBox::unit(2), {1.0}, f, o));
}

TEST(Sweep, ReportShapeAndSizeAverage) {
  SweepOptions o;
  o.n = 500;
  o.replicates = 3;
  o.seed = 17;
  // Size scales x1's weight: at size 1 only x1 matters, at size 0 only x2.
  SizedModel f = [](std::span<const double> x, double s) { return s * x[0] + (1.0 - s) * x[1]; };
  const auto rep = size_sweep_sensitivity(ParamBox::unit(2), {0.0, 1.0}, f, o);
  EXPECT_EQ(rep.entries.size(), 6u);
  EXPECT_EQ(rep.evaluations_per_size, 3u * 500u * 4u);
  EXPECT_NEAR(rep.at("x1", 1.0).mean, 1.0, 0.05);
  EXPECT_NEAR(rep.at("x1", 0.0).mean, 0.0, 1e-12);
  EXPECT_NEAR(rep.at("x1", std::nullopt).mean, 0.5, 0.05);
  for (const auto& e : rep.entries) {
    EXPECT_EQ(e.replicates.size(), 3u);
    EXPECT_GE(e.std, 0.0);
  }
  EXPECT_THROW(rep.at("x9", 1.0), OutOfRange);
}

TEST(Sweep, IndependentOfJobCount) {
  SweepOptions o;
  o.n = 300;
  o.replicates = 2;
  o.seed = 4;
  o.jobs = 1;
  const auto a = size_sweep_sensitivity(ishigami_box(), {1.0, 2.0}, unsized(&ishigami), o);
  o.jobs = 3;
  const auto b = size_sweep_sensitivity(ishigami_box(), {1.0, 2.0}, unsized(&ishigami), o);
  for (std::size_t i = 0; i < a.entries.size(); ++i) EXPECT_EQ(a.entries[i].replicates, b.entries[i].replicates);
}

TEST(Export, IndicesAndScatterCsv) {
  const auto dir = std::filesystem::temp_directory_path() / "sgpuq_sens_test";
  std::filesystem::create_directories(dir);
  SweepOptions o;
  o.n = 50;
  o.replicates = 2;
  const auto rep = size_sweep_sensitivity(ParamBox::unit(3), {200.0}, unsized(&additive), o);
  write_indices_csv(dir / "idx.csv", rep);
  std::ifstream is(dir / "idx.csv");
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "parameter,size,S_mean,S_std");
  std::getline(is, line);
  EXPECT_EQ(line.rfind("x1,200,", 0), 0u);
  std::size_t rows = 1;
  std::string last;
  while (std::getline(is, line)) ++rows, last = line;
  EXPECT_EQ(rows, 6u);
  EXPECT_EQ(last.rfind("x3,mean,", 0), 0u);

  const auto m = lhs_sample(ParamBox::unit(3), 4, 1);
  const std::vector<double> q{1, 2, 3, 4};
  scatter_export(m, q, ParamBox::unit(3), dir / "scatter.csv");
  std::ifstream s(dir / "scatter.csv");
  std::getline(s, line);
  EXPECT_EQ(line, "x1,x2,x3,qoi");
  EXPECT_THROW(scatter_export(m, std::vector<double>{1.0}, ParamBox::unit(3), dir / "x.csv"), ValidationError);
  std::filesystem::remove_all(dir);
}

TEST(Sweep, SgpModelSmoke) {
  // Two rows per block at one size keeps this to 16 solves.
  ForwardModel fm;
  SweepOptions o;
  o.n = 2;
  o.replicates = 1;
  o.seed = 1;
  const auto rep = size_sweep_sensitivity(ParamBox::pillar_priors(), {500.0}, fm, o);
  EXPECT_EQ(rep.entries.size(), 12u);
  for (const auto& e : rep.entries) EXPECT_TRUE(std::isfinite(e.mean));
}
