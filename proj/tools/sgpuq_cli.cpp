// sgpuq: command-line front end for the simulate / gen-data / sensitivity /
// calibrate / predict pipeline. One JSON config per run; see README.md.

#include <omp.h>

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sgpuq/config.hpp"
#include "sgpuq/errors.hpp"
#include "sgpuq/inference.hpp"
#include "sgpuq/qoi.hpp"
#include "sgpuq/sensitivity.hpp"

namespace fs = std::filesystem;
using namespace sgpuq;

namespace {

enum ExitCode { kOk = 0, kConfig = 2, kSolver = 3, kIo = 4 };

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::optional<std::string> out_dir;
};

std::ofstream open_out(const fs::path& p) {
  std::ofstream os(p);
  if (!os) throw IoError("cannot write " + p.string());
  return os;
}

ExperimentConfig prepare(const std::string& config_path, const Overrides& o, const std::string& command) {
  auto cfg = load_config(config_path);
  if (o.seed) cfg.seed = *o.seed;
  if (o.jobs) cfg.jobs = *o.jobs;
  if (o.out_dir) cfg.out_dir = *o.out_dir;
  cfg.validate();
  omp_set_num_threads(cfg.jobs);
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) throw IoError("cannot create " + cfg.out_dir.string() + ": " + ec.message());
  open_out(cfg.out_dir / (command + ".config.json")) << config_to_json(cfg);
  return cfg;
}

void cmd_simulate(const ExperimentConfig& cfg) {
  const auto& fm = cfg.model;
  const auto mesh = fm.mesh(cfg.simulate.size);
  const auto res = run_compression(fm.base, mesh, fm.program, fm.solver);
  write_curve_csv(cfg.out_dir / "curve.csv", res.curve);

  const auto prof = plastic_profile(res.trace, mesh, cfg.simulate.profile_strain);
  auto os = open_out(cfg.out_dir / "profile.csv");
  os << "y_over_l,eps_p\n" << std::setprecision(12);
  for (std::size_t i = 0; i < prof.eps_p.size(); ++i) os << prof.y_over_l[i] << ',' << prof.eps_p[i] << '\n';

  auto tr = open_out(cfg.out_dir / "trace.csv");
  tr << "step,applied_strain,stress_gpa,newton_iterations,substeps,residual\n" << std::setprecision(12);
  for (std::size_t i = 0; i < res.trace.steps.size(); ++i) {
    const auto& s = res.trace.steps[i];
    tr << i + 1 << ',' << s.applied_strain << ',' << s.stress << ',' << s.newton_iterations << ',' << s.substeps << ','
       << s.residual << '\n';
  }
  std::cout << "size " << cfg.simulate.size << " nm, " << res.curve.size() << " steps\n"
            << "flow stress (0.2% offset) " << offset_flow_stress(res.curve, fm.base.elastic_modulus) << " GPa\n"
            << "stress at " << res.curve.strain.back() << " strain " << res.curve.stress.back() << " GPa\n";
  if (res.curve.strain.back() >= fm.qoi_strain * (1.0 - 1e-9))
    std::cout << "strain energy " << strain_energy(res.curve, fm.qoi_strain).value << " GPa\n";
  std::cout << "boundary layer width " << boundary_layer_width(prof) << " L\n";
}

void cmd_gen_data(const ExperimentConfig& cfg) {
  const auto& d = cfg.data;
  const auto ds = generate_synthetic(d.truth, d.sizes, d.replicates, d.noise, subsystem_seed(cfg.seed, "gen-data"),
                                     cfg.model, cfg.jobs);
  const auto dir = cfg.resolve(d.dir);
  export_dataset(ds, dir);
  auto os = open_out(cfg.out_dir / "noise_summary.csv");
  os << "size_nm,replicates,mean_stress_gpa,pooled_std_gpa,relative_std\n" << std::setprecision(8);
  if (d.replicates > 1)
    for (const auto& s : ds.noise_summary())
      os << s.size << ',' << s.replicates << ',' << s.mean_stress << ',' << s.pooled_std << ',' << s.relative_std
         << '\n';
  std::cout << "wrote " << ds.entries.size() << " curves to " << dir.string() << '\n';
}

void cmd_sensitivity(const ExperimentConfig& cfg) {
  const auto& s = cfg.sensitivity;
  SweepOptions o;
  o.n = s.n;
  o.replicates = s.replicates;
  o.seed = subsystem_seed(cfg.seed, "sensitivity");
  o.jobs = cfg.jobs;
  o.max_failure_fraction = s.max_failure_fraction;

  SensitivityReport rep;
  ParamBox box = cfg.prior;
  if (s.model == SensitivityModel::Sgp) {
    rep = size_sweep_sensitivity(box, s.sizes, cfg.model, o);
  } else if (s.model == SensitivityModel::Additive) {
    box = ParamBox::unit(3);
    rep = size_sweep_sensitivity(
        box, s.sizes, [](std::span<const double> x, double) { return x[0] + 2.0 * x[1] + 3.0 * x[2]; }, o);
  } else {
    const double pi = std::numbers::pi;
    box = ParamBox{{{"x1", -pi, pi}, {"x2", -pi, pi}, {"x3", -pi, pi}}};
    rep = size_sweep_sensitivity(
        box, s.sizes,
        [](std::span<const double> x, double) {
          return std::sin(x[0]) + 7.0 * std::sin(x[1]) * std::sin(x[1]) + 0.1 * std::pow(x[2], 4) * std::sin(x[0]);
        },
        o);
  }
  write_indices_csv(cfg.out_dir / "sensitivity_indices.csv", rep);
  scatter_export(rep.scatter_inputs, rep.scatter_qoi.back(), box, cfg.out_dir / "sensitivity_scatter.csv");

  std::cout << "N = " << rep.n << ", R = " << rep.replicates << ", " << rep.evaluations_per_size
            << " evaluations per size\nsize-averaged total-effect indices:\n";
  for (const auto& name : box.names()) {
    const auto& e = rep.at(name, std::nullopt);
    std::cout << "  " << std::left << std::setw(6) << name << std::right << std::fixed << std::setprecision(4)
              << e.mean << " +- " << e.std << '\n';
  }
  std::cout.unsetf(std::ios::floatfield);
}

void cmd_calibrate(const ExperimentConfig& cfg) {
  const auto& in = cfg.inference;
  ChainConfig chain = in.chain;
  chain.seed = subsystem_seed(cfg.seed, "calibrate");
  chain.jobs = cfg.jobs;

  PosteriorEnsemble ens;
  const ParamBox& box = cfg.prior;
  if (in.resume) {
    ens = read_samples(cfg.resolve(*in.resume));
    if (ens.dim != box.size()) throw ValidationError("resumed samples do not match the prior dimension");
    std::cout << "resumed " << ens.size() << " samples\n";
  } else if (in.target == CalibrationTarget::Gaussian) {
    // Conjugate check: independent normals centred in the box, std 1/20 of each range.
    LogDensity f = [&box](std::span<const double> x) {
      double lp = 0.0;
      for (std::size_t k = 0; k < box.size(); ++k) {
        const auto& r = box.ranges[k];
        const double z = (x[k] - 0.5 * (r.lower + r.upper)) / (r.width() / 20.0);
        lp -= 0.5 * z * z;
      }
      return lp;
    };
    ens = dram_sample(f, box, chain);
  } else {
    const auto ds = ingest(cfg.resolve(cfg.data.dir));
    const auto [train, test] = case_split(ds, in.split);
    const bool explicit_sigma = in.likelihood.sigma || !in.likelihood.sigma_by_size.empty();
    LikelihoodSpec spec = explicit_sigma ? in.likelihood : LikelihoodSpec::from_dataset(train);
    spec.stride = in.likelihood.stride;
    ModelCache cache(cfg.model);
    LogDensity f = [&](std::span<const double> th) { return log_likelihood(th, train, spec, cache); };
    ens = dram_sample(f, box, chain);
    std::cout << "solves " << cache.misses() << ", cache hits " << cache.hits() << ", failures " << cache.failures()
              << '\n';
  }
  if (!in.resume) write_samples(cfg.out_dir / "posterior_samples.csv", ens);
  const auto summary = summary_json(ens, box);
  open_out(cfg.out_dir / "posterior_summary.json") << summary;

  const auto map = map_estimate(ens);
  const auto info = information_measure(ens, box);
  std::cout << "parameter        MAP        I(theta)\n";
  for (std::size_t k = 0; k < ens.dim; ++k)
    std::cout << "  " << std::left << std::setw(6) << ens.names[k] << std::right << std::setw(14) << map[k]
              << std::setw(12) << info[k] << '\n';
}

void cmd_predict(const ExperimentConfig& cfg, const std::optional<std::string>& posterior_flag) {
  fs::path post = posterior_flag ? fs::path(*posterior_flag)
                                 : cfg.inference.posterior ? cfg.resolve(*cfg.inference.posterior)
                                                           : cfg.out_dir / "posterior_samples.csv";
  if (!fs::exists(post)) throw IoError("posterior samples not found: " + post.string());
  const auto ens = read_samples(post);
  if (ens.size() == 0) throw EmptyEnsemble("posterior file holds no samples");
  const auto ds = ingest(cfg.resolve(cfg.data.dir));
  const auto& split = cfg.inference.split;
  split.validate();

  nlohmann::ordered_json report;
  report["case"] = split.label;
  report["posterior"] = post.string();
  report["n_draws"] = cfg.inference.n_draws;
  auto table = open_out(cfg.out_dir / "prediction_report.csv");
  table << "size_nm,set,cdf_error,error_mean,error_std,predictive_variance,data_variance,variance_reduction\n";
  std::cout << "micro-pillar size | set      | E (bootstrap mean +- std) | cdf_error\n";
  const auto sizes = ds.sizes();
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const double L = sizes[i];
    const auto has = [L](const std::vector<double>& v) {
      return std::any_of(v.begin(), v.end(), [L](double s) { return same_size(s, L); });
    };
    const std::string set = has(split.testing) ? "testing" : has(split.training) ? "training" : "unused";
    const auto band = posterior_predict(ens, L, cfg.inference.n_draws, subsystem_seed(cfg.seed, "predict") + i,
                                        cfg.model, cfg.jobs);
    const auto dq = data_qoi(ds, L);
    const auto err = cdf_error_bootstrap(dq, band.qoi, 200, subsystem_seed(cfg.seed, "bootstrap") + i);
    const double pv = band.mean_variance();
    const double dv = ds.at_size(L).size() > 1 ? data_stress_variance(ds, L) : std::nan("");
    const double reduction = 1.0 - pv / dv;

    std::ostringstream name;
    name << "predictive_band_L" << L << ".csv";
    auto os = open_out(cfg.out_dir / name.str());
    os << "strain,mean_gpa,std_gpa,q025_gpa,q975_gpa\n" << std::setprecision(12);
    for (std::size_t j = 0; j < band.strain.size(); ++j)
      os << band.strain[j] << ',' << band.mean[j] << ',' << band.std[j] << ',' << band.q025[j] << ','
         << band.q975[j] << '\n';

    table << std::setprecision(8) << L << ',' << set << ',' << err.value << ',' << err.mean << ',' << err.std << ','
          << pv << ',' << dv << ',' << reduction << '\n';
    report["sizes"].push_back({{"size_nm", L},
                               {"set", set},
                               {"cdf_error", err.value},
                               {"error_mean", err.mean},
                               {"error_std", err.std},
                               {"failed_draws", band.failed},
                               {"predictive_variance", pv},
                               {"data_variance", dv},
                               {"variance_reduction", reduction}});
    std::cout << std::setw(14) << L << " nm | " << std::left << std::setw(8) << set << std::right << " | "
              << std::fixed << std::setprecision(3) << std::setw(10) << err.mean << " +- " << std::setw(6)
              << err.std << "       | " << err.value << '\n';
    std::cout.unsetf(std::ios::floatfield);
    std::cout.precision(6);
  }
  open_out(cfg.out_dir / "prediction_report.json") << report.dump(2) << '\n';
}

int run(int argc, char** argv) {
  CLI::App app{"Strain gradient plasticity: simulation, sensitivity, calibration and prediction"};
  app.require_subcommand(1);
  std::string config;
  Overrides o;
  std::optional<std::string> resume, posterior, test_model;
  bool gaussian = false;

  auto common = [&](CLI::App* sub) {
    sub->add_option("config", config, "experiment config (JSON)")->required();
    sub->add_option("--seed", o.seed, "root seed override");
    sub->add_option("--jobs", o.jobs, "maximum parallel solves")->check(CLI::PositiveNumber);
    sub->add_option("--out-dir", o.out_dir, "output directory override");
  };
  auto* sim = app.add_subcommand("simulate", "one compression solve: curve, profile and trace CSVs");
  auto* gen = app.add_subcommand("gen-data", "synthetic replicate dataset at the configured truth");
  auto* sens = app.add_subcommand("sensitivity", "total-effect Sobol indices over the pillar sizes");
  auto* cal = app.add_subcommand("calibrate", "DRAM calibration against the training sizes");
  auto* pred = app.add_subcommand("predict", "posterior-predictive bands and cdf_error per size");
  for (auto* s : {sim, gen, sens, cal, pred}) common(s);
  sens->add_option("--test-model", test_model, "closed-form oracle instead of the SGP model")
      ->check(CLI::IsMember({"sgp", "additive", "ishigami"}));
  cal->add_flag("--gaussian-target", gaussian, "sample a known Gaussian target instead of the SGP posterior");
  cal->add_option("--resume", resume, "summarise an existing samples file instead of sampling");
  pred->add_option("--posterior", posterior, "posterior samples file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    auto* used = app.get_subcommands().front();
    const std::string name = used->get_name();
    auto cfg = prepare(config, o, name);
    if (name == "simulate") {
      cmd_simulate(cfg);
    } else if (name == "gen-data") {
      cmd_gen_data(cfg);
    } else if (name == "sensitivity") {
      if (test_model) cfg.sensitivity.model = *test_model == "additive" ? SensitivityModel::Additive
                                              : *test_model == "ishigami" ? SensitivityModel::Ishigami
                                                                          : SensitivityModel::Sgp;
      cmd_sensitivity(cfg);
    } else if (name == "calibrate") {
      if (gaussian) cfg.inference.target = CalibrationTarget::Gaussian;
      if (resume) cfg.inference.resume = fs::absolute(*resume);
      cmd_calibrate(cfg);
    } else {
      cmd_predict(cfg, posterior);
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfig;
  } catch (const StatisticsError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfig;
  } catch (const SolverFailure& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kSolver;
  } catch (const NonConvergence& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kSolver;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const ParseError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
