#include "sgpuq/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sgpuq/errors.hpp"
#include "sgpuq/rng.hpp"

namespace sgpuq {

using nlohmann::json;

namespace {

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ValidationError(where + ": expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items())
    if (!ok.count(k)) throw ValidationError(where + ": unknown key '" + k + "'");
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(where + "." + key + ": wrong type");
  }
}

std::vector<double> read_sizes(const json& j, const char* key, std::vector<double> fallback, const std::string& where) {
  read(j, key, fallback, where);
  return fallback;
}

void read_params(const json& j, SgpParams& p, const std::string& where) {
  only_keys(j, where, {"l_dis", "l_en", "Y", "h", "r", "E", "m", "q", "nu"});
  read(j, "l_dis", p.l_dis, where);
  read(j, "l_en", p.l_en, where);
  read(j, "Y", p.yield_strength, where);
  read(j, "h", p.h_iso, where);
  read(j, "r", p.r_iso, where);
  read(j, "E", p.elastic_modulus, where);
  read(j, "m", p.rate_power, where);
  read(j, "q", p.rate_coeff, where);
  read(j, "nu", p.poisson, where);
}

json params_json(const SgpParams& p) {
  return {{"l_dis", p.l_dis}, {"l_en", p.l_en}, {"Y", p.yield_strength}, {"h", p.h_iso}, {"r", p.r_iso},
          {"E", p.elastic_modulus}, {"m", p.rate_power}, {"q", p.rate_coeff}, {"nu", p.poisson}};
}

CaseSplit read_split(const json& j, const std::string& where) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "I" || s == "Case I") return CaseSplit::case_one();
    if (s == "II" || s == "Case II") return CaseSplit::case_two();
    throw ValidationError(where + ": expected \"I\", \"II\" or an object");
  }
  only_keys(j, where, {"label", "training", "testing"});
  CaseSplit c;
  read(j, "label", c.label, where);
  read(j, "training", c.training, where);
  read(j, "testing", c.testing, where);
  return c;
}

}  // namespace

std::uint64_t subsystem_seed(std::uint64_t root, const std::string& subsystem) {
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a
  for (unsigned char c : subsystem) h = (h ^ c) * 1099511628211ull;
  return derive_seed(root, h);
}

std::filesystem::path ExperimentConfig::resolve(const std::filesystem::path& path) const {
  return path.is_absolute() ? path : out_dir / path;
}

void ExperimentConfig::validate() const {
  if (jobs < 1) throw ValidationError("jobs must be >= 1");
  model.base.validate();
  model.mesh(500.0).validate();
  model.program.validate();
  if (model.solver.max_iter < 0 || model.solver.max_bisection_depth < 0)
    throw ValidationError("solver iteration limits must be >= 0");
  prior.validate();
  if (prior.size() != SgpParams::kCalibrated) throw ValidationError("prior must list the six calibrated parameters");
  for (std::size_t k = 0; k < prior.size(); ++k)
    if (prior.ranges[k].name != SgpParams::kNames[k])
      throw ValidationError("prior entry " + std::to_string(k) + " must be " + std::string(SgpParams::kNames[k]));
  if (!(simulate.size > 0.0)) throw ValidationError("simulate.size must be > 0");
  if (data.replicates < 1) throw ValidationError("data.replicates must be >= 1");
  if (data.sizes.empty()) throw ValidationError("data.sizes must not be empty");
  data.noise.validate();
  data.truth.validate();
  if (sensitivity.n < 2) throw ValidationError("sensitivity.n must be >= 2");
  if (sensitivity.replicates < 1) throw ValidationError("sensitivity.replicates must be >= 1");
  if (sensitivity.sizes.empty()) throw ValidationError("sensitivity.sizes must not be empty");
  inference.chain.validate();
  inference.likelihood.validate();
  inference.split.validate();
  if (inference.n_draws < 1) throw ValidationError("inference.n_draws must be >= 1");
}

ExperimentConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
  only_keys(root, "config",
            {"seed", "jobs", "out_dir", "solver", "params", "prior", "simulate", "data", "sensitivity", "inference"});
  ExperimentConfig c;
  read(root, "seed", c.seed, "config");
  read(root, "jobs", c.jobs, "config");
  std::string out = c.out_dir.string();
  read(root, "out_dir", out, "config");
  c.out_dir = out;

  if (root.contains("solver")) {
    const auto& s = root["solver"];
    only_keys(s, "solver",
              {"n_elements", "quadrature_order", "strain_rate", "dt", "final_strain", "rel_tol", "abs_tol", "max_iter",
               "max_bisection_depth", "remerge_after", "rate_floor", "extrapolate"});
    read(s, "n_elements", c.model.n_elements, "solver");
    read(s, "quadrature_order", c.model.quadrature_order, "solver");
    read(s, "strain_rate", c.model.program.strain_rate, "solver");
    read(s, "dt", c.model.program.dt, "solver");
    read(s, "final_strain", c.model.program.final_strain, "solver");
    read(s, "rel_tol", c.model.solver.rel_tol, "solver");
    read(s, "abs_tol", c.model.solver.abs_tol, "solver");
    read(s, "max_iter", c.model.solver.max_iter, "solver");
    read(s, "max_bisection_depth", c.model.solver.max_bisection_depth, "solver");
    read(s, "remerge_after", c.model.solver.remerge_after, "solver");
    read(s, "rate_floor", c.model.solver.rate_floor, "solver");
    read(s, "extrapolate", c.model.solver.extrapolate, "solver");
  }
  if (root.contains("params")) read_params(root["params"], c.model.base, "params");
  c.data.truth = c.model.base;

  if (root.contains("prior")) {
    const auto& p = root["prior"];
    if (p.is_string()) {
      if (p.get<std::string>() != "pillar") throw ValidationError("prior: the only named prior is \"pillar\"");
    } else if (p.is_array()) {
      c.prior.ranges.clear();
      for (const auto& r : p) {
        only_keys(r, "prior[]", {"name", "lower", "upper"});
        ParamRange range;
        read(r, "name", range.name, "prior[]");
        read(r, "lower", range.lower, "prior[]");
        read(r, "upper", range.upper, "prior[]");
        c.prior.ranges.push_back(range);
      }
    } else if (p.is_object()) {
      // partial override of the pillar priors: {"l_en": [10, 450]}
      for (const auto& [name, v] : p.items()) {
        bool found = false;
        for (auto& r : c.prior.ranges)
          if (r.name == name) {
            if (!v.is_array() || v.size() != 2) throw ValidationError("prior." + name + ": expected [lower, upper]");
            r.lower = v[0].get<double>();
            r.upper = v[1].get<double>();
            found = true;
          }
        if (!found) throw ValidationError("prior: unknown parameter '" + name + "'");
      }
    } else {
      throw ValidationError("prior: expected \"pillar\", an array or an object");
    }
  }

  if (root.contains("simulate")) {
    const auto& s = root["simulate"];
    only_keys(s, "simulate", {"size", "profile_strain"});
    read(s, "size", c.simulate.size, "simulate");
    read(s, "profile_strain", c.simulate.profile_strain, "simulate");
  }

  if (root.contains("data")) {
    const auto& d = root["data"];
    only_keys(d, "data", {"dir", "sizes", "replicates", "noise", "truth"});
    std::string dir = c.data.dir.string();
    read(d, "dir", dir, "data");
    c.data.dir = dir;
    c.data.sizes = read_sizes(d, "sizes", c.data.sizes, "data");
    read(d, "replicates", c.data.replicates, "data");
    if (d.contains("noise")) {
      only_keys(d["noise"], "data.noise", {"relative_std", "curve_share"});
      read(d["noise"], "relative_std", c.data.noise.relative_std, "data.noise");
      read(d["noise"], "curve_share", c.data.noise.curve_share, "data.noise");
    }
    if (d.contains("truth")) read_params(d["truth"], c.data.truth, "data.truth");
  }

  if (root.contains("sensitivity")) {
    const auto& s = root["sensitivity"];
    only_keys(s, "sensitivity", {"n", "replicates", "sizes", "model", "max_failure_fraction"});
    read(s, "n", c.sensitivity.n, "sensitivity");
    read(s, "replicates", c.sensitivity.replicates, "sensitivity");
    c.sensitivity.sizes = read_sizes(s, "sizes", c.sensitivity.sizes, "sensitivity");
    read(s, "max_failure_fraction", c.sensitivity.max_failure_fraction, "sensitivity");
    std::string m = "sgp";
    read(s, "model", m, "sensitivity");
    if (m == "sgp") c.sensitivity.model = SensitivityModel::Sgp;
    else if (m == "additive") c.sensitivity.model = SensitivityModel::Additive;
    else if (m == "ishigami") c.sensitivity.model = SensitivityModel::Ishigami;
    else throw ValidationError("sensitivity.model: expected sgp, additive or ishigami");
  }

  if (root.contains("inference")) {
    const auto& in = root["inference"];
    only_keys(in, "inference", {"chain", "likelihood", "case", "target", "resume", "posterior", "n_draws"});
    auto& ch = c.inference.chain;
    if (in.contains("chain")) {
      const auto& j = in["chain"];
      only_keys(j, "inference.chain",
                {"n_chains", "chain_length", "burn_in_fraction", "proposal_fraction", "proposal_std", "adapt",
                 "adaptation_start", "adaptation_interval", "adaptation_scale", "adaptation_epsilon",
                 "delayed_rejection", "dr_scale"});
      const std::string w = "inference.chain";
      read(j, "n_chains", ch.n_chains, w);
      read(j, "chain_length", ch.chain_length, w);
      read(j, "burn_in_fraction", ch.burn_in_fraction, w);
      read(j, "proposal_fraction", ch.proposal_fraction, w);
      read(j, "proposal_std", ch.proposal_std, w);
      read(j, "adapt", ch.adapt, w);
      read(j, "adaptation_start", ch.adaptation_start, w);
      read(j, "adaptation_interval", ch.adaptation_interval, w);
      read(j, "adaptation_scale", ch.adaptation_scale, w);
      read(j, "adaptation_epsilon", ch.adaptation_epsilon, w);
      read(j, "delayed_rejection", ch.delayed_rejection, w);
      read(j, "dr_scale", ch.dr_scale, w);
    }
    if (in.contains("likelihood")) {
      const auto& j = in["likelihood"];
      only_keys(j, "inference.likelihood", {"sigma", "sigma_by_size", "stride"});
      if (j.contains("sigma") && !j["sigma"].is_null()) {
        double s = 0.0;
        read(j, "sigma", s, "inference.likelihood");
        c.inference.likelihood.sigma = s;
      }
      if (j.contains("sigma_by_size")) {
        if (!j["sigma_by_size"].is_object()) throw ValidationError("inference.likelihood.sigma_by_size: expected object");
        for (const auto& [k, v] : j["sigma_by_size"].items()) {
          try {
            c.inference.likelihood.sigma_by_size[std::stod(k)] = v.get<double>();
          } catch (const std::exception&) {
            throw ValidationError("inference.likelihood.sigma_by_size: bad entry '" + k + "'");
          }
        }
      }
      read(j, "stride", c.inference.likelihood.stride, "inference.likelihood");
    }
    if (in.contains("case")) c.inference.split = read_split(in["case"], "inference.case");
    std::string target = "sgp";
    read(in, "target", target, "inference");
    if (target == "sgp") c.inference.target = CalibrationTarget::Sgp;
    else if (target == "gaussian") c.inference.target = CalibrationTarget::Gaussian;
    else throw ValidationError("inference.target: expected sgp or gaussian");
    if (in.contains("resume") && !in["resume"].is_null()) {
      std::string p;
      read(in, "resume", p, "inference");
      c.inference.resume = p;
    }
    if (in.contains("posterior") && !in["posterior"].is_null()) {
      std::string p;
      read(in, "posterior", p, "inference");
      c.inference.posterior = p;
    }
    read(in, "n_draws", c.inference.n_draws, "inference");
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot read config " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["seed"] = c.seed;
  j["jobs"] = c.jobs;
  j["out_dir"] = c.out_dir.string();
  const auto& s = c.model.solver;
  j["solver"] = {{"n_elements", c.model.n_elements},
                 {"quadrature_order", c.model.quadrature_order},
                 {"strain_rate", c.model.program.strain_rate},
                 {"dt", c.model.program.dt},
                 {"final_strain", c.model.program.final_strain},
                 {"rel_tol", s.rel_tol},
                 {"abs_tol", s.abs_tol},
                 {"max_iter", s.max_iter},
                 {"max_bisection_depth", s.max_bisection_depth},
                 {"remerge_after", s.remerge_after},
                 {"rate_floor", s.rate_floor},
                 {"extrapolate", s.extrapolate}};
  j["params"] = params_json(c.model.base);
  j["prior"] = json::array();
  for (const auto& r : c.prior.ranges) j["prior"].push_back({{"name", r.name}, {"lower", r.lower}, {"upper", r.upper}});
  j["simulate"] = {{"size", c.simulate.size}, {"profile_strain", c.simulate.profile_strain}};
  j["data"] = {{"dir", c.data.dir.string()},
               {"sizes", c.data.sizes},
               {"replicates", c.data.replicates},
               {"noise", {{"relative_std", c.data.noise.relative_std}, {"curve_share", c.data.noise.curve_share}}},
               {"truth", params_json(c.data.truth)}};
  const char* models[] = {"sgp", "additive", "ishigami"};
  j["sensitivity"] = {{"n", c.sensitivity.n},
                      {"replicates", c.sensitivity.replicates},
                      {"sizes", c.sensitivity.sizes},
                      {"model", models[static_cast<int>(c.sensitivity.model)]},
                      {"max_failure_fraction", c.sensitivity.max_failure_fraction}};
  const auto& ch = c.inference.chain;
  json sigma_by_size = json::object();
  for (const auto& [size, v] : c.inference.likelihood.sigma_by_size) {
    std::ostringstream k;
    k << size;
    sigma_by_size[k.str()] = v;
  }
  j["inference"] = {
      {"chain",
       {{"n_chains", ch.n_chains},
        {"chain_length", ch.chain_length},
        {"burn_in_fraction", ch.burn_in_fraction},
        {"proposal_fraction", ch.proposal_fraction},
        {"proposal_std", ch.proposal_std},
        {"adapt", ch.adapt},
        {"adaptation_start", ch.adaptation_start},
        {"adaptation_interval", ch.adaptation_interval},
        {"adaptation_scale", ch.adaptation_scale},
        {"adaptation_epsilon", ch.adaptation_epsilon},
        {"delayed_rejection", ch.delayed_rejection},
        {"dr_scale", ch.dr_scale}}},
      {"likelihood",
       {{"sigma", c.inference.likelihood.sigma ? json(*c.inference.likelihood.sigma) : json(nullptr)},
        {"sigma_by_size", sigma_by_size},
        {"stride", c.inference.likelihood.stride}}},
      {"case",
       {{"label", c.inference.split.label},
        {"training", c.inference.split.training},
        {"testing", c.inference.split.testing}}},
      {"target", c.inference.target == CalibrationTarget::Gaussian ? "gaussian" : "sgp"},
      {"resume", c.inference.resume ? json(c.inference.resume->string()) : json(nullptr)},
      {"posterior", c.inference.posterior ? json(c.inference.posterior->string()) : json(nullptr)},
      {"n_draws", c.inference.n_draws}};
  return j.dump(2) + "\n";
}

}  // namespace sgpuq
