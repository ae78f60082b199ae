// heckss: spike-and-slab variable selection for sample selection models.
//
//   heckss fit       --data FILE --out DIR [--config FILE] [options]
//   heckss simulate  --config FILE --out DIR [--seed N]
//   heckss stepwise  --data FILE --out DIR [--config FILE]
//   heckss summarize --draws FILE --out DIR [--data FILE] [--config FILE]

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <unistd.h>

#include "heckss/heckss.hpp"

namespace fs = std::filesystem;
using namespace heckss;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Options {
  std::string data, config, out, draws;
  std::optional<std::uint64_t> seed;
  bool no_standardize = false;
  std::optional<long> iterations, burn_in, thin;
  std::optional<int> prior_class;
  std::optional<std::string> family;
};

KeyValueConfig load_config(const Options& o) {
  KeyValueConfig cfg;
  if (!o.config.empty()) {
    std::ifstream in(o.config);
    if (!in) throw std::runtime_error("cannot open config file '" + o.config + "'");
    try {
      cfg = KeyValueConfig::parse(in);
    } catch (const ParseError& e) {
      throw std::runtime_error(o.config + ": " + e.what());
    }
  }
  cfg.require_known(known_config_keys());
  if (o.iterations) cfg.set("gibbs.iterations", std::to_string(*o.iterations));
  if (o.burn_in) cfg.set("gibbs.burn_in", std::to_string(*o.burn_in));
  if (o.thin) cfg.set("gibbs.thin", std::to_string(*o.thin));
  if (o.prior_class) cfg.set("prior.class", std::to_string(*o.prior_class));
  if (o.family) cfg.set("prior.family", *o.family);
  return cfg;
}

Dataset load_data(const std::string& path, const KeyValueConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open data file '" + path + "'");
  try {
    const DataTable t = read_table(in);
    return dataset_from_table(t, split_list(cfg.get_string("data.outcome", "")),
                              split_list(cfg.get_string("data.selection", "")));
  } catch (const ParseError& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

/// Outputs go to a sibling temporary directory that is renamed onto `out`
/// once complete, so an existing run is never partially overwritten.
class RunDirectory {
 public:
  explicit RunDirectory(const std::string& out) : out_(out) {
    if (out.empty()) throw std::runtime_error("--out is required");
    if (fs::exists(out_)) throw std::runtime_error("output directory '" + out + "' already exists");
    fs::path parent = out_.parent_path();
    if (parent.empty()) parent = ".";
    if (!fs::is_directory(parent)) throw std::runtime_error("parent of '" + out + "' is not a directory");
    tmp_ = parent / (out_.filename().string() + ".partial-" + std::to_string(::getpid()));
    fs::create_directory(tmp_);
  }
  ~RunDirectory() {
    if (!committed_) {
      std::error_code ec;
      fs::remove_all(tmp_, ec);
    }
  }
  std::ofstream open(const std::string& name) {
    files_.push_back(name);
    std::ofstream f(tmp_ / name);
    if (!f) throw std::runtime_error("cannot write " + (tmp_ / name).string());
    return f;
  }
  const std::vector<std::string>& files() const { return files_; }
  void commit() {
    fs::rename(tmp_, out_);
    committed_ = true;
  }

 private:
  fs::path out_, tmp_;
  std::vector<std::string> files_;
  bool committed_ = false;
};

void write_manifest(RunDirectory& dir, const std::string& command, const Options& o, std::uint64_t seed,
                    double wall_time, nlohmann::json extra = nlohmann::json::object()) {
  nlohmann::json m;
  m["command"] = command;
  m["config"] = o.config;
  m["seed"] = seed;
  m["inputs"] = nlohmann::json::object();
  if (!o.data.empty()) m["inputs"]["data"] = o.data;
  if (!o.draws.empty()) m["inputs"]["draws"] = o.draws;
  m["output"] = o.out;
  m["files"] = dir.files();
  m["version"] = kVersion;
  m["wall_time_seconds"] = wall_time;
  for (auto& [k, v] : extra.items()) m[k] = v;
  auto f = dir.open("manifest.json");
  f << m.dump(2) << '\n';
}

void emit_summary(RunDirectory& dir, const PosteriorSummary& s, const Dataset* data, Eigen::Index p,
                  Eigen::Index q) {
  std::vector<std::string> sn, on;
  if (data) {
    sn = data->selection_names();
    on = data->outcome_names();
  } else {
    for (Eigen::Index k = 1; k <= q; ++k) sn.push_back("alpha." + std::to_string(k));
    for (Eigen::Index j = 1; j <= p; ++j) on.push_back("beta." + std::to_string(j));
  }
  {
    auto f = dir.open("summary.txt");
    write_summary_table(f, s, sn, on);
  }
  {
    auto f = dir.open("summary.kv");
    write_summary_kv(f, s, sn, on);
  }
  {
    auto f = dir.open("models.tsv");
    write_model_table(f, s);
  }
}

int cmd_fit(const Options& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const KeyValueConfig cfg = load_config(o);
  Dataset data = load_data(o.data, cfg);
  const bool standardized = !o.no_standardize && cfg.get_string("data.standardize", "true") != "false";
  if (standardized) data = standardize(data);
  const PriorSpec prior = prior_from_config(cfg, data.n(), data.p(), data.q());
  GibbsConfig gc = gibbs_from_config(cfg);
  if (o.seed) gc.seed = *o.seed;
  RunDirectory dir(o.out);
  const ChainOutput chain = run_chain(data, prior, gc);
  {
    auto f = dir.open("draws.tsv");
    write_draws(f, chain);
  }
  emit_summary(dir, summarize(chain), &data, data.p(), data.q());
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_manifest(dir, "fit", o, gc.seed, wall,
                 {{"standardized", standardized},
                  {"iterations", gc.iterations},
                  {"burn_in", gc.burn_in},
                  {"thin", gc.thin},
                  {"mle_initialized", chain.mle_initialized},
                  {"chain_seconds", chain.wall_time}});
  dir.commit();
  std::cout << "wrote " << o.out << " (" << chain.draws.size() << " draws, " << chain.wall_time << " s)\n";
  return 0;
}

int cmd_simulate(const Options& o) {
  const auto t0 = std::chrono::steady_clock::now();
  KeyValueConfig cfg = load_config(o);
  if (o.iterations) cfg.set("scenario.iterations", std::to_string(*o.iterations));
  if (o.burn_in) cfg.set("scenario.burn_in", std::to_string(*o.burn_in));
  const ScenarioConfig sc = scenario_from_config(cfg);
  const std::uint64_t seed = o.seed ? *o.seed : static_cast<std::uint64_t>(cfg.get_long("scenario.seed", 1));
  RunDirectory dir(o.out);
  const ExperimentResult res = run_experiment(sc, seed);
  {
    auto f = dir.open("metrics.tsv");
    write_metrics_table(f, res);
  }
  {
    auto f = dir.open("errors.log");
    for (const auto& [m, r] : res.methods) {
      for (const auto& e : r.errors) f << method_name(m) << ": " << e << '\n';
    }
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_manifest(dir, "simulate", o, seed, wall,
                 {{"replicates", sc.replicates}, {"alpha0", res.alpha0}, {"mean_missing", res.mean_missing}});
  dir.commit();
  std::cout << "wrote " << o.out << '\n';
  return 0;
}

int cmd_stepwise(const Options& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const KeyValueConfig cfg = load_config(o);
  const Dataset data = load_data(o.data, cfg);
  RunDirectory dir(o.out);
  const StepwiseTrace trace = forward_stepwise(data);
  {
    auto f = dir.open("trace.txt");
    write_trace(f, trace, data);
  }
  {
    auto f = dir.open("fit.kv");
    const FitResult& fit = trace.final_fit;
    f << std::setprecision(17);
    f << "loglik = " << fit.loglik << "\nconverged = " << (fit.converged ? "true" : "false") << '\n';
    f << "model = " << trace.final_model.label() << '\n';
    f << "alpha0 = " << fit.params.alpha0 << '\n';
    Eigen::Index k = 0;
    for (std::size_t c = 0; c < trace.final_model.included_S.size(); ++c) {
      if (trace.final_model.included_S[c]) f << "selection." << data.selection_names()[c] << " = " << fit.params.alpha[k++] << '\n';
    }
    f << "beta0 = " << fit.params.beta0 << '\n';
    k = 0;
    for (std::size_t c = 0; c < trace.final_model.included_O.size(); ++c) {
      if (trace.final_model.included_O[c]) f << "outcome." << data.outcome_names()[c] << " = " << fit.params.beta[k++] << '\n';
    }
    f << "sigma = " << fit.params.sigma << "\nrho = " << fit.params.rho << '\n';
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_manifest(dir, "stepwise", o, 0, wall, {{"steps", trace.steps.size()}});
  dir.commit();
  std::cout << "wrote " << o.out << " (" << trace.steps.size() << " steps)\n";
  return 0;
}

int cmd_summarize(const Options& o) {
  const auto t0 = std::chrono::steady_clock::now();
  std::ifstream in(o.draws);
  if (!in) throw std::runtime_error("cannot open draw file '" + o.draws + "'");
  ChainOutput chain;
  try {
    chain = read_draws(in);
  } catch (const ParseError& e) {
    throw std::runtime_error(o.draws + ": " + e.what());
  }
  std::optional<Dataset> data;
  if (!o.data.empty()) {
    data.emplace(load_data(o.data, load_config(o)));
    if (data->p() != chain.p || data->q() != chain.q) {
      throw std::runtime_error("data columns do not match the draw file dimensions");
    }
  }
  RunDirectory dir(o.out);
  emit_summary(dir, summarize(chain), data ? &*data : nullptr, chain.p, chain.q);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_manifest(dir, "summarize", o, 0, wall, {{"draws", chain.draws.size()}});
  dir.commit();
  std::cout << "wrote " << o.out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spike-and-slab variable selection for sample selection models"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "key = value configuration file")->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "output directory (must not exist)")->required();
  };
  auto chain_flags = [&](CLI::App* sub) {
    sub->add_option("--seed", o.seed, "random seed");
    sub->add_option("--iterations", o.iterations, "Gibbs iterations");
    sub->add_option("--burn-in", o.burn_in, "discarded initial iterations");
    sub->add_option("--thin", o.thin, "keep every thin-th draw");
    sub->add_option("--prior-class", o.prior_class, "prior class")->check(CLI::IsMember({1, 2}));
    sub->add_option("--family", o.family, "spike/slab family")
        ->check(CLI::IsMember({"normal", "laplace", "student-t"}));
  };

  auto* fit = app.add_subcommand("fit", "run the Gibbs sampler on a data file");
  fit->add_option("--data", o.data, "delimited data file with columns s and y")->required()->check(CLI::ExistingFile);
  common(fit);
  chain_flags(fit);
  fit->add_flag("--no-standardize", o.no_standardize, "use covariates as given");

  auto* sim = app.add_subcommand("simulate", "run a replicated simulation scenario");
  common(sim);
  chain_flags(sim);

  auto* step = app.add_subcommand("stepwise", "forward stepwise AIC selection");
  step->add_option("--data", o.data, "delimited data file with columns s and y")->required()->check(CLI::ExistingFile);
  common(step);

  auto* summ = app.add_subcommand("summarize", "summarize an existing draw file");
  summ->add_option("--draws", o.draws, "draw file written by fit")->required()->check(CLI::ExistingFile);
  summ->add_option("--data", o.data, "data file supplying covariate names")->check(CLI::ExistingFile);
  common(summ);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*fit) return cmd_fit(o);
    if (*sim) return cmd_simulate(o);
    if (*step) return cmd_stepwise(o);
    if (*summ) return cmd_summarize(o);
  } catch (const std::exception& e) {
    std::cerr << "heckss: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
