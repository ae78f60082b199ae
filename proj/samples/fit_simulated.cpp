// Simulate one dataset from the standard scenario, run a short chain and
// print the posterior summary next to the truth.

#include <iostream>

#include "heckss/heckss.hpp"

int main(int argc, char** argv) {
  using namespace heckss;
  const std::uint64_t seed = argc > 1 ? std::stoull(argv[1]) : 7;

  ScenarioConfig cfg = ScenarioConfig::standard(500, 6, 0.5);
  RngStream rng(seed, 0);
  const Eigen::MatrixXd W = gen_covariates(cfg.n, cfg.p, rng);
  const Dataset data = gen_dataset(cfg, W, rng);
  std::cout << "observed " << data.n_observed() << " of " << data.n() << " outcomes\n";

  const PriorSpec prior = default_calibration(data.n(), data.p(), data.q(), Family::Normal,
                                              CalibrationContext::Simulation);
  GibbsConfig gc;
  gc.iterations = 3000;
  gc.burn_in = 500;
  gc.seed = seed;
  const ChainOutput chain = run_chain(data, prior, gc);
  const PosteriorSummary s = summarize(chain);
  write_summary_table(std::cout, s, data.selection_names(), data.outcome_names());

  std::cout << "\nmedian model " << median_model(s).label() << "\ntrue model   " << cfg.truth().label() << '\n';
  std::cout << "chain time " << chain.wall_time << " s\n";
  return 0;
}
