// Command-line front end: generate-data, run, grid, analyze.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "pmcmc/experiment.hpp"

namespace {

using pmcmc::ExperimentConfig;

struct Overrides {
  std::string config;
  std::optional<std::string> sampler, variant, terminal, out, data;
  std::optional<std::size_t> n_particles, m_params, iterations, burn_in, seeds, threads, horizon;
  std::optional<std::uint64_t> seed, data_seed;
  std::optional<double> tau, rho, sigma2_x, sigma2_y;
  std::optional<bool> backward;
  bool paper_scale = false;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "JSON experiment configuration")->check(CLI::ExistingFile);
    app->add_option("--sampler", sampler, "pmmh, pgibbs, mpgibbs, ideal-mh or ideal-barker");
    app->add_option("--n-particles", n_particles, "Number of particles N");
    app->add_option("--m-params", m_params, "Number of parameter proposals M for mpgibbs");
    app->add_option("--iterations", iterations, "MCMC iterations");
    app->add_option("--burn-in", burn_in, "Iterations discarded before summaries");
    app->add_option("--seed", seed, "Chain seed (first seed for grids)");
    app->add_option("--seeds", seeds, "Seeds per grid cell");
    app->add_option("--tau", tau, "Random-walk variance");
    app->add_option("--variant", variant, "Mixture proposal: prior, posterior or closed-form");
    app->add_option("--terminal-selection", terminal, "standard or forced-move");
    app->add_option("--backward-sampling", backward, "Backward sampling in CSMC (true/false)");
    app->add_option("--out", out, "Output directory");
    app->add_option("--data", data, "Observation CSV with header t,y");
    app->add_option("--data-seed", data_seed, "Seed for simulated data");
    app->add_option("--horizon", horizon, "Horizon T of simulated data (T+1 observations)");
    app->add_option("--rho", rho, "True rho for simulated data");
    app->add_option("--sigma2-x", sigma2_x, "True state noise variance for simulated data");
    app->add_option("--sigma2-y", sigma2_y, "True observation noise variance for simulated data");
    app->add_option("--threads", threads, "Worker threads for grid (0: all cores)");
    app->add_flag("--paper-scale", paper_scale, "100000 iterations with 10000 burn-in");
  }

  ExperimentConfig resolve() const {
    ExperimentConfig c;
    if (!config.empty()) {
      std::ifstream is(config);
      c = pmcmc::config_from_json(nlohmann::json::parse(is));
    }
    if (paper_scale) c.use_full_scale();
    if (sampler) c.sampler = *sampler, c.samplers = {*sampler};
    if (variant) c.variant = pmcmc::parse_mixture_variant(*variant);
    if (terminal) c.terminal_selection = pmcmc::parse_terminal_selection(*terminal);
    if (out) c.out = *out;
    if (data) c.data_path = *data;
    if (n_particles) c.n_particles = *n_particles, c.n_grid = {*n_particles};
    if (m_params) c.m_params = *m_params;
    if (iterations) c.iterations = *iterations;
    if (burn_in) c.burn_in = *burn_in;
    if (seeds) c.seeds = *seeds;
    if (threads) c.threads = *threads;
    if (horizon) c.horizon = *horizon;
    if (seed) c.seed = *seed;
    if (data_seed) c.data_seed = *data_seed;
    if (tau) c.tau = *tau;
    if (rho) c.true_theta.rho = *rho;
    if (sigma2_x) c.true_theta.sigma2_x = *sigma2_x;
    if (sigma2_y) c.true_theta.sigma2_y = *sigma2_y;
    if (backward) c.backward_sampling = *backward;
    return c;
  }
};

void print_summary(const std::string& label, const pmcmc::ChainSummary& s) {
  std::cout << label << ": acceptance " << s.acceptance_rate << ", ess_min " << s.ess_min()
            << " over " << s.retained << " retained iterations\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Particle MCMC experiments on a linear-Gaussian state-space model"};
  app.require_subcommand(1);

  Overrides gen_o, run_o, grid_o;
  auto* gen = app.add_subcommand("generate-data", "Simulate observations to data.csv");
  gen_o.attach(gen);
  auto* run = app.add_subcommand("run", "Run one sampler; writes records.csv and summary.json");
  run_o.attach(run);
  auto* grid = app.add_subcommand("grid", "Acceptance-vs-N grid; writes grid.csv and figure1.svg");
  grid_o.attach(grid);

  auto* analyze = app.add_subcommand("analyze", "Summarize a records.csv or grid.csv file");
  std::string input;
  std::size_t analyze_burn_in = 0;
  analyze->add_option("input", input, "records.csv or grid.csv")->required()->check(CLI::ExistingFile);
  analyze->add_option("--burn-in", analyze_burn_in, "Iterations discarded (records only)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      const auto c = gen_o.resolve();
      pmcmc::generate_data(c);
      std::cout << "wrote " << (c.out / "data.csv").string() << '\n';
    } else if (*run) {
      const auto c = run_o.resolve();
      print_summary(c.sampler, pmcmc::run_sampler(c));
    } else if (*grid) {
      const auto c = grid_o.resolve();
      const auto cells = pmcmc::run_grid(c);
      std::cout << pmcmc::aggregate_grid(cells).dump(2) << '\n';
      for (const auto& cell : cells)
        if (!cell.error.empty())
          std::cerr << "cell " << cell.sampler << " n=" << cell.n << " seed=" << cell.seed
                    << " failed: " << cell.error << '\n';
    } else if (*analyze) {
      std::ifstream is(input);
      std::string header;
      std::getline(is, header);
      is.seekg(0);
      if (header.rfind("sampler,", 0) == 0) {
        std::cout << pmcmc::aggregate_grid(pmcmc::read_grid_csv(is)).dump(2) << '\n';
      } else {
        const auto records = pmcmc::read_records(is);
        std::cout << pmcmc::summary_json(pmcmc::summarize(records, analyze_burn_in)).dump(2)
                  << '\n';
      }
    }
  } catch (const pmcmc::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
