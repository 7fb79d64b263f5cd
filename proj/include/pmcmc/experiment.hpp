#pragma once

// Experiment plumbing for the linear-Gaussian study: configuration, synthetic
// data, single chains, the acceptance-vs-N grid and its report files.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "pmcmc/csmc.hpp"
#include "pmcmc/diagnostics.hpp"
#include "pmcmc/linear_gaussian.hpp"
#include "pmcmc/marginal.hpp"

namespace pmcmc {

inline const std::vector<std::string> kSamplerNames{"pmmh", "pgibbs", "mpgibbs", "ideal-mh",
                                                    "ideal-barker"};

struct ExperimentConfig {
  ThetaVector true_theta{0.9, 1.0, 1.0};
  std::size_t horizon = 99;  // T + 1 = 100 observations
  std::uint64_t data_seed = 3;
  InitialMode initial_mode = InitialMode::kStationary;
  std::string data_path;  // empty: simulate from true_theta and data_seed

  std::size_t iterations = 20000;
  std::size_t burn_in = 2000;
  std::string sampler = "mpgibbs";
  std::vector<std::string> samplers{"pmmh", "mpgibbs", "ideal-mh", "ideal-barker"};
  std::size_t n_particles = 64;
  std::vector<std::size_t> n_grid{8, 16, 32, 64, 128, 256};
  std::size_t m_params = 2;
  std::uint64_t seed = 1;
  std::size_t seeds = 3;
  double tau = 0.0225;
  MixtureVariant variant = MixtureVariant::kPosteriorMixture;
  TerminalSelection terminal_selection = TerminalSelection::kStandardCategorical;
  bool backward_sampling = true;
  std::size_t threads = 0;  // 0: hardware concurrency
  std::filesystem::path out = "out";

  /// Throws ConfigError on non-positive counts, burn_in >= iterations, an
  /// unknown sampler or a true theta outside the prior support.
  void validate() const;
  void use_full_scale();
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& c);

std::vector<double> simulate_observations(const ExperimentConfig& c);
std::vector<double> load_observations(const std::filesystem::path& csv);
void write_observations(const std::filesystem::path& csv, std::span<const double> y);
/// Observations from data_path when set, otherwise simulated.
std::vector<double> observations_for(const ExperimentConfig& c);

/// Writes data.csv and data.json (true theta, seed, horizon) into c.out.
void generate_data(const ExperimentConfig& c);

/// One chain of `c.iterations` steps for `sampler` with N particles, started
/// at true_theta. Kernel failures are rethrown with the iteration index.
std::vector<ChainRecord> run_chain(const ExperimentConfig& c, const std::string& sampler,
                                   std::size_t num_particles, std::span<const double> y,
                                   std::uint64_t seed);

void write_records(std::ostream& os, std::span<const ChainRecord> records);
std::vector<ChainRecord> read_records(std::istream& is);
nlohmann::json summary_json(const ChainSummary& s);

/// run subcommand: records.csv and summary.json in c.out.
ChainSummary run_sampler(const ExperimentConfig& c);

struct GridCell {
  std::string sampler;
  std::size_t n = 0;  // 0 for the exact-likelihood chains
  std::size_t m = 1;
  std::uint64_t seed = 0;
  std::uint64_t stream_seed = 0;
  ChainSummary summary;
  double wallclock_s = 0.0;
  std::string error;  // non-empty when the cell failed
};

std::vector<GridCell> grid_cells(const ExperimentConfig& c);
std::uint64_t cell_stream_seed(std::uint64_t seed, const std::string& sampler, std::size_t n,
                               std::size_t m);

/// Runs every cell across worker threads. Results are in cell order whatever
/// the schedule. Writes grid.csv, grid_summary.json and figure1.svg.
std::vector<GridCell> run_grid(const ExperimentConfig& c);

void write_grid_csv(std::ostream& os, std::span<const GridCell> cells);
std::vector<GridCell> read_grid_csv(std::istream& is);
nlohmann::json aggregate_grid(std::span<const GridCell> cells);
std::string figure_svg(std::span<const GridCell> cells);

}  // namespace pmcmc
