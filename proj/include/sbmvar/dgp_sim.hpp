#pragma once

#include <string>
#include <vector>

#include "sbmvar/rng.hpp"
#include "sbmvar/types.hpp"

namespace sbmvar {

struct BetaParams {
  double a;
  double b;
};

struct TrueNetwork {
  VectorXi assignments;
  MatrixXi adjacency;
};

/// Clustered network DGP: balanced groups, per-group within probability and
/// per-pair cross probability drawn from the given Betas.
TrueNetwork sample_true_network(int m, int h_true, BetaParams beta_within,
                                BetaParams beta_cross, Rng& rng);

/// Diagonally dominant precision matrix whose zero pattern matches the
/// adjacency exactly; nonzero off-diagonals uniform on +-[0.1, 0.3].
MatrixXd precision_from_adjacency(const MatrixXi& adjacency, Rng& rng);

/// Random coefficients with companion spectral radius capped at 0.9
/// (rescaled to 0.8 when exceeded).
VarCoefficients random_stable_coefficients(int m, int p, Rng& rng);

/// Simulate a VAR path with AR(1) stochastic volatility; y_0 = 0, d_0 = 0.
TimeSeriesPanel simulate_var(const VarCoefficients& coeffs, const MatrixXd& omega, int t,
                             double sv_rho, double sv_var, Rng& rng);

/// Percentage of correctly classified unordered off-diagonal pairs.
double hit_rate(const MatrixXi& estimated, const MatrixXi& truth);

/// Edge present iff posterior inclusion frequency > 0.5.
MatrixXi posterior_median_adjacency(const DrawStore& store);

struct SimulationGridSpec {
  std::vector<int> sizes;       // M
  std::vector<int> lengths;     // T
  bool clustered = true;
  double unclustered_edge_prob = 0.2;
  std::vector<GibbsPriorKind> prior_variants;
  bool include_ssvs_baseline = true;
  int replications = 25;
  int h_true_small = 2, h_true_medium = 3, h_true_large = 4;
  BetaParams beta_within{100.0, 1.0};  // homophilous defaults
  BetaParams beta_cross{1.0, 100.0};
  double prior_cluster_multiple = 1.5;
  VarConfig chain_config;  // lags/draws/spike etc. shared across cells
  std::uint64_t master_seed = 1;
  int threads = 1;
};

struct SimulationCellResult {
  int m = 0;
  int t = 0;
  std::string model;  // GN/DM/DP/PY/SSVS
  double mean_hit_rate = 0.0;
  int completed = 0;
  int failed = 0;
};

int true_group_count(const SimulationGridSpec& spec, int m);

/// The full replication grid; rows per (cell, model).
std::vector<SimulationCellResult> run_simulation_grid(const SimulationGridSpec& spec);

/// CSV in the hit-rate table layout (models as columns, SSVS absolute).
std::string simulation_results_csv(const std::vector<SimulationCellResult>& results);

}  // namespace sbmvar
