#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sbmvar/partition_priors.hpp"

namespace sbmvar {

using Eigen::MatrixXd;
using Eigen::MatrixXi;
using Eigen::VectorXd;
using Eigen::VectorXi;

/// T x M observation matrix with variable metadata.
struct TimeSeriesPanel {
  MatrixXd values;                  // T x M
  std::vector<std::string> names;   // M identifiers
  std::vector<std::string> dates;   // optional, length T when present

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
  void validate() const;
};

/// Which prior governs the adjacency inclusion probabilities.
enum class ShrinkageMode {
  Sbm,          // full SBM: latent z, Pi
  SsvsFixed,    // fixed common inclusion probability, no SBM step
  NoShrinkage,  // adjacency fixed complete (all slabs)
};

struct VarConfig {
  int lags = 1;
  bool include_intercept = true;
  int n_draws = 15000;
  int burn_in = 5000;
  int thin = 2;
  std::uint64_t seed = 1;
  double spike_factor = 1.024e-2;  // c = 2.5^-5
  double precision_diag_rate = 0.0;  // optional exponential rate on omega_jj (0 = flat)
  double slab_shape = 5.0;         // a_tau
  double slab_rate = 4.0;          // b_tau
  double edge_beta_a = 1.0;        // a_pi
  double edge_beta_b = 1.0;        // b_pi
  GibbsPriorSpec partition_prior = GibbsPriorSpec::gnedin(0.5);
  ShrinkageMode mode = ShrinkageMode::Sbm;
  double fixed_inclusion_prob = 0.5;  // used in SsvsFixed mode
  bool randomize_sweep_order = false;
  bool store_full_logvol_paths = false;

  void validate() const;
};

/// VAR coefficients in both lag-matrix and stacked regression form.
/// The stacked matrix Phi is K_eq x M with column j holding equation j's
/// coefficients against the design row (y_{t-1}', ..., y_{t-P}'[, 1]).
struct VarCoefficients {
  std::vector<MatrixXd> lag;  // P matrices, M x M
  VectorXd intercept;         // length M (zero when disabled)
  bool has_intercept = false;

  static VarCoefficients zero(int m, int p, bool intercept);

  int n_vars() const { return lag.empty() ? 0 : static_cast<int>(lag[0].rows()); }
  int n_lags() const { return static_cast<int>(lag.size()); }
  int n_regressors() const { return n_vars() * n_lags() + (has_intercept ? 1 : 0); }

  MatrixXd stacked() const;                 // K_eq x M
  void set_stacked(const MatrixXd& phi);    // inverse of stacked()
  VectorXd vec() const;                     // column-major vec of stacked()
  void set_vec(const VectorXd& a, int m, int p, bool intercept);
  void intercept_resize(int m, bool enabled);
};

/// Log-volatility paths with their AR(1) parameters.
struct VolatilityState {
  MatrixXd log_vols;       // T_eff x M
  VectorXd persistence;    // rho_j, |rho| <= 0.99
  VectorXd innovation_var; // sigma^2_{rho,j} > 0

  void validate() const;
};

/// Precision matrix with its cached lower Cholesky factor.
struct PrecisionState {
  MatrixXd omega;
  MatrixXd chol_lower;

  explicit PrecisionState(const MatrixXd& om) { set(om); }
  PrecisionState() = default;

  /// Symmetrizes, factors, and caches; throws on non-PD after jitter.
  void set(const MatrixXd& om);
};

struct SpikeSlabState {
  MatrixXi adjacency;  // binary symmetric, zero diagonal
  MatrixXd slab_vars;  // tau^2, symmetric, off-diagonal entries meaningful

  void validate() const;
};

struct SbmState {
  VectorXi assignments;  // z, labels 1..H contiguous
  MatrixXd edge_probs;   // Pi, H x H symmetric in [0,1]

  int n_groups() const { return assignments.size() ? assignments.maxCoeff() : 0; }
  void validate() const;
};

struct HorseshoeState {
  VectorXd local_scale2;  // c^2_j, length K
  double global_scale2 = 1.0;
  VectorXd aux_local;     // nu_j
  double aux_global = 1.0;  // zeta

  static HorseshoeState ones(int k);
  void validate() const;
};

/// Full Gibbs state.
struct ModelState {
  VarCoefficients coeffs;
  HorseshoeState horseshoe;
  VolatilityState vols;
  PrecisionState precision;
  SpikeSlabState spike_slab;
  SbmState sbm;
};

/// One retained posterior draw: the pieces needed for forecasting and
/// network summaries (full log-vol paths optional).
struct Draw {
  VectorXd coeffs_vec;
  VectorXd last_log_vols;
  VectorXd persistence;
  VectorXd innovation_var;
  MatrixXd omega;
  MatrixXi adjacency;
  VectorXi assignments;
  MatrixXd edge_probs;
  std::optional<MatrixXd> log_vol_path;
};

struct DrawStore {
  std::vector<Draw> draws;
  int n_vars = 0;
  int n_lags = 0;
  bool has_intercept = false;
  std::uint64_t seed = 0;
  std::string config_hash;

  std::size_t size() const { return draws.size(); }
  void append(Draw d) { draws.push_back(std::move(d)); }
};

}  // namespace sbmvar
