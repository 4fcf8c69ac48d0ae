#pragma once

#include <functional>

#include "sbmvar/model_core.hpp"
#include "sbmvar/rng.hpp"
#include "sbmvar/types.hpp"

namespace sbmvar {

struct EquationData {
  VectorXd y;  // Y^(j), (M-j+1)*T_eff entries (1-based j)
  MatrixXd x;  // X^(j), matching rows x K_eq
};

/// Triangularized single-equation regression for equation j (0-based).
/// Y^(j) = vec((Y - X A^[j=0]) B0_{j:M,.}') ./ vec(exp(d/2)),
/// X^(j) = (B0_{j:M,j} (x) X) ./ same divisor.
EquationData equation_transform(int j, const MatrixXd& y, const MatrixXd& x,
                                const MatrixXd& coeff_stacked, const MatrixXd& chol_lower,
                                const MatrixXd& log_vols);

struct GaussianMoments {
  VectorXd mean;
  MatrixXd cov;
};

/// Conjugate Gaussian regression posterior with a diagonal prior.
GaussianMoments coeff_posterior_moments(const VectorXd& y, const MatrixXd& x,
                                        const VectorXd& prior_mean,
                                        const VectorXd& prior_var);

struct VarData {
  MatrixXd y;  // effective sample, T_eff x M
  MatrixXd x;  // design, T_eff x K_eq
};

VarData make_var_data(const TimeSeriesPanel& panel, const VarConfig& config);

/// Step 1: equation-by-equation coefficient draw via triangularization.
/// Updates coefficients in place between equations.
VarCoefficients sample_coefficients(const ModelState& state, const VarData& data,
                                    const VarConfig& config, Rng& rng);

/// Step 2: horseshoe scales given the coefficient vector.
HorseshoeState horseshoe_update(const VectorXd& coeff_vec, const HorseshoeState& state,
                                Rng& rng);

/// Log conditional density (up to a constant) of one log-volatility site.
double logvol_conditional_logdensity(int j, int t, double candidate,
                                     const VolatilityState& vols, const MatrixXd& omega,
                                     const MatrixXd& residuals);

/// Analytic derivative of the same (used by tests and the MH proposal).
double logvol_conditional_gradient(int j, int t, double candidate,
                                   const VolatilityState& vols, const MatrixXd& omega,
                                   const MatrixXd& residuals);

struct LogvolSweepResult {
  VolatilityState state;
  double acceptance_rate = 0.0;
};

/// Step 3: single-move Metropolis-Hastings sweep over all (j, t) sites.
LogvolSweepResult sample_logvols(const VolatilityState& vols, const MatrixXd& omega,
                                 const MatrixXd& residuals, Rng& rng);

/// Step 3b: AR(1) parameters of the log-volatility paths.
void sample_ar_params(VolatilityState& vols, Rng& rng);

struct ColumnConditional {
  double gamma_shape;
  double gamma_rate;
  VectorXd normal_mean;
  MatrixXd normal_cov;
};

/// Step 4 parameters for one precision column (0-based j). `diag_rate` is an
/// optional exponential rate on the diagonal element (0 = flat); it enters the
/// gamma rate and the conditional covariance symmetrically.
ColumnConditional precision_column_params(int j, const MatrixXd& s, const MatrixXd& omega,
                                          const VectorXd& prior_var_col, int t_eff,
                                          double diag_rate = 0.0);

/// Step 4: column-wise precision draw; symmetrized, PD by construction.
MatrixXd sample_precision(const MatrixXd& s, const MatrixXd& omega, const MatrixXi& adjacency,
                          const MatrixXd& slab_vars, double spike_factor, int t_eff,
                          Rng& rng, double diag_rate = 0.0);

struct SweepDiagnostics {
  double sv_acceptance = 0.0;
  int n_clusters = 0;
};

/// One full Gibbs sweep (steps 1-7, fixed order).
SweepDiagnostics gibbs_sweep(ModelState& state, const VarData& data, const VarConfig& config,
                             Rng& rng);

ModelState initialize_state(const VarData& data, const VarConfig& config);

using ProgressFn = std::function<void(int iteration, int total)>;

/// Full chain: init, n_draws sweeps, thinned post-burn-in retention.
DrawStore run_chain(const TimeSeriesPanel& panel, const VarConfig& config,
                    const ProgressFn& progress = nullptr);

}  // namespace sbmvar
