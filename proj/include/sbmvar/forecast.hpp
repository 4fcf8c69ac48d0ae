#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sbmvar/rng.hpp"
#include "sbmvar/types.hpp"

namespace sbmvar {

struct PathOptions {
  bool suppress_vol_innovations = false;  // volatilities follow their AR mean
  bool suppress_shocks = false;           // path equals the iterated conditional mean
};

/// Iterative h-step simulation from one retained draw. `history` holds the
/// observed sample (rows are time); at least n_lags rows are required.
/// Returns an h x M matrix of simulated futures.
MatrixXd simulate_path(const Draw& draw, const MatrixXd& history, int n_lags,
                       bool has_intercept, int h, Rng& rng,
                       const PathOptions& opts = {});

struct PredictiveMoments {
  VectorXd mean;
  MatrixXd cov;
};

/// Gaussian moments of y_{T+h} given one draw: intermediate observations and
/// volatilities (through T+h-1) are simulated, the terminal log-volatility is
/// advanced by its AR mean so that h=1 requires no simulation.
PredictiveMoments predictive_moments(const Draw& draw, const MatrixXd& history,
                                     int n_lags, bool has_intercept, int h, Rng& rng);

/// Log-density of the `subset` coordinates of `realized` under the Gaussian
/// with the given full-vector moments. Throws on a singular subset covariance.
double gaussian_subset_logdensity(const PredictiveMoments& m, const VectorXd& realized,
                                  const std::vector<int>& subset);

/// Order- and duplication-invariant log of the mean of exp(values).
double log_mean_exp(std::vector<double> values);

/// Rao-Blackwellized mixture estimator of the h-step log predictive density
/// of the given variable subset.
double log_predictive_density(const DrawStore& store, const MatrixXd& history,
                              const VectorXd& realized, const std::vector<int>& subset,
                              int h, Rng& rng);

struct ForecastModelSpec {
  std::string name;
  VarConfig config;
};

struct ScoreRow {
  int origin = 0;  // training-sample length used at this origin
  std::string model;
  std::string group;  // variable name, "FOCUS", or "ALL"
  int horizon = 1;
  double lpl = 0.0;
};

struct RecursiveResult {
  std::vector<ScoreRow> rows;
  std::vector<std::string> model_names;
  std::vector<std::string> group_names;
  std::vector<int> horizons;

  std::string scores_csv() const;  // long format: origin,model,group,horizon,lpl
  /// group x model table of mean scores; the baseline column is absolute,
  /// other models are reported as differences from it.
  std::string table_csv(const std::string& baseline) const;
  /// Long-format cumulative means of per-origin differences vs. the baseline.
  std::string cumulative_csv(const std::string& baseline) const;
};

/// Expanding-window evaluation: for each origin (training length from
/// eval_start up to rows-1) re-estimate every model on the initial segment
/// and score marginal LPLs for the focus variables plus joint FOCUS and ALL
/// groups at each horizon that fits in the sample.
RecursiveResult recursive_evaluation(const TimeSeriesPanel& panel,
                                     const std::vector<ForecastModelSpec>& models,
                                     int eval_start, const std::vector<int>& horizons,
                                     std::vector<std::string> focus_vars,
                                     std::uint64_t seed, int n_threads = 1);

}  // namespace sbmvar
