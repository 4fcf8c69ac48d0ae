#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace sbmvar {

class Rng;

enum class GibbsPriorKind { Gnedin, DirichletMultinomial, DirichletProcess, PitmanYor };

std::string to_string(GibbsPriorKind k);
GibbsPriorKind gibbs_prior_kind_from_string(const std::string& s);

/// One of the four Gibbs-type partition priors with its parameters.
struct GibbsPriorSpec {
  GibbsPriorKind kind = GibbsPriorKind::DirichletProcess;
  double gn_gamma = 0.5;        // GN: gamma in (0,1)
  double dm_beta = 1.0;         // DM: concentration > 0
  int dm_cap = 0;               // DM: population cluster cap H_bar (0 = set to M at use)
  double dp_alpha = 1.0;        // DP: concentration > 0
  double py_alpha = 1.0;        // PY: concentration > -discount
  double py_discount = 0.25;    // PY: discount in [0,1)

  static GibbsPriorSpec gnedin(double gamma);
  static GibbsPriorSpec dirichlet_multinomial(double beta, int cap);
  static GibbsPriorSpec dirichlet_process(double alpha);
  static GibbsPriorSpec pitman_yor(double alpha, double discount);

  void validate() const;
};

/// Unnormalized sequential allocation weights: existing clusters then the
/// new-cluster weight, given current cluster sizes and allocated count.
std::vector<double> predictive_weights_raw(const GibbsPriorSpec& spec,
                                           const std::vector<int>& cluster_sizes,
                                           int allocated);

/// Normalized allocation probabilities, length H+1; entry H is the
/// new-cluster probability.
std::vector<double> predictive_weights(const GibbsPriorSpec& spec,
                                       const std::vector<int>& cluster_sizes,
                                       int allocated);

/// Log prior probability of a labeled partition (contiguous labels 1..H),
/// computed as the product of sequential predictives.
double log_eppf(const GibbsPriorSpec& spec, const Eigen::VectorXi& z);

struct ExpectedClustersResult {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Monte Carlo estimate of E[H] under the prior for M nodes.
ExpectedClustersResult expected_clusters(const GibbsPriorSpec& spec, int m,
                                         int n_sims = 20000,
                                         std::uint64_t seed = 0xC0FFEE);

/// Exact E[H] for the Dirichlet process (harmonic sum).
double dp_expected_clusters_exact(double alpha, int m);

struct CalibrationResult {
  GibbsPriorSpec spec;
  double achieved = 0.0;
  int iterations = 0;
};

/// Bisection on the variant's free concentration parameter until
/// |E[H] - target| <= tol. Throws when the target is outside the
/// achievable bracket.
CalibrationResult calibrate(GibbsPriorKind kind, int m, double target_clusters,
                            double tol = 0.1, int max_iter = 60,
                            double py_discount = 0.25, int dm_cap = 0,
                            std::uint64_t seed = 0xC0FFEE);

}  // namespace sbmvar
