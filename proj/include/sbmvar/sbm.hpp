#pragma once

#include "sbmvar/rng.hpp"
#include "sbmvar/types.hpp"

namespace sbmvar {

/// Node-pair prior inclusion probabilities pi_{z_i, z_j} as an M x M matrix.
MatrixXd edge_prob_matrix(const VectorXi& z, const MatrixXd& pi);

/// Posterior probability that an off-diagonal precision element sits in the
/// slab component; computed in log space.
double inclusion_probability(double omega, double tau2, double spike_factor,
                             double prior_prob);

/// One Bernoulli draw per unordered pair, mirrored; zero diagonal.
MatrixXi sample_adjacency(const MatrixXd& omega, const MatrixXd& slab_vars,
                          double spike_factor, const VectorXi& z, const MatrixXd& pi,
                          Rng& rng);

struct GammaParams {
  double shape;
  double rate;
};

/// Inverse-gamma posterior parameters for one slab variance.
GammaParams slab_posterior_params(double omega, int delta, double slab_shape,
                                  double slab_rate, double spike_factor);

/// Fresh tau^2 matrix; off-diagonal pairs drawn once and mirrored,
/// diagonal copied from the previous state.
MatrixXd sample_slab_variances(const MatrixXd& omega, const MatrixXi& adjacency,
                               const MatrixXd& previous, double slab_shape,
                               double slab_rate, double spike_factor, Rng& rng);

struct EdgeCounts {
  MatrixXd edges;      // m_{h,k}
  MatrixXd non_edges;  // m-bar_{h,k}
};

/// Unordered-pair edge and non-edge counts between groups.
EdgeCounts edge_counts(const MatrixXi& adjacency, const VectorXi& z);

/// Beta draws for the group-pair edge probabilities.
MatrixXd sample_edge_probs(const MatrixXi& adjacency, const VectorXi& z, double a_pi,
                           double b_pi, Rng& rng);

/// log p(adjacency | z, Pi); -inf when a degenerate probability conflicts
/// with the observed counts.
double adjacency_log_likelihood(const MatrixXi& adjacency, const VectorXi& z,
                                const MatrixXd& pi);

/// Collapsed categorical weights (log scale) for reassigning node j given the
/// rest of the partition; exposed for the equivariance tests.
std::vector<double> esbm_node_log_weights(const MatrixXi& adjacency, const VectorXi& z,
                                          int node, const GibbsPriorSpec& spec,
                                          double a_pi, double b_pi);

/// One full collapsed Gibbs sweep over nodes 1..M with Pi marginalized out;
/// output labels are contiguous, canonicalized by first appearance.
VectorXi esbm_update_assignments(const MatrixXi& adjacency, const VectorXi& z,
                                 const GibbsPriorSpec& spec, double a_pi, double b_pi,
                                 Rng& rng, bool randomize_order = false);

/// Relabel clusters by order of first appearance.
VectorXi canonicalize_labels(const VectorXi& z);

}  // namespace sbmvar
