#include "sbmvar/sbm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sbmvar/stats.hpp"

namespace sbmvar {

MatrixXd edge_prob_matrix(const VectorXi& z, const MatrixXd& pi) {
  const int m = static_cast<int>(z.size());
  const int h = static_cast<int>(pi.rows());
  MatrixXd out(m, m);
  for (int i = 0; i < m; ++i) {
    if (z[i] < 1 || z[i] > h) throw std::invalid_argument("edge_prob_matrix: label out of range");
    for (int j = 0; j < m; ++j) out(i, j) = pi(z[i] - 1, z[j] - 1);
  }
  return out;
}

double inclusion_probability(double omega, double tau2, double spike_factor,
                             double prior_prob) {
  if (!(tau2 > 0.0)) throw std::invalid_argument("inclusion_probability: tau^2 must be positive");
  if (prior_prob <= 0.0) return 0.0;
  if (prior_prob >= 1.0) return 1.0;
  double log_slab = norm_logpdf(omega, 0.0, tau2) + std::log(prior_prob);
  double log_spike = norm_logpdf(omega, 0.0, spike_factor * tau2) + std::log(1.0 - prior_prob);
  // p = 1 / (1 + exp(log_spike - log_slab))
  double d = log_spike - log_slab;
  if (d > 700.0) return 0.0;
  return 1.0 / (1.0 + std::exp(d));
}

MatrixXi sample_adjacency(const MatrixXd& omega, const MatrixXd& slab_vars,
                          double spike_factor, const VectorXi& z, const MatrixXd& pi,
                          Rng& rng) {
  const int m = static_cast<int>(omega.rows());
  MatrixXd probs = edge_prob_matrix(z, pi);
  MatrixXi delta = MatrixXi::Zero(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      double p = inclusion_probability(omega(i, j), slab_vars(i, j), spike_factor, probs(i, j));
      int d = rng.bernoulli(p) ? 1 : 0;
      delta(i, j) = d;
      delta(j, i) = d;
    }
  return delta;
}

GammaParams slab_posterior_params(double omega, int delta, double slab_shape,
                                  double slab_rate, double spike_factor) {
  double denom = delta == 1 ? 1.0 : spike_factor;
  return {slab_shape + 0.5, slab_rate + omega * omega / (2.0 * denom)};
}

MatrixXd sample_slab_variances(const MatrixXd& omega, const MatrixXi& adjacency,
                               const MatrixXd& previous, double slab_shape,
                               double slab_rate, double spike_factor, Rng& rng) {
  const int m = static_cast<int>(omega.rows());
  MatrixXd tau2 = previous;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      GammaParams p = slab_posterior_params(omega(i, j), adjacency(i, j), slab_shape,
                                            slab_rate, spike_factor);
      double draw = rng.inv_gamma(p.shape, p.rate);
      tau2(i, j) = draw;
      tau2(j, i) = draw;
    }
  return tau2;
}

EdgeCounts edge_counts(const MatrixXi& adjacency, const VectorXi& z) {
  const int m = static_cast<int>(z.size());
  const int h = z.size() ? z.maxCoeff() : 0;
  EdgeCounts out{MatrixXd::Zero(h, h), MatrixXd::Zero(h, h)};
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      int a = z[i] - 1, b = z[j] - 1;
      if (a > b) std::swap(a, b);
      if (adjacency(i, j) == 1)
        out.edges(a, b) += 1.0;
      else
        out.non_edges(a, b) += 1.0;
    }
  // mirror for convenience
  for (int a = 0; a < h; ++a)
    for (int b = a + 1; b < h; ++b) {
      out.edges(b, a) = out.edges(a, b);
      out.non_edges(b, a) = out.non_edges(a, b);
    }
  return out;
}

MatrixXd sample_edge_probs(const MatrixXi& adjacency, const VectorXi& z, double a_pi,
                           double b_pi, Rng& rng) {
  EdgeCounts counts = edge_counts(adjacency, z);
  const int h = static_cast<int>(counts.edges.rows());
  MatrixXd pi(h, h);
  for (int a = 0; a < h; ++a)
    for (int b = a; b < h; ++b) {
      double draw = rng.beta(a_pi + counts.edges(a, b), b_pi + counts.non_edges(a, b));
      pi(a, b) = draw;
      pi(b, a) = draw;
    }
  return pi;
}

double adjacency_log_likelihood(const MatrixXi& adjacency, const VectorXi& z,
                                const MatrixXd& pi) {
  EdgeCounts counts = edge_counts(adjacency, z);
  const int h = static_cast<int>(counts.edges.rows());
  double logp = 0.0;
  for (int a = 0; a < h; ++a)
    for (int b = a; b < h; ++b) {
      double p = pi(a, b);
      double m1 = counts.edges(a, b), m0 = counts.non_edges(a, b);
      if ((p <= 0.0 && m1 > 0.0) || (p >= 1.0 && m0 > 0.0))
        return -std::numeric_limits<double>::infinity();
      if (m1 > 0.0) logp += m1 * std::log(p);
      if (m0 > 0.0) logp += m0 * std::log1p(-p);
    }
  return logp;
}

VectorXi canonicalize_labels(const VectorXi& z) {
  const int m = static_cast<int>(z.size());
  int h = m ? z.maxCoeff() : 0;
  std::vector<int> relabel(h, 0);
  int next = 0;
  VectorXi out(m);
  for (int i = 0; i < m; ++i) {
    int lab = z[i] - 1;
    if (relabel[lab] == 0) relabel[lab] = ++next;
    out[i] = relabel[lab];
  }
  return out;
}

std::vector<double> esbm_node_log_weights(const MatrixXi& adjacency, const VectorXi& z,
                                          int node, const GibbsPriorSpec& spec,
                                          double a_pi, double b_pi) {
  const int m = static_cast<int>(z.size());

  // partition with node removed, relabeled contiguously
  std::vector<int> sizes;         // n_h^-
  std::vector<int> label_map;     // old label -> compact index
  label_map.assign(z.maxCoeff(), -1);
  std::vector<int> compact(m, -1);
  for (int i = 0; i < m; ++i) {
    if (i == node) continue;
    int lab = z[i] - 1;
    if (label_map[lab] < 0) {
      label_map[lab] = static_cast<int>(sizes.size());
      sizes.push_back(0);
    }
    compact[i] = label_map[lab];
    sizes[compact[i]]++;
  }
  const int h_minus = static_cast<int>(sizes.size());

  // edge / non-edge counts excluding the node, and the node's link counts
  MatrixXd m_edge = MatrixXd::Zero(h_minus, h_minus);
  MatrixXd m_non = MatrixXd::Zero(h_minus, h_minus);
  for (int i = 0; i < m; ++i) {
    if (i == node) continue;
    for (int j = i + 1; j < m; ++j) {
      if (j == node) continue;
      int a = compact[i], b = compact[j];
      if (a > b) std::swap(a, b);
      if (adjacency(i, j) == 1)
        m_edge(a, b) += 1.0;
      else
        m_non(a, b) += 1.0;
    }
  }
  std::vector<double> r(h_minus, 0.0), rbar(h_minus, 0.0);
  for (int k = 0; k < m; ++k) {
    if (k == node) continue;
    int c = compact[k];
    if (adjacency(node, k) == 1)
      r[c] += 1.0;
    else
      rbar[c] += 1.0;
  }

  GibbsPriorSpec use = spec;
  if (use.kind == GibbsPriorKind::DirichletMultinomial && use.dm_cap <= 0) use.dm_cap = m;
  std::vector<double> prior_w = predictive_weights_raw(use, sizes, m - 1);

  std::vector<double> log_w(h_minus + 1, -std::numeric_limits<double>::infinity());
  for (int h = 0; h <= h_minus; ++h) {
    if (!(prior_w[h] > 0.0)) continue;
    double lw = std::log(prior_w[h]);
    for (int k = 0; k < h_minus; ++k) {
      double me = h < h_minus ? m_edge(std::min(h, k), std::max(h, k)) : 0.0;
      double mn = h < h_minus ? m_non(std::min(h, k), std::max(h, k)) : 0.0;
      lw += log_beta(a_pi + me + r[k], b_pi + mn + rbar[k]) - log_beta(a_pi + me, b_pi + mn);
    }
    log_w[h] = lw;
  }
  return log_w;
}

VectorXi esbm_update_assignments(const MatrixXi& adjacency, const VectorXi& z,
                                 const GibbsPriorSpec& spec, double a_pi, double b_pi,
                                 Rng& rng, bool randomize_order) {
  const int m = static_cast<int>(z.size());
  VectorXi cur = canonicalize_labels(z);

  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  if (randomize_order)
    for (int i = m - 1; i > 0; --i)
      std::swap(order[i], order[static_cast<int>(rng.uniform() * (i + 1))]);

  for (int node : order) {
    std::vector<double> log_w = esbm_node_log_weights(adjacency, cur, node, spec, a_pi, b_pi);
    int pick = rng.categorical_log(log_w);

    // rebuild labels: compact the partition without the node, then insert
    int h = cur.maxCoeff();
    std::vector<int> label_map(h, -1);
    int next = 0;
    VectorXi updated = cur;
    for (int i = 0; i < m; ++i) {
      if (i == node) continue;
      int lab = cur[i] - 1;
      if (label_map[lab] < 0) label_map[lab] = next++;
      updated[i] = label_map[lab] + 1;
    }
    updated[node] = pick + 1;  // pick == next means a new cluster
    cur = updated;
  }
  return canonicalize_labels(cur);
}

}  // namespace sbmvar
