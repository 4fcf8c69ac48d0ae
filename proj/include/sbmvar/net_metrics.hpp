#pragma once

#include <vector>

#include "sbmvar/types.hpp"

namespace sbmvar {

VectorXi degrees(const MatrixXi& adjacency);
double average_degree(const MatrixXi& adjacency);

/// Modularity as an ordered-pair sum with d_i d_j / N null term and a 1/(2N)
/// prefactor, N = unordered edge count. The conventional d_i d_j/(2m)
/// normalization is available behind the flag.
double modularity(const MatrixXi& adjacency, const VectorXi& z, bool conventional = false);

/// Variation of information between two partitions, in nats.
double vi_distance(const VectorXi& za, const VectorXi& zb);

/// VI-minimizing point partition over the sampled support; ties broken by
/// fewer clusters, then first occurrence.
VectorXi point_partition(const std::vector<VectorXi>& draws);

struct NetworkSummary {
  int n_groups = 0;
  double modularity = 0.0;
  double average_degree = 0.0;
  VectorXi point_z;
  MatrixXi median_adjacency;
};

NetworkSummary summarize_network(const DrawStore& store);

}  // namespace sbmvar
