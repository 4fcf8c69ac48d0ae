#include "sbmvar/net_metrics.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "sbmvar/dgp_sim.hpp"
#include "sbmvar/sbm.hpp"

namespace sbmvar {

VectorXi degrees(const MatrixXi& adjacency) {
  const int m = static_cast<int>(adjacency.rows());
  VectorXi d = VectorXi::Zero(m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      if (j != i && adjacency(i, j) == 1) d[i]++;
  return d;
}

double average_degree(const MatrixXi& adjacency) {
  VectorXi d = degrees(adjacency);
  return d.size() == 0 ? 0.0 : d.cast<double>().mean();
}

double modularity(const MatrixXi& adjacency, const VectorXi& z, bool conventional) {
  const int m = static_cast<int>(adjacency.rows());
  if (z.size() != m) throw std::invalid_argument("modularity: partition length mismatch");
  VectorXi deg = degrees(adjacency);
  double n_edges = deg.cast<double>().sum() / 2.0;
  if (n_edges == 0.0) return 0.0;
  double degree_norm = conventional ? 2.0 * n_edges : n_edges;
  double q = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      if (i == j || z[i] != z[j]) continue;
      q += adjacency(i, j) - static_cast<double>(deg[i]) * deg[j] / degree_norm;
    }
  return q / (2.0 * n_edges);
}

double vi_distance(const VectorXi& za, const VectorXi& zb) {
  const int m = static_cast<int>(za.size());
  if (zb.size() != m) throw std::invalid_argument("vi_distance: length mismatch");
  if (m == 0) return 0.0;
  std::map<int, int> ca, cb;
  std::map<std::pair<int, int>, int> joint;
  for (int i = 0; i < m; ++i) {
    ca[za[i]]++;
    cb[zb[i]]++;
    joint[{za[i], zb[i]}]++;
  }
  auto entropy = [m](const std::map<int, int>& counts) {
    double h = 0.0;
    for (const auto& [lab, n] : counts) {
      double p = static_cast<double>(n) / m;
      h -= p * std::log(p);
    }
    return h;
  };
  double mutual = 0.0;
  for (const auto& [labs, n] : joint) {
    double p = static_cast<double>(n) / m;
    double pa = static_cast<double>(ca[labs.first]) / m;
    double pb = static_cast<double>(cb[labs.second]) / m;
    mutual += p * std::log(p / (pa * pb));
  }
  double vi = entropy(ca) + entropy(cb) - 2.0 * mutual;
  return vi < 0.0 ? 0.0 : vi;  // clamp tiny negative rounding
}

VectorXi point_partition(const std::vector<VectorXi>& draws) {
  if (draws.empty()) throw std::invalid_argument("point_partition: empty draw list");

  // deduplicate canonical forms, keeping multiplicities and first-seen order
  std::vector<VectorXi> unique;
  std::vector<int> counts;
  for (const VectorXi& z : draws) {
    VectorXi c = canonicalize_labels(z);
    bool found = false;
    for (std::size_t i = 0; i < unique.size(); ++i)
      if (unique[i] == c) {
        counts[i]++;
        found = true;
        break;
      }
    if (!found) {
      unique.push_back(c);
      counts.push_back(1);
    }
  }

  // pairwise VI once per unique pair
  const std::size_t u = unique.size();
  MatrixXd vi = MatrixXd::Zero(u, u);
  for (std::size_t i = 0; i < u; ++i)
    for (std::size_t j = i + 1; j < u; ++j) {
      double d = vi_distance(unique[i], unique[j]);
      vi(i, j) = d;
      vi(j, i) = d;
    }

  double total = 0.0;
  for (int c : counts) total += c;
  std::size_t best = 0;
  double best_avg = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < u; ++i) {
    double avg = 0.0;
    for (std::size_t j = 0; j < u; ++j) avg += vi(i, j) * counts[j];
    avg /= total;
    bool better = avg < best_avg - 1e-12;
    bool tie = std::abs(avg - best_avg) <= 1e-12;
    if (better || (tie && unique[i].maxCoeff() < unique[best].maxCoeff())) {
      best = i;
      best_avg = avg;
    }
  }
  return unique[best];
}

NetworkSummary summarize_network(const DrawStore& store) {
  NetworkSummary s;
  s.median_adjacency = posterior_median_adjacency(store);
  std::vector<VectorXi> zs;
  zs.reserve(store.draws.size());
  for (const Draw& d : store.draws) zs.push_back(d.assignments);
  s.point_z = point_partition(zs);
  s.n_groups = s.point_z.maxCoeff();
  s.modularity = modularity(s.median_adjacency, s.point_z);
  s.average_degree = average_degree(s.median_adjacency);
  return s;
}

}  // namespace sbmvar
