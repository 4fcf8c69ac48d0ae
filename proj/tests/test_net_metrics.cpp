#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

#include "sbmvar/dgp_sim.hpp"
#include "sbmvar/net_metrics.hpp"
#include "sbmvar/rng.hpp"
#include "sbmvar/sbm.hpp"

using namespace sbmvar;

namespace {

MatrixXi from_edges(int m, const std::vector<std::pair<int, int>>& edges) {
  MatrixXi a = MatrixXi::Zero(m, m);
  for (auto [i, j] : edges) {
    a(i, j) = 1;
    a(j, i) = 1;
  }
  return a;
}

// brute-force modularity straight from the ordered-pair definition
double modularity_brute(const MatrixXi& a, const VectorXi& z, bool conventional) {
  const int m = static_cast<int>(a.rows());
  double n_edges = 0.0;
  VectorXd deg = VectorXd::Zero(m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      if (i == j) continue;
      deg[i] += a(i, j);
      if (i < j) n_edges += a(i, j);
    }
  if (n_edges == 0.0) return 0.0;
  double norm = conventional ? 2.0 * n_edges : n_edges;
  double q = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      if (i == j || z[i] != z[j]) continue;
      q += a(i, j) - deg[i] * deg[j] / norm;
    }
  return q / (2.0 * n_edges);
}

// brute-force VI from joint cluster frequencies
double vi_brute(const VectorXi& za, const VectorXi& zb) {
  const int m = static_cast<int>(za.size());
  std::map<int, double> pa, pb;
  std::map<std::pair<int, int>, double> pj;
  for (int i = 0; i < m; ++i) {
    pa[za[i]] += 1.0 / m;
    pb[zb[i]] += 1.0 / m;
    pj[{za[i], zb[i]}] += 1.0 / m;
  }
  double ha = 0.0, hb = 0.0, mi = 0.0;
  for (auto& [k, p] : pa) ha -= p * std::log(p);
  for (auto& [k, p] : pb) hb -= p * std::log(p);
  for (auto& [k, p] : pj) mi += p * std::log(p / (pa[k.first] * pb[k.second]));
  return std::max(0.0, ha + hb - 2.0 * mi);
}

VectorXi make_z(std::initializer_list<int> v) {
  VectorXi z(static_cast<int>(v.size()));
  int i = 0;
  for (int x : v) z[i++] = x;
  return z;
}

}  // namespace

TEST_CASE("degrees and average degree on hand graphs") {
  MatrixXi a = from_edges(4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}});  // 4-cycle
  VectorXi d = degrees(a);
  for (int i = 0; i < 4; ++i) CHECK(d[i] == 2);
  CHECK(average_degree(a) == doctest::Approx(2.0));

  MatrixXi star = from_edges(4, {{0, 1}, {0, 2}, {0, 3}});
  VectorXi ds = degrees(star);
  CHECK(ds[0] == 3);
  CHECK(ds[1] == 1);
  CHECK(average_degree(star) == doctest::Approx(1.5));
}

TEST_CASE("modularity hand case: two disjoint edges, matching partition gives 0.5") {
  MatrixXi a = from_edges(4, {{0, 1}, {2, 3}});
  VectorXi z = make_z({1, 1, 2, 2});
  CHECK(modularity(a, z) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("modularity edge cases") {
  MatrixXi empty = MatrixXi::Zero(5, 5);
  VectorXi z = VectorXi::Ones(5);
  CHECK(modularity(empty, z) == 0.0);

  // all nodes in one group: ordered-pair form with N normalization
  MatrixXi a = from_edges(3, {{0, 1}, {1, 2}});
  VectorXi one = VectorXi::Ones(3);
  CHECK(modularity(a, one) == doctest::Approx(modularity_brute(a, one, false)).epsilon(1e-14));

  // all singleton groups: the i != j sum is empty
  VectorXi singles = make_z({1, 2, 3});
  CHECK(modularity(a, singles) == doctest::Approx(0.0));
}

TEST_CASE("modularity matches the brute-force definition on random graphs") {
  Rng rng(11);
  for (int rep = 0; rep < 1000; ++rep) {
    int m = 2 + static_cast<int>(rng.uniform() * 7);  // up to 8
    MatrixXi a = MatrixXi::Zero(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j)
        if (rng.bernoulli(0.4)) {
          a(i, j) = 1;
          a(j, i) = 1;
        }
    VectorXi z(m);
    for (int i = 0; i < m; ++i) z[i] = 1 + static_cast<int>(rng.uniform() * 3);
    CHECK(modularity(a, z, false) == modularity_brute(a, z, false));
    CHECK(modularity(a, z, true) == modularity_brute(a, z, true));
  }
}

TEST_CASE("vi_distance hand cases") {
  // identical partitions
  VectorXi z = make_z({1, 1, 2, 2});
  CHECK(vi_distance(z, z) == doctest::Approx(0.0));
  // relabeling invariance
  VectorXi relab = make_z({7, 7, 3, 3});
  CHECK(vi_distance(z, relab) == doctest::Approx(0.0));
  // one block vs four singletons on 4 nodes: VI = H(singletons) = ln 4
  VectorXi one = VectorXi::Ones(4);
  VectorXi singles = make_z({1, 2, 3, 4});
  CHECK(vi_distance(one, singles) == doctest::Approx(std::log(4.0)).epsilon(1e-12));
  // crossing pairs on 4 nodes: H = ln2 each, I = 0 -> VI = 2 ln 2
  VectorXi cross = make_z({1, 2, 1, 2});
  CHECK(vi_distance(z, cross) == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("vi_distance metric axioms against the brute oracle") {
  Rng rng(13);
  std::vector<VectorXi> zs;
  for (int rep = 0; rep < 60; ++rep) {
    int m = 3 + static_cast<int>(rng.uniform() * 6);
    VectorXi z(m);
    for (int i = 0; i < m; ++i) z[i] = 1 + static_cast<int>(rng.uniform() * 4);
    zs.push_back(z);
  }
  for (std::size_t i = 0; i < zs.size(); ++i)
    for (std::size_t j = 0; j < zs.size(); ++j) {
      if (zs[i].size() != zs[j].size()) continue;
      double d = vi_distance(zs[i], zs[j]);
      CHECK(d == doctest::Approx(vi_brute(zs[i], zs[j])).epsilon(1e-12));
      CHECK(d >= 0.0);
      CHECK(d == doctest::Approx(vi_distance(zs[j], zs[i])));
      // triangle inequality through a third partition of the same size
      for (std::size_t k = 0; k < zs.size(); ++k) {
        if (zs[k].size() != zs[i].size()) continue;
        CHECK(d <= vi_distance(zs[i], zs[k]) + vi_distance(zs[k], zs[j]) + 1e-12);
      }
    }
}

TEST_CASE("point_partition picks the count-weighted VI minimizer") {
  // 9 copies of one partition, 1 of another: the frequent one must win
  std::vector<VectorXi> draws;
  VectorXi a = make_z({1, 1, 2, 2});
  VectorXi b = make_z({1, 2, 3, 4});
  for (int i = 0; i < 9; ++i) draws.push_back(a);
  draws.push_back(b);
  VectorXi z = point_partition(draws);
  CHECK(vi_distance(z, a) == doctest::Approx(0.0));
}

TEST_CASE("point_partition matches exhaustive minimization over the sampled support") {
  Rng rng(17);
  for (int rep = 0; rep < 200; ++rep) {
    int m = 3 + static_cast<int>(rng.uniform() * 4);  // up to 6
    int n = 2 + static_cast<int>(rng.uniform() * 8);
    std::vector<VectorXi> draws;
    for (int d = 0; d < n; ++d) {
      VectorXi z(m);
      for (int i = 0; i < m; ++i) z[i] = 1 + static_cast<int>(rng.uniform() * 3);
      draws.push_back(z);
    }
    VectorXi got = point_partition(draws);
    // brute: mean VI of each candidate draw against all draws
    double best = std::numeric_limits<double>::infinity();
    for (const VectorXi& cand : draws) {
      double total = 0.0;
      for (const VectorXi& other : draws) total += vi_brute(cand, other);
      best = std::min(best, total / n);
    }
    double got_mean = 0.0;
    for (const VectorXi& other : draws) got_mean += vi_brute(got, other);
    got_mean /= n;
    CHECK(got_mean == doctest::Approx(best).epsilon(1e-9));
  }
}

TEST_CASE("point_partition tie-breaking: fewer clusters, then first occurrence") {
  // two partitions at equal mean VI from each other; the coarser one wins
  VectorXi fine = make_z({1, 2, 3, 4});
  VectorXi coarse = make_z({1, 1, 2, 2});
  std::vector<VectorXi> draws = {fine, coarse};
  VectorXi z = point_partition(draws);
  CHECK(vi_distance(z, coarse) == doctest::Approx(0.0));

  // same cluster count, symmetric VI: first occurrence wins
  VectorXi za = make_z({1, 1, 2, 2});
  VectorXi zb = make_z({1, 2, 1, 2});
  std::vector<VectorXi> draws2 = {zb, za};
  CHECK(vi_distance(point_partition(draws2), zb) == doctest::Approx(0.0));
}

TEST_CASE("point_partition is invariant to label permutations of the draws") {
  std::vector<VectorXi> draws = {make_z({1, 1, 2, 2}), make_z({1, 1, 2, 2}),
                                 make_z({2, 2, 1, 1}), make_z({1, 2, 1, 2})};
  VectorXi z = point_partition(draws);
  CHECK(vi_distance(z, make_z({1, 1, 2, 2})) == doctest::Approx(0.0));
}

TEST_CASE("summarize_network composes the pieces consistently") {
  Rng rng(23);
  DrawStore store;
  store.n_vars = 5;
  MatrixXi a = from_edges(5, {{0, 1}, {1, 2}, {3, 4}});
  for (int d = 0; d < 20; ++d) {
    Draw dr;
    dr.adjacency = a;
    dr.assignments = make_z({1, 1, 1, 2, 2});
    store.append(dr);
  }
  NetworkSummary s = summarize_network(store);
  CHECK(s.n_groups == 2);
  CHECK((s.median_adjacency - a).cwiseAbs().sum() == 0);
  CHECK(vi_distance(s.point_z, make_z({1, 1, 1, 2, 2})) == doctest::Approx(0.0));
  CHECK(s.average_degree == doctest::Approx(average_degree(a)));
  CHECK(s.modularity == doctest::Approx(modularity(a, s.point_z)));
}
