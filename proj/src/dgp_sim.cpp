#include "sbmvar/dgp_sim.hpp"

#include <atomic>
#include <cmath>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include "sbmvar/model_core.hpp"
#include "sbmvar/var_sampler.hpp"

namespace sbmvar {

TrueNetwork sample_true_network(int m, int h_true, BetaParams beta_within,
                                BetaParams beta_cross, Rng& rng) {
  if (h_true < 1 || h_true > m)
    throw std::invalid_argument("sample_true_network: need 1 <= H_true <= M");
  TrueNetwork net;
  net.assignments.resize(m);
  // balanced assignment, remainder to early groups
  int base = m / h_true, rem = m % h_true;
  int idx = 0;
  for (int h = 0; h < h_true; ++h) {
    int count = base + (h < rem ? 1 : 0);
    for (int c = 0; c < count; ++c) net.assignments[idx++] = h + 1;
  }

  MatrixXd probs(h_true, h_true);
  for (int h = 0; h < h_true; ++h) probs(h, h) = rng.beta(beta_within.a, beta_within.b);
  for (int h = 0; h < h_true; ++h)
    for (int k = h + 1; k < h_true; ++k) {
      double p = rng.beta(beta_cross.a, beta_cross.b);
      probs(h, k) = p;
      probs(k, h) = p;
    }

  net.adjacency = MatrixXi::Zero(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      int d = rng.bernoulli(probs(net.assignments[i] - 1, net.assignments[j] - 1)) ? 1 : 0;
      net.adjacency(i, j) = d;
      net.adjacency(j, i) = d;
    }
  return net;
}

MatrixXd precision_from_adjacency(const MatrixXi& adjacency, Rng& rng) {
  const int m = static_cast<int>(adjacency.rows());
  MatrixXd omega = MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j)
      if (adjacency(i, j) == 1) {
        double mag = 0.1 + 0.2 * rng.uniform();
        double v = rng.bernoulli(0.5) ? mag : -mag;
        omega(i, j) = v;
        omega(j, i) = v;
      }
  for (int i = 0; i < m; ++i) omega(i, i) = 1.0 + omega.row(i).cwiseAbs().sum();
  return omega;
}

VarCoefficients random_stable_coefficients(int m, int p, Rng& rng) {
  VarCoefficients coeffs = VarCoefficients::zero(m, p, false);
  double sd = 0.1 / std::sqrt(static_cast<double>(m));
  for (int l = 0; l < p; ++l)
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) coeffs.lag[l](i, j) = sd * rng.normal();

  // companion matrix spectral radius
  MatrixXd companion = MatrixXd::Zero(m * p, m * p);
  for (int l = 0; l < p; ++l) companion.block(0, l * m, m, m) = coeffs.lag[l];
  if (p > 1)
    companion.block(m, 0, m * (p - 1), m * (p - 1)) =
        MatrixXd::Identity(m * (p - 1), m * (p - 1));
  double radius = companion.eigenvalues().cwiseAbs().maxCoeff();
  if (radius > 0.9) {
    double scale = 0.8 / radius;
    for (int l = 0; l < p; ++l) coeffs.lag[l] *= std::pow(scale, l + 1);
  }
  return coeffs;
}

TimeSeriesPanel simulate_var(const VarCoefficients& coeffs, const MatrixXd& omega, int t,
                             double sv_rho, double sv_var, Rng& rng) {
  const int m = static_cast<int>(omega.rows());
  const int p = coeffs.n_lags();
  MatrixXd chol = cholesky_lower(omega);
  double sv_sd = std::sqrt(sv_var);

  TimeSeriesPanel panel;
  panel.values = MatrixXd::Zero(t, m);
  panel.names.resize(m);
  for (int j = 0; j < m; ++j) panel.names[j] = "y" + std::to_string(j + 1);

  VectorXd d = VectorXd::Zero(m);  // d_{j,0} = 0
  std::vector<VectorXd> history(p, VectorXd::Zero(m));  // y_0 = 0
  for (int s = 0; s < t; ++s) {
    for (int j = 0; j < m; ++j) d[j] = sv_rho * d[j] + sv_sd * rng.normal();
    VectorXd w(m);
    for (int j = 0; j < m; ++j) w[j] = rng.normal();
    // eps ~ N(0, D_t Omega^{-1} D_t): eps = D_t L^{-T} w
    VectorXd eps = chol.transpose().triangularView<Eigen::Upper>().solve(w);
    eps = (0.5 * d.array()).exp().matrix().asDiagonal() * eps;
    VectorXd y = coeffs.has_intercept ? coeffs.intercept : VectorXd::Zero(m);
    for (int l = 0; l < p; ++l) y += coeffs.lag[l] * history[l];
    y += eps;
    panel.values.row(s) = y.transpose();
    for (int l = p - 1; l > 0; --l) history[l] = history[l - 1];
    if (p > 0) history[0] = y;
  }
  return panel;
}

double hit_rate(const MatrixXi& estimated, const MatrixXi& truth) {
  if (estimated.rows() != truth.rows() || estimated.cols() != truth.cols())
    throw std::invalid_argument("hit_rate: dimension mismatch");
  const int m = static_cast<int>(truth.rows());
  int match = 0, total = 0;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      ++total;
      if (estimated(i, j) == truth(i, j)) ++match;
    }
  return total == 0 ? 100.0 : 100.0 * match / total;
}

MatrixXi posterior_median_adjacency(const DrawStore& store) {
  if (store.draws.empty())
    throw std::invalid_argument("posterior_median_adjacency: empty draw store");
  const int m = static_cast<int>(store.draws.front().adjacency.rows());
  MatrixXd freq = MatrixXd::Zero(m, m);
  for (const Draw& d : store.draws) freq += d.adjacency.cast<double>();
  freq /= static_cast<double>(store.draws.size());
  MatrixXi out = MatrixXi::Zero(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      if (i != j && freq(i, j) > 0.5) out(i, j) = 1;
  return out;
}

int true_group_count(const SimulationGridSpec& spec, int m) {
  if (m <= 5) return spec.h_true_small;
  if (m <= 30) return spec.h_true_medium;
  return spec.h_true_large;
}

namespace {

struct CellTask {
  int m, t, rep;
  std::string model;
  GibbsPriorKind kind;
  bool is_ssvs;
};

double run_one_replication(const SimulationGridSpec& spec, const CellTask& task) {
  std::uint64_t rep_seed = Rng::derive_seed(
      spec.master_seed, static_cast<std::uint64_t>(task.m) * 100000 + task.t,
      static_cast<std::uint64_t>(task.rep));
  Rng dgp_rng(rep_seed);

  int h_true = true_group_count(spec, task.m);
  TrueNetwork net;
  if (spec.clustered) {
    net = sample_true_network(task.m, h_true, spec.beta_within, spec.beta_cross, dgp_rng);
  } else {
    net.assignments = VectorXi::Ones(task.m);
    net.adjacency = MatrixXi::Zero(task.m, task.m);
    for (int i = 0; i < task.m; ++i)
      for (int j = i + 1; j < task.m; ++j) {
        int d = dgp_rng.bernoulli(spec.unclustered_edge_prob) ? 1 : 0;
        net.adjacency(i, j) = d;
        net.adjacency(j, i) = d;
      }
  }
  MatrixXd omega_true = precision_from_adjacency(net.adjacency, dgp_rng);
  VarCoefficients a_true = random_stable_coefficients(task.m, 1, dgp_rng);
  TimeSeriesPanel panel = simulate_var(a_true, omega_true, task.t, 0.9, 0.2, dgp_rng);

  VarConfig config = spec.chain_config;
  config.seed = Rng::derive_seed(rep_seed, 0xABCD, task.is_ssvs ? 1 : 2);
  if (task.is_ssvs) {
    config.mode = ShrinkageMode::SsvsFixed;
  } else {
    config.mode = ShrinkageMode::Sbm;
    double target = std::min<double>(task.m, spec.prior_cluster_multiple * h_true);
    CalibrationResult cal = calibrate(task.kind, task.m, target);
    config.partition_prior = cal.spec;
  }
  DrawStore store = run_chain(panel, config);
  return hit_rate(posterior_median_adjacency(store), net.adjacency);
}

}  // namespace

std::vector<SimulationCellResult> run_simulation_grid(const SimulationGridSpec& spec) {
  std::vector<CellTask> tasks;
  std::vector<std::string> models;
  for (GibbsPriorKind k : spec.prior_variants) models.push_back(to_string(k));
  if (spec.include_ssvs_baseline) models.push_back("SSVS");

  for (int m : spec.sizes)
    for (int t : spec.lengths)
      for (const std::string& model : models)
        for (int rep = 0; rep < spec.replications; ++rep) {
          CellTask task;
          task.m = m;
          task.t = t;
          task.rep = rep;
          task.model = model;
          task.is_ssvs = model == "SSVS";
          if (!task.is_ssvs) task.kind = gibbs_prior_kind_from_string(model);
          tasks.push_back(task);
        }

  std::vector<double> rates(tasks.size(), -1.0);
  std::vector<int> failed(tasks.size(), 0);
  std::atomic<std::size_t> next{0};
  int n_threads = std::max(1, spec.threads);
  auto worker = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      try {
        rates[i] = run_one_replication(spec, tasks[i]);
      } catch (const std::exception& e) {
        failed[i] = 1;
        std::cerr << "[sbmvar] replication failed (" << tasks[i].model << ", M=" << tasks[i].m
                  << ", T=" << tasks[i].t << ", rep=" << tasks[i].rep << "): " << e.what()
                  << "\n";
      }
    }
  };
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::map<std::tuple<int, int, std::string>, SimulationCellResult> cells;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    auto key = std::make_tuple(tasks[i].m, tasks[i].t, tasks[i].model);
    SimulationCellResult& cell = cells[key];
    cell.m = tasks[i].m;
    cell.t = tasks[i].t;
    cell.model = tasks[i].model;
    if (failed[i]) {
      cell.failed++;
    } else {
      cell.mean_hit_rate += rates[i];
      cell.completed++;
    }
  }
  std::vector<SimulationCellResult> out;
  for (auto& [key, cell] : cells) {
    if (cell.completed > 0) cell.mean_hit_rate /= cell.completed;
    out.push_back(cell);
  }
  return out;
}

std::string simulation_results_csv(const std::vector<SimulationCellResult>& results) {
  // columns follow the hit-rate table: per-prior differences, SSVS absolute
  std::map<std::pair<int, int>, std::map<std::string, double>> byCell;
  for (const auto& r : results) byCell[{r.m, r.t}][r.model] = r.mean_hit_rate;

  std::ostringstream os;
  os << "M,T,GN,DM,DP,PY,SSVS\n";
  for (const auto& [cell, vals] : byCell) {
    double ssvs = vals.count("SSVS") ? vals.at("SSVS") : std::nan("");
    os << cell.first << "," << cell.second;
    for (const char* model : {"GN", "DM", "DP", "PY"}) {
      os << ",";
      if (vals.count(model)) os << (vals.at(model) - ssvs);
    }
    os << "," << ssvs << "\n";
  }
  return os.str();
}

}  // namespace sbmvar
