#include "sbmvar/partition_priors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "sbmvar/rng.hpp"

namespace sbmvar {

std::string to_string(GibbsPriorKind k) {
  switch (k) {
    case GibbsPriorKind::Gnedin: return "GN";
    case GibbsPriorKind::DirichletMultinomial: return "DM";
    case GibbsPriorKind::DirichletProcess: return "DP";
    case GibbsPriorKind::PitmanYor: return "PY";
  }
  return "?";
}

GibbsPriorKind gibbs_prior_kind_from_string(const std::string& s) {
  if (s == "GN" || s == "gn") return GibbsPriorKind::Gnedin;
  if (s == "DM" || s == "dm") return GibbsPriorKind::DirichletMultinomial;
  if (s == "DP" || s == "dp") return GibbsPriorKind::DirichletProcess;
  if (s == "PY" || s == "py") return GibbsPriorKind::PitmanYor;
  throw std::invalid_argument("unknown partition prior variant: " + s);
}

GibbsPriorSpec GibbsPriorSpec::gnedin(double gamma) {
  GibbsPriorSpec s;
  s.kind = GibbsPriorKind::Gnedin;
  s.gn_gamma = gamma;
  s.validate();
  return s;
}

GibbsPriorSpec GibbsPriorSpec::dirichlet_multinomial(double beta, int cap) {
  GibbsPriorSpec s;
  s.kind = GibbsPriorKind::DirichletMultinomial;
  s.dm_beta = beta;
  s.dm_cap = cap;
  s.validate();
  return s;
}

GibbsPriorSpec GibbsPriorSpec::dirichlet_process(double alpha) {
  GibbsPriorSpec s;
  s.kind = GibbsPriorKind::DirichletProcess;
  s.dp_alpha = alpha;
  s.validate();
  return s;
}

GibbsPriorSpec GibbsPriorSpec::pitman_yor(double alpha, double discount) {
  GibbsPriorSpec s;
  s.kind = GibbsPriorKind::PitmanYor;
  s.py_alpha = alpha;
  s.py_discount = discount;
  s.validate();
  return s;
}

void GibbsPriorSpec::validate() const {
  switch (kind) {
    case GibbsPriorKind::Gnedin:
      if (!(gn_gamma > 0.0 && gn_gamma < 1.0))
        throw std::invalid_argument("GN prior: gamma must lie in (0,1)");
      break;
    case GibbsPriorKind::DirichletMultinomial:
      if (!(dm_beta > 0.0)) throw std::invalid_argument("DM prior: beta must be positive");
      if (dm_cap < 0) throw std::invalid_argument("DM prior: cap must be >= 1 (or 0 for M)");
      break;
    case GibbsPriorKind::DirichletProcess:
      if (!(dp_alpha > 0.0)) throw std::invalid_argument("DP prior: alpha must be positive");
      break;
    case GibbsPriorKind::PitmanYor:
      if (!(py_discount >= 0.0 && py_discount < 1.0))
        throw std::invalid_argument("PY prior: discount must lie in [0,1)");
      if (!(py_alpha > -py_discount))
        throw std::invalid_argument("PY prior: alpha must exceed -discount");
      break;
  }
}

std::vector<double> predictive_weights_raw(const GibbsPriorSpec& spec,
                                           const std::vector<int>& cluster_sizes,
                                           int allocated) {
  const int h = static_cast<int>(cluster_sizes.size());
  int total = 0;
  for (int n : cluster_sizes) {
    if (n < 0) throw std::invalid_argument("predictive_weights: negative cluster size");
    total += n;
  }
  if (total != allocated)
    throw std::invalid_argument("predictive_weights: cluster sizes do not sum to allocated count");

  std::vector<double> w(h + 1, 0.0);
  switch (spec.kind) {
    case GibbsPriorKind::Gnedin: {
      double g = spec.gn_gamma;
      for (int i = 0; i < h; ++i)
        w[i] = (cluster_sizes[i] + 1.0) * (allocated - h + g);
      w[h] = static_cast<double>(h) * h - h * g;
      break;
    }
    case GibbsPriorKind::DirichletProcess: {
      for (int i = 0; i < h; ++i) w[i] = cluster_sizes[i];
      w[h] = spec.dp_alpha;
      break;
    }
    case GibbsPriorKind::PitmanYor: {
      for (int i = 0; i < h; ++i) w[i] = cluster_sizes[i] - spec.py_discount;
      w[h] = spec.py_alpha + spec.py_discount * h;
      break;
    }
    case GibbsPriorKind::DirichletMultinomial: {
      int cap = spec.dm_cap;
      if (cap <= 0) throw std::invalid_argument("DM prior: cap unset at use time");
      if (h > cap) throw std::invalid_argument("DM prior: more clusters than cap");
      for (int i = 0; i < h; ++i) w[i] = cluster_sizes[i] + spec.dm_beta;
      w[h] = spec.dm_beta * (cap - h);
      break;
    }
  }
  // the first allocation always opens a cluster
  if (allocated == 0) {
    w.assign(1, 1.0);
  }
  return w;
}

std::vector<double> predictive_weights(const GibbsPriorSpec& spec,
                                       const std::vector<int>& cluster_sizes,
                                       int allocated) {
  std::vector<double> w = predictive_weights_raw(spec, cluster_sizes, allocated);
  double s = std::accumulate(w.begin(), w.end(), 0.0);
  if (!(s > 0.0)) throw std::runtime_error("predictive_weights: degenerate weight sum");
  for (double& x : w) x /= s;
  return w;
}

double log_eppf(const GibbsPriorSpec& spec, const Eigen::VectorXi& z) {
  const int m = static_cast<int>(z.size());
  if (m == 0) throw std::invalid_argument("log_eppf: empty partition");
  int h = z.maxCoeff();
  std::vector<int> seen(h, 0);
  for (int i = 0; i < m; ++i) {
    if (z[i] < 1 || z[i] > h) throw std::invalid_argument("log_eppf: label out of range");
    seen[z[i] - 1] = 1;
  }
  if (std::accumulate(seen.begin(), seen.end(), 0) != h)
    throw std::invalid_argument("log_eppf: labels not contiguous");

  // canonicalize by order of first appearance so allocation is sequentially valid
  std::vector<int> relabel(h, 0);
  int next = 0;
  std::vector<int> canon(m);
  for (int i = 0; i < m; ++i) {
    int lab = z[i] - 1;
    if (relabel[lab] == 0) relabel[lab] = ++next;
    canon[i] = relabel[lab];
  }

  std::vector<int> sizes;
  double logp = 0.0;
  for (int i = 0; i < m; ++i) {
    std::vector<double> w = predictive_weights(spec, sizes, i);
    int c = canon[i];
    logp += std::log(w[c - 1]);  // index H picks the new-cluster weight
    if (c - 1 == static_cast<int>(sizes.size()))
      sizes.push_back(1);
    else
      sizes[c - 1] += 1;
  }
  return logp;
}

namespace {

int simulate_cluster_count(const GibbsPriorSpec& spec, int m, Rng& rng) {
  std::vector<int> sizes;
  for (int i = 0; i < m; ++i) {
    std::vector<double> w = predictive_weights(spec, sizes, i);
    double u = rng.uniform();
    double cum = 0.0;
    int pick = static_cast<int>(w.size()) - 1;
    for (int c = 0; c < static_cast<int>(w.size()); ++c) {
      cum += w[c];
      if (u < cum) {
        pick = c;
        break;
      }
    }
    if (pick == static_cast<int>(sizes.size()))
      sizes.push_back(1);
    else
      sizes[pick] += 1;
  }
  return static_cast<int>(sizes.size());
}

GibbsPriorSpec with_parameter(GibbsPriorKind kind, double value, double py_discount,
                              int dm_cap) {
  switch (kind) {
    case GibbsPriorKind::Gnedin: return GibbsPriorSpec::gnedin(value);
    case GibbsPriorKind::DirichletProcess: return GibbsPriorSpec::dirichlet_process(value);
    case GibbsPriorKind::PitmanYor: return GibbsPriorSpec::pitman_yor(value, py_discount);
    case GibbsPriorKind::DirichletMultinomial:
      return GibbsPriorSpec::dirichlet_multinomial(value, dm_cap);
  }
  throw std::logic_error("with_parameter: unreachable");
}

}  // namespace

ExpectedClustersResult expected_clusters(const GibbsPriorSpec& spec, int m, int n_sims,
                                         std::uint64_t seed) {
  if (m < 1) throw std::invalid_argument("expected_clusters: M >= 1 required");
  spec.validate();
  GibbsPriorSpec use = spec;
  if (use.kind == GibbsPriorKind::DirichletMultinomial && use.dm_cap <= 0) use.dm_cap = m;
  if (m == 1) return {1.0, 0.0};

  Rng rng(seed);
  double sum = 0.0, sumsq = 0.0;
  for (int s = 0; s < n_sims; ++s) {
    double h = simulate_cluster_count(use, m, rng);
    sum += h;
    sumsq += h * h;
  }
  double mean = sum / n_sims;
  double var = std::max(0.0, sumsq / n_sims - mean * mean);
  return {mean, std::sqrt(var / n_sims)};
}

double dp_expected_clusters_exact(double alpha, int m) {
  double e = 0.0;
  for (int i = 1; i <= m; ++i) e += alpha / (alpha + i - 1.0);
  return e;
}

CalibrationResult calibrate(GibbsPriorKind kind, int m, double target_clusters, double tol,
                            int max_iter, double py_discount, int dm_cap, std::uint64_t seed) {
  if (!(target_clusters >= 1.0 && target_clusters <= m))
    throw std::invalid_argument("calibrate: target must lie in [1, M]");
  if (kind == GibbsPriorKind::DirichletMultinomial && dm_cap <= 0) dm_cap = m;

  double lo, hi;
  bool log_scale;
  if (kind == GibbsPriorKind::Gnedin) {
    lo = 1e-6;
    hi = 1.0 - 1e-6;
    log_scale = false;
  } else {
    lo = 1e-4;
    hi = 1e4;
    log_scale = true;
  }

  // common seed across evaluations keeps the objective effectively monotone
  auto eval = [&](double param) {
    GibbsPriorSpec s = with_parameter(kind, param, py_discount, dm_cap);
    if (kind == GibbsPriorKind::DirichletProcess)
      return dp_expected_clusters_exact(param, m);
    return expected_clusters(s, m, 20000, seed).mean;
  };

  double f_lo = eval(lo);
  double f_hi = eval(hi);
  bool increasing = f_hi > f_lo;
  double fmin = std::min(f_lo, f_hi);
  double fmax = std::max(f_lo, f_hi);
  if (target_clusters < fmin - tol || target_clusters > fmax + tol)
    throw std::runtime_error("calibrate: target E[H]=" + std::to_string(target_clusters) +
                             " unreachable; achievable bracket [" + std::to_string(fmin) +
                             ", " + std::to_string(fmax) + "]");

  double best_param = lo, best_err = std::abs(f_lo - target_clusters);
  if (std::abs(f_hi - target_clusters) < best_err) {
    best_param = hi;
    best_err = std::abs(f_hi - target_clusters);
  }
  int it = 0;
  for (; it < max_iter; ++it) {
    double mid = log_scale ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
    double f = eval(mid);
    double err = std::abs(f - target_clusters);
    if (err < best_err) {
      best_err = err;
      best_param = mid;
    }
    if (err <= tol) {
      best_param = mid;
      ++it;
      break;
    }
    bool go_up = increasing ? (f < target_clusters) : (f > target_clusters);
    if (go_up)
      lo = mid;
    else
      hi = mid;
  }
  GibbsPriorSpec spec = with_parameter(kind, best_param, py_discount, dm_cap);
  double achieved = eval(best_param);
  if (std::abs(achieved - target_clusters) > tol)
    throw std::runtime_error("calibrate: failed to reach target within tolerance");
  return {spec, achieved, it};
}

}  // namespace sbmvar
