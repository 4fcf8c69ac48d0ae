#include "sbmvar/forecast.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iostream>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "sbmvar/model_core.hpp"
#include "sbmvar/var_sampler.hpp"

namespace sbmvar {

namespace {

struct DrawPieces {
  VarCoefficients coeffs;
  MatrixXd chol_lower;  // of omega
  VectorXd d;           // current log-vols
  VectorXd rho;
  VectorXd sv_sd;
};

DrawPieces unpack(const Draw& draw, int m, int p, bool has_intercept) {
  DrawPieces pc;
  pc.coeffs.set_vec(draw.coeffs_vec, m, p, has_intercept);
  pc.chol_lower = cholesky_lower(draw.omega);
  pc.d = draw.last_log_vols;
  pc.rho = draw.persistence;
  pc.sv_sd = draw.innovation_var.cwiseSqrt();
  return pc;
}

VectorXd conditional_mean(const VarCoefficients& coeffs, const std::vector<VectorXd>& recent) {
  const int p = coeffs.n_lags();
  VectorXd mu = coeffs.has_intercept
                    ? coeffs.intercept
                    : VectorXd::Zero(coeffs.n_vars()).eval();
  for (int l = 0; l < p; ++l) mu += coeffs.lag[l] * recent[recent.size() - 1 - l];
  return mu;
}

// eps ~ N(0, D Omega^{-1} D) with D = diag(exp(d/2)); one normal per variable.
VectorXd draw_shock(const DrawPieces& pc, const VectorXd& d, Rng& rng) {
  const int m = static_cast<int>(d.size());
  VectorXd w(m);
  for (int j = 0; j < m; ++j) w[j] = rng.normal();
  VectorXd e = pc.chol_lower.transpose().triangularView<Eigen::Upper>().solve(w);
  return (d.array() / 2.0).exp().matrix().asDiagonal() * e;
}

std::vector<VectorXd> init_recent(const MatrixXd& history, int p) {
  if (history.rows() < p)
    throw std::invalid_argument("simulate_path: history shorter than lag order");
  std::vector<VectorXd> recent;
  recent.reserve(p);
  for (int l = p; l >= 1; --l) recent.push_back(history.row(history.rows() - l).transpose());
  return recent;
}

}  // namespace

MatrixXd simulate_path(const Draw& draw, const MatrixXd& history, int n_lags,
                       bool has_intercept, int h, Rng& rng, const PathOptions& opts) {
  if (h < 1) throw std::invalid_argument("simulate_path: h must be >= 1");
  const int m = static_cast<int>(history.cols());
  DrawPieces pc = unpack(draw, m, n_lags, has_intercept);
  std::vector<VectorXd> recent = init_recent(history, n_lags);

  MatrixXd path(h, m);
  VectorXd d = pc.d;
  for (int s = 0; s < h; ++s) {
    VectorXd next_d = pc.rho.cwiseProduct(d);
    if (!opts.suppress_vol_innovations)
      for (int j = 0; j < m; ++j) next_d[j] += pc.sv_sd[j] * rng.normal();
    d = next_d;
    VectorXd y = conditional_mean(pc.coeffs, recent);
    if (!opts.suppress_shocks) y += draw_shock(pc, d, rng);
    path.row(s) = y.transpose();
    recent.erase(recent.begin());
    recent.push_back(y);
  }
  return path;
}

PredictiveMoments predictive_moments(const Draw& draw, const MatrixXd& history,
                                     int n_lags, bool has_intercept, int h, Rng& rng) {
  if (h < 1) throw std::invalid_argument("predictive_moments: h must be >= 1");
  const int m = static_cast<int>(history.cols());
  DrawPieces pc = unpack(draw, m, n_lags, has_intercept);
  std::vector<VectorXd> recent = init_recent(history, n_lags);

  VectorXd d = pc.d;
  for (int s = 0; s < h - 1; ++s) {
    for (int j = 0; j < m; ++j) d[j] = pc.rho[j] * d[j] + pc.sv_sd[j] * rng.normal();
    VectorXd y = conditional_mean(pc.coeffs, recent) + draw_shock(pc, d, rng);
    recent.erase(recent.begin());
    recent.push_back(y);
  }
  // terminal volatility advanced by its AR mean: the h=1 density is exact
  d = pc.rho.cwiseProduct(d);

  PredictiveMoments out;
  out.mean = conditional_mean(pc.coeffs, recent);
  MatrixXd d_half = (d.array() / 2.0).exp().matrix().asDiagonal();
  MatrixXd linv_d = pc.chol_lower.triangularView<Eigen::Lower>().solve(d_half);
  out.cov = linv_d.transpose() * linv_d;
  return out;
}

double gaussian_subset_logdensity(const PredictiveMoments& m, const VectorXd& realized,
                                  const std::vector<int>& subset) {
  if (subset.empty()) throw std::invalid_argument("empty variable subset");
  const int k = static_cast<int>(subset.size());
  VectorXd r(k);
  MatrixXd cov(k, k);
  for (int a = 0; a < k; ++a) {
    r[a] = realized[subset[a]] - m.mean[subset[a]];
    for (int b = 0; b < k; ++b) cov(a, b) = m.cov(subset[a], subset[b]);
  }
  Eigen::LLT<MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("singular subset covariance in predictive density");
  double logdet = 0.0;
  for (int a = 0; a < k; ++a) logdet += 2.0 * std::log(llt.matrixL()(a, a));
  double quad = r.dot(llt.solve(r));
  return -0.5 * (k * std::log(2.0 * M_PI) + logdet + quad);
}

double log_mean_exp(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("log_mean_exp: empty input");
  std::sort(values.begin(), values.end());
  double vmax = values.back();
  if (!std::isfinite(vmax)) return vmax;
  // collapse exact duplicates into counts so that duplicating the whole set
  // scales numerator and denominator by the same power of two
  double num = 0.0, den = 0.0;
  std::size_t i = 0;
  while (i < values.size()) {
    std::size_t j = i;
    while (j < values.size() && values[j] == values[i]) ++j;
    double c = static_cast<double>(j - i);
    num += c * std::exp(values[i] - vmax);
    den += c;
    i = j;
  }
  return vmax + std::log(num / den);
}

double log_predictive_density(const DrawStore& store, const MatrixXd& history,
                              const VectorXd& realized, const std::vector<int>& subset,
                              int h, Rng& rng) {
  if (store.draws.empty()) throw std::invalid_argument("log_predictive_density: no draws");
  std::vector<double> logs;
  logs.reserve(store.draws.size());
  for (const Draw& d : store.draws) {
    PredictiveMoments m =
        predictive_moments(d, history, store.n_lags, store.has_intercept, h, rng);
    logs.push_back(gaussian_subset_logdensity(m, realized, subset));
  }
  return log_mean_exp(std::move(logs));
}

namespace {

std::vector<int> name_indices(const TimeSeriesPanel& panel,
                              const std::vector<std::string>& names) {
  std::vector<int> idx;
  for (const std::string& n : names) {
    auto it = std::find(panel.names.begin(), panel.names.end(), n);
    if (it == panel.names.end())
      throw std::invalid_argument("unknown focus variable: " + n);
    idx.push_back(static_cast<int>(it - panel.names.begin()));
  }
  return idx;
}

}  // namespace

RecursiveResult recursive_evaluation(const TimeSeriesPanel& panel,
                                     const std::vector<ForecastModelSpec>& models,
                                     int eval_start, const std::vector<int>& horizons,
                                     std::vector<std::string> focus_vars,
                                     std::uint64_t seed, int n_threads) {
  panel.validate();
  const int t_total = static_cast<int>(panel.rows());
  const int m = static_cast<int>(panel.cols());
  if (models.empty()) throw std::invalid_argument("recursive_evaluation: no models");
  if (eval_start >= t_total)
    throw std::invalid_argument("recursive_evaluation: eval_start leaves no evaluation point");

  if (focus_vars.empty())
    for (int j = 0; j < std::min(3, m); ++j) focus_vars.push_back(panel.names[j]);
  std::vector<int> focus_idx = name_indices(panel, focus_vars);
  std::vector<int> all_idx(m);
  for (int j = 0; j < m; ++j) all_idx[j] = j;

  RecursiveResult result;
  for (const auto& spec : models) result.model_names.push_back(spec.name);
  for (const std::string& n : focus_vars) result.group_names.push_back(n);
  result.group_names.push_back("FOCUS");
  result.group_names.push_back("ALL");
  result.horizons = horizons;

  struct Task {
    int model_idx;
    int origin;  // training length
  };
  std::vector<Task> tasks;
  for (int mi = 0; mi < static_cast<int>(models.size()); ++mi)
    for (int origin = eval_start; origin < t_total; ++origin)
      tasks.push_back({mi, origin});

  std::mutex mu;
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      std::size_t k = next.fetch_add(1);
      if (k >= tasks.size()) return;
      const Task& task = tasks[k];
      const ForecastModelSpec& spec = models[task.model_idx];
      try {
        TimeSeriesPanel train;
        train.values = panel.values.topRows(task.origin);
        train.names = panel.names;
        if (!panel.dates.empty())
          train.dates.assign(panel.dates.begin(), panel.dates.begin() + task.origin);
        VarConfig cfg = spec.config;
        cfg.seed = Rng::derive_seed(seed, static_cast<std::uint64_t>(task.model_idx),
                                    static_cast<std::uint64_t>(task.origin));
        DrawStore store = run_chain(train, cfg);
        Rng score_rng(Rng::derive_seed(
            seed, 1000003ULL + static_cast<std::uint64_t>(task.model_idx),
            static_cast<std::uint64_t>(task.origin)));

        std::vector<ScoreRow> local;
        for (int h : horizons) {
          if (task.origin + h > t_total) continue;
          VectorXd realized = panel.values.row(task.origin + h - 1).transpose();
          for (std::size_t f = 0; f < focus_idx.size(); ++f) {
            double lpl = log_predictive_density(store, train.values, realized,
                                                {focus_idx[f]}, h, score_rng);
            local.push_back({task.origin, spec.name, focus_vars[f], h, lpl});
          }
          local.push_back({task.origin, spec.name, "FOCUS", h,
                           log_predictive_density(store, train.values, realized,
                                                  focus_idx, h, score_rng)});
          local.push_back({task.origin, spec.name, "ALL", h,
                           log_predictive_density(store, train.values, realized,
                                                  all_idx, h, score_rng)});
        }
        std::lock_guard<std::mutex> lk(mu);
        result.rows.insert(result.rows.end(), local.begin(), local.end());
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lk(mu);
        std::cerr << "recursive_evaluation: origin " << task.origin << " model "
                  << spec.name << " failed: " << e.what() << "\n";
      }
    }
  };

  int nt = std::max(1, std::min<int>(n_threads, static_cast<int>(tasks.size())));
  if (nt == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < nt; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::sort(result.rows.begin(), result.rows.end(), [](const ScoreRow& a, const ScoreRow& b) {
    return std::tie(a.origin, a.model, a.group, a.horizon) <
           std::tie(b.origin, b.model, b.group, b.horizon);
  });
  return result;
}

std::string RecursiveResult::scores_csv() const {
  std::ostringstream os;
  os << "origin,model,group,horizon,lpl\n";
  os.precision(12);
  for (const ScoreRow& r : rows)
    os << r.origin << ',' << r.model << ',' << r.group << ',' << r.horizon << ','
       << r.lpl << '\n';
  return os.str();
}

namespace {

using ScoreKey = std::tuple<int, std::string, int>;  // origin, group, horizon

std::map<ScoreKey, double> model_scores(const std::vector<ScoreRow>& rows,
                                        const std::string& model) {
  std::map<ScoreKey, double> out;
  for (const ScoreRow& r : rows)
    if (r.model == model) out[{r.origin, r.group, r.horizon}] = r.lpl;
  return out;
}

}  // namespace

std::string RecursiveResult::table_csv(const std::string& baseline) const {
  std::map<std::string, std::map<ScoreKey, double>> by_model;
  for (const std::string& m : model_names) by_model[m] = model_scores(rows, m);
  const auto& base = by_model.at(baseline);

  std::ostringstream os;
  os.precision(8);
  os << "group,horizon," << baseline;
  for (const std::string& m : model_names)
    if (m != baseline) os << ',' << m;
  os << '\n';
  for (const std::string& g : group_names)
    for (int h : horizons) {
      double base_sum = 0.0;
      int n = 0;
      for (const auto& [key, v] : base)
        if (std::get<1>(key) == g && std::get<2>(key) == h) {
          base_sum += v;
          n++;
        }
      if (n == 0) continue;
      os << g << ',' << h << ',' << base_sum / n;
      for (const std::string& m : model_names) {
        if (m == baseline) continue;
        double diff_sum = 0.0;
        int nd = 0;
        for (const auto& [key, v] : by_model.at(m))
          if (std::get<1>(key) == g && std::get<2>(key) == h && base.count(key)) {
            diff_sum += v - base.at(key);
            nd++;
          }
        os << ',' << (nd ? diff_sum / nd : std::numeric_limits<double>::quiet_NaN());
      }
      os << '\n';
    }
  return os.str();
}

std::string RecursiveResult::cumulative_csv(const std::string& baseline) const {
  std::map<std::string, std::map<ScoreKey, double>> by_model;
  for (const std::string& m : model_names) by_model[m] = model_scores(rows, m);
  const auto& base = by_model.at(baseline);

  std::ostringstream os;
  os.precision(12);
  os << "model,group,horizon,origin,cumulative_mean_diff\n";
  for (const std::string& m : model_names)
    for (const std::string& g : group_names)
      for (int h : horizons) {
        double running = 0.0;
        int n = 0;
        for (const auto& [key, v] : by_model.at(m)) {
          if (std::get<1>(key) != g || std::get<2>(key) != h || !base.count(key)) continue;
          running += v - base.at(key);
          n++;
          os << m << ',' << g << ',' << h << ',' << std::get<0>(key) << ','
             << running / n << '\n';
        }
      }
  return os.str();
}

}  // namespace sbmvar
