#include "sbmvar/var_sampler.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "sbmvar/sbm.hpp"

namespace sbmvar {

namespace {

VectorXd draw_mvn(const VectorXd& mean, const MatrixXd& cov, Rng& rng) {
  const Eigen::Index n = mean.size();
  Eigen::LLT<MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    MatrixXd jittered = cov;
    jittered.diagonal().array() += 1e-12 * std::max(1.0, cov.diagonal().maxCoeff());
    llt.compute(jittered);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("draw_mvn: covariance not positive definite");
  }
  VectorXd w(n);
  for (Eigen::Index i = 0; i < n; ++i) w[i] = rng.normal();
  return mean + llt.matrixL() * w;
}

}  // namespace

EquationData equation_transform(int j, const MatrixXd& y, const MatrixXd& x,
                                const MatrixXd& coeff_stacked, const MatrixXd& chol_lower,
                                const MatrixXd& log_vols) {
  const Eigen::Index t_eff = y.rows();
  const Eigen::Index m = y.cols();
  if (x.rows() != t_eff || coeff_stacked.cols() != m || coeff_stacked.rows() != x.cols() ||
      chol_lower.rows() != m || log_vols.rows() != t_eff || log_vols.cols() != m)
    throw std::invalid_argument("equation_transform: dimension mismatch");
  if (j < 0 || j >= m) throw std::invalid_argument("equation_transform: equation index");

  MatrixXd phi_j0 = coeff_stacked;
  phi_j0.col(j).setZero();
  MatrixXd e = y - x * phi_j0;                       // T_eff x M
  const Eigen::Index rows = m - j;                   // equations j..M-1
  MatrixXd g = e * chol_lower.bottomRows(rows).transpose();  // T_eff x rows

  EquationData out;
  out.y.resize(rows * t_eff);
  out.x.resize(rows * t_eff, x.cols());
  for (Eigen::Index i = 0; i < rows; ++i) {
    VectorXd inv_sd = (-0.5 * log_vols.col(j + i).array()).exp();
    out.y.segment(i * t_eff, t_eff) = g.col(i).cwiseProduct(inv_sd);
    out.x.middleRows(i * t_eff, t_eff) =
        chol_lower(j + i, j) * inv_sd.asDiagonal() * x;
  }
  return out;
}

GaussianMoments coeff_posterior_moments(const VectorXd& y, const MatrixXd& x,
                                        const VectorXd& prior_mean,
                                        const VectorXd& prior_var) {
  const Eigen::Index k = prior_mean.size();
  if (prior_var.size() != k || x.cols() != k || x.rows() != y.size())
    throw std::invalid_argument("coeff_posterior_moments: dimension mismatch");
  if ((prior_var.array() <= 0.0).any())
    throw std::invalid_argument("coeff_posterior_moments: prior variances must be positive");

  MatrixXd post_prec = x.transpose() * x;
  post_prec.diagonal() += prior_var.cwiseInverse();
  Eigen::LLT<MatrixXd> llt(post_prec);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("coeff_posterior_moments: singular posterior precision");
  GaussianMoments out;
  out.cov = llt.solve(MatrixXd::Identity(k, k));
  out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
  out.mean = llt.solve(prior_mean.cwiseQuotient(prior_var) + x.transpose() * y);
  return out;
}

VarData make_var_data(const TimeSeriesPanel& panel, const VarConfig& config) {
  VarData d;
  d.x = build_design(panel, config.lags, config.include_intercept);
  d.y = panel.values.bottomRows(panel.rows() - config.lags);
  return d;
}

VarCoefficients sample_coefficients(const ModelState& state, const VarData& data,
                                    const VarConfig& config, Rng& rng) {
  const int m = static_cast<int>(data.y.cols());
  const int k_eq = static_cast<int>(data.x.cols());
  VarCoefficients coeffs = state.coeffs;
  MatrixXd phi = coeffs.stacked();

  for (int j = 0; j < m; ++j) {
    VectorXd prior_var =
        state.horseshoe.local_scale2.segment(static_cast<Eigen::Index>(j) * k_eq, k_eq) *
        state.horseshoe.global_scale2;
    VectorXd prior_mean = VectorXd::Zero(k_eq);
    EquationData eq = equation_transform(j, data.y, data.x, phi,
                                         state.precision.chol_lower, state.vols.log_vols);
    GaussianMoments mom = coeff_posterior_moments(eq.y, eq.x, prior_mean, prior_var);
    phi.col(j) = draw_mvn(mom.mean, mom.cov, rng);
  }
  coeffs.set_stacked(phi);
  return coeffs;
}

HorseshoeState horseshoe_update(const VectorXd& coeff_vec, const HorseshoeState& state,
                                Rng& rng) {
  const Eigen::Index k = coeff_vec.size();
  if (state.local_scale2.size() != k)
    throw std::invalid_argument("horseshoe_update: length mismatch");
  HorseshoeState out = state;
  for (Eigen::Index j = 0; j < k; ++j)
    out.local_scale2[j] =
        rng.inv_gamma(1.0, 1.0 / state.aux_local[j] +
                               coeff_vec[j] * coeff_vec[j] / (2.0 * state.global_scale2));
  double rate_d = 1.0 / state.aux_global;
  for (Eigen::Index j = 0; j < k; ++j)
    rate_d += 0.5 * coeff_vec[j] * coeff_vec[j] / out.local_scale2[j];
  out.global_scale2 = rng.inv_gamma((k + 1.0) / 2.0, rate_d);
  for (Eigen::Index j = 0; j < k; ++j)
    out.aux_local[j] = rng.inv_gamma(1.0, 1.0 + 1.0 / out.local_scale2[j]);
  out.aux_global = rng.inv_gamma(1.0, 1.0 + 1.0 / out.global_scale2);
  return out;
}

namespace {

// measurement + AR(1) pieces of the single-site log conditional and its
// first two derivatives in the candidate value
struct SitePieces {
  double omega_jj;
  double eps;
  double cross;        // sum_{k != j} omega_{j,k} e^{-d_{k,t}/2} eps_{k,t}
  double rho;
  double sig2;
  double back_mean;    // rho * d_{t-1} (0 at t = 0)
  double back_prec;    // 1/sig2, or (1-rho^2)/sig2 at t = 0
  bool has_forward;
  double fwd_next;     // d_{t+1}
};

SitePieces site_pieces(int j, int t, const VolatilityState& vols, const MatrixXd& omega,
                       const MatrixXd& residuals) {
  const int t_eff = static_cast<int>(residuals.rows());
  const int m = static_cast<int>(residuals.cols());
  SitePieces p{};
  p.omega_jj = omega(j, j);
  p.eps = residuals(t, j);
  p.cross = 0.0;
  for (int k = 0; k < m; ++k)
    if (k != j)
      p.cross += omega(j, k) * std::exp(-0.5 * vols.log_vols(t, k)) * residuals(t, k);
  p.rho = vols.persistence[j];
  p.sig2 = vols.innovation_var[j];
  if (t == 0) {
    p.back_mean = 0.0;
    p.back_prec = (1.0 - p.rho * p.rho) / p.sig2;
  } else {
    p.back_mean = p.rho * vols.log_vols(t - 1, j);
    p.back_prec = 1.0 / p.sig2;
  }
  p.has_forward = t < t_eff - 1;
  p.fwd_next = p.has_forward ? vols.log_vols(t + 1, j) : 0.0;
  return p;
}

double site_logdensity(const SitePieces& p, double d) {
  double v = -0.5 * d -
             0.5 * (p.omega_jj * std::exp(-d) * p.eps * p.eps +
                    2.0 * p.eps * std::exp(-0.5 * d) * p.cross);
  double zb = d - p.back_mean;
  v -= 0.5 * p.back_prec * zb * zb;
  if (p.has_forward) {
    double zf = p.fwd_next - p.rho * d;
    v -= 0.5 * zf * zf / p.sig2;
  }
  return v;
}

double site_gradient(const SitePieces& p, double d) {
  double g = -0.5 + 0.5 * p.omega_jj * std::exp(-d) * p.eps * p.eps +
             0.5 * p.eps * std::exp(-0.5 * d) * p.cross;
  g -= p.back_prec * (d - p.back_mean);
  if (p.has_forward) g += p.rho * (p.fwd_next - p.rho * d) / p.sig2;
  return g;
}

double site_hessian(const SitePieces& p, double d) {
  double h = -0.5 * p.omega_jj * std::exp(-d) * p.eps * p.eps -
             0.25 * p.eps * std::exp(-0.5 * d) * p.cross;
  h -= p.back_prec;
  if (p.has_forward) h -= p.rho * p.rho / p.sig2;
  return h;
}

// mean of the AR(1) smoothing distribution given the neighbors only
double ar_smoothing_mean(const SitePieces& p) {
  double prec = p.back_prec + (p.has_forward ? p.rho * p.rho / p.sig2 : 0.0);
  double num = p.back_prec * p.back_mean + (p.has_forward ? p.rho * p.fwd_next / p.sig2 : 0.0);
  return num / prec;
}

}  // namespace

double logvol_conditional_logdensity(int j, int t, double candidate,
                                     const VolatilityState& vols, const MatrixXd& omega,
                                     const MatrixXd& residuals) {
  return site_logdensity(site_pieces(j, t, vols, omega, residuals), candidate);
}

double logvol_conditional_gradient(int j, int t, double candidate,
                                   const VolatilityState& vols, const MatrixXd& omega,
                                   const MatrixXd& residuals) {
  return site_gradient(site_pieces(j, t, vols, omega, residuals), candidate);
}

LogvolSweepResult sample_logvols(const VolatilityState& vols, const MatrixXd& omega,
                                 const MatrixXd& residuals, Rng& rng) {
  const int t_eff = static_cast<int>(residuals.rows());
  const int m = static_cast<int>(residuals.cols());
  LogvolSweepResult out{vols, 0.0};
  long accepted = 0;
  const double rw_step = 0.2;

  for (int j = 0; j < m; ++j) {
    for (int t = 0; t < t_eff; ++t) {
      SitePieces p = site_pieces(j, t, out.state, omega, residuals);
      double cur = out.state.log_vols(t, j);
      double m0 = ar_smoothing_mean(p);
      double h = site_hessian(p, m0);
      double z = rng.normal();
      double u = rng.uniform();
      double cand, log_ratio;
      if (h < -1e-12) {
        // independence proposal centred at the AR-smoothing mean with the
        // local curvature as precision
        double prop_var = -1.0 / h;
        double prop_mean = m0;
        double prop_sd = std::sqrt(prop_var);
        cand = prop_mean + prop_sd * z;
        double lq_cand = -0.5 * (cand - prop_mean) * (cand - prop_mean) / prop_var;
        double lq_cur = -0.5 * (cur - prop_mean) * (cur - prop_mean) / prop_var;
        log_ratio = site_logdensity(p, cand) - site_logdensity(p, cur) + lq_cur - lq_cand;
      } else {
        cand = cur + rw_step * z;
        log_ratio = site_logdensity(p, cand) - site_logdensity(p, cur);
      }
      if (std::log(u) < log_ratio) {
        out.state.log_vols(t, j) = cand;
        ++accepted;
      }
    }
  }
  out.acceptance_rate = static_cast<double>(accepted) / (static_cast<double>(m) * t_eff);
  return out;
}

void sample_ar_params(VolatilityState& vols, Rng& rng) {
  const int t_eff = static_cast<int>(vols.log_vols.rows());
  const int m = static_cast<int>(vols.log_vols.cols());
  const double prior_mean = 0.7, prior_var = 0.1;

  for (int j = 0; j < m; ++j) {
    double sig2 = vols.innovation_var[j];
    double sxx = 0.0, sxy = 0.0;
    for (int t = 1; t < t_eff; ++t) {
      double x = vols.log_vols(t - 1, j);
      sxx += x * x;
      sxy += x * vols.log_vols(t, j);
    }
    double post_var = 1.0 / (1.0 / prior_var + sxx / sig2);
    double post_mean = post_var * (prior_mean / prior_var + sxy / sig2);
    double rho = rng.truncated_normal(post_mean, std::sqrt(post_var), -0.99, 0.99);
    vols.persistence[j] = rho;

    double ssr = 0.0;
    for (int t = 1; t < t_eff; ++t) {
      double e = vols.log_vols(t, j) - rho * vols.log_vols(t - 1, j);
      ssr += e * e;
    }
    double prec = rng.gamma(10.0 + 0.5 * (t_eff - 1.0), 2.0 + 0.5 * ssr);
    vols.innovation_var[j] = 1.0 / prec;
  }
}

ColumnConditional precision_column_params(int j, const MatrixXd& s, const MatrixXd& omega,
                                          const VectorXd& prior_var_col, int t_eff,
                                          double diag_rate) {
  const int m = static_cast<int>(omega.rows());
  if (prior_var_col.size() != m - 1)
    throw std::invalid_argument("precision_column_params: prior variance length must be M-1");
  if ((prior_var_col.array() <= 0.0).any())
    throw std::invalid_argument("precision_column_params: prior variances must be positive");

  // rows/columns excluding j, relative order preserved (j permuted last)
  MatrixXd omega_sub(m - 1, m - 1);
  VectorXd s_col(m - 1);
  for (int a = 0, ia = 0; a < m; ++a) {
    if (a == j) continue;
    s_col[ia] = s(a, j);
    for (int b = 0, ib = 0; b < m; ++b) {
      if (b == j) continue;
      omega_sub(ia, ib) = omega(a, b);
      ++ib;
    }
    ++ia;
  }
  Eigen::LLT<MatrixXd> llt(omega_sub);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("precision_column_params: leading sub-matrix not PD");
  MatrixXd omega_sub_inv = llt.solve(MatrixXd::Identity(m - 1, m - 1));

  ColumnConditional out;
  out.gamma_shape = 0.5 * t_eff + 1.0;
  out.gamma_rate = 0.5 * (s(j, j) + diag_rate);
  MatrixXd prec = (s(j, j) + diag_rate) * omega_sub_inv;
  prec.diagonal() += prior_var_col.cwiseInverse();
  Eigen::LLT<MatrixXd> llt_c(prec);
  if (llt_c.info() != Eigen::Success)
    throw std::runtime_error("precision_column_params: conditional covariance not PD");
  out.normal_cov = llt_c.solve(MatrixXd::Identity(m - 1, m - 1));
  out.normal_cov = 0.5 * (out.normal_cov + out.normal_cov.transpose()).eval();
  out.normal_mean = -out.normal_cov * s_col;
  return out;
}

MatrixXd sample_precision(const MatrixXd& s, const MatrixXd& omega, const MatrixXi& adjacency,
                          const MatrixXd& slab_vars, double spike_factor, int t_eff,
                          Rng& rng, double diag_rate) {
  const int m = static_cast<int>(omega.rows());
  MatrixXd om = omega;
  for (int j = 0; j < m; ++j) {
    VectorXd prior_var(m - 1);
    for (int a = 0, ia = 0; a < m; ++a) {
      if (a == j) continue;
      double tau2 = slab_vars(a, j);
      prior_var[ia++] = adjacency(a, j) == 1 ? tau2 : spike_factor * tau2;
    }
    ColumnConditional cond = precision_column_params(j, s, om, prior_var, t_eff, diag_rate);
    double v = rng.gamma(cond.gamma_shape, cond.gamma_rate);
    VectorXd u = draw_mvn(cond.normal_mean, cond.normal_cov, rng);

    // omega_jj = v + u' Omega_sub^{-1} u
    MatrixXd omega_sub(m - 1, m - 1);
    for (int a = 0, ia = 0; a < m; ++a) {
      if (a == j) continue;
      for (int b = 0, ib = 0; b < m; ++b) {
        if (b == j) continue;
        omega_sub(ia, ib) = om(a, b);
        ++ib;
      }
      ++ia;
    }
    VectorXd sol = omega_sub.llt().solve(u);
    double diag = v + u.dot(sol);
    for (int a = 0, ia = 0; a < m; ++a) {
      if (a == j) continue;
      om(a, j) = u[ia];
      om(j, a) = u[ia];
      ++ia;
    }
    om(j, j) = diag;
  }
  return 0.5 * (om + om.transpose());
}

SweepDiagnostics gibbs_sweep(ModelState& state, const VarData& data, const VarConfig& config,
                             Rng& rng) {
  const int m = static_cast<int>(data.y.cols());
  const int t_eff = static_cast<int>(data.y.rows());
  SweepDiagnostics diag;

  // 1. VAR coefficients
  state.coeffs = sample_coefficients(state, data, config, rng);

  // 2. horseshoe scales
  state.horseshoe = horseshoe_update(state.coeffs.vec(), state.horseshoe, rng);

  // 3. log-volatilities and their AR(1) parameters
  MatrixXd residuals = data.y - data.x * state.coeffs.stacked();
  LogvolSweepResult sv = sample_logvols(state.vols, state.precision.omega, residuals, rng);
  state.vols = sv.state;
  diag.sv_acceptance = sv.acceptance_rate;
  sample_ar_params(state.vols, rng);

  // 4. precision matrix from rescaled residual cross-products
  RescaledResiduals rr = rescale_residuals(residuals, state.vols.log_vols);
  MatrixXd omega =
      sample_precision(rr.cross_product, state.precision.omega, state.spike_slab.adjacency,
                       state.spike_slab.slab_vars, config.spike_factor, t_eff, rng,
                       config.precision_diag_rate);
  state.precision.set(omega);

  // 5. adjacency
  if (config.mode == ShrinkageMode::Sbm) {
    state.spike_slab.adjacency =
        sample_adjacency(state.precision.omega, state.spike_slab.slab_vars,
                         config.spike_factor, state.sbm.assignments, state.sbm.edge_probs, rng);
  } else if (config.mode == ShrinkageMode::SsvsFixed) {
    VectorXi z1 = VectorXi::Ones(m);
    MatrixXd p1 = MatrixXd::Constant(1, 1, config.fixed_inclusion_prob);
    state.spike_slab.adjacency =
        sample_adjacency(state.precision.omega, state.spike_slab.slab_vars,
                         config.spike_factor, z1, p1, rng);
  }
  // NoShrinkage keeps the complete adjacency

  // 6. slab variances
  state.spike_slab.slab_vars = sample_slab_variances(
      state.precision.omega, state.spike_slab.adjacency, state.spike_slab.slab_vars,
      config.slab_shape, config.slab_rate, config.spike_factor, rng);

  // 7. partition, then edge probabilities (in that order)
  if (config.mode == ShrinkageMode::Sbm) {
    GibbsPriorSpec prior = config.partition_prior;
    if (prior.kind == GibbsPriorKind::DirichletMultinomial && prior.dm_cap <= 0)
      prior.dm_cap = m;
    state.sbm.assignments =
        esbm_update_assignments(state.spike_slab.adjacency, state.sbm.assignments, prior,
                                config.edge_beta_a, config.edge_beta_b, rng,
                                config.randomize_sweep_order);
    state.sbm.edge_probs = sample_edge_probs(state.spike_slab.adjacency, state.sbm.assignments,
                                             config.edge_beta_a, config.edge_beta_b, rng);
  }
  diag.n_clusters = state.sbm.n_groups();
  return diag;
}

ModelState initialize_state(const VarData& data, const VarConfig& config) {
  const int m = static_cast<int>(data.y.cols());
  const int t_eff = static_cast<int>(data.y.rows());
  const int k_eq = static_cast<int>(data.x.cols());

  ModelState s;
  s.coeffs = VarCoefficients::zero(m, config.lags, config.include_intercept);
  s.horseshoe = HorseshoeState::ones(k_eq * m);
  s.vols.log_vols = MatrixXd::Zero(t_eff, m);
  s.vols.persistence = VectorXd::Constant(m, 0.7);
  s.vols.innovation_var = VectorXd::Constant(m, 0.2);

  MatrixXd centered = data.y.rowwise() - data.y.colwise().mean();
  MatrixXd cov = centered.transpose() * centered / std::max(1, t_eff - 1);
  cov.diagonal().array() += 1e-3;
  MatrixXd omega0 = cov.llt().solve(MatrixXd::Identity(m, m));
  s.precision.set(0.5 * (omega0 + omega0.transpose()));

  s.spike_slab.adjacency = MatrixXi::Ones(m, m) - MatrixXi::Identity(m, m);
  if (config.mode == ShrinkageMode::NoShrinkage) {
    // complete graph stays fixed
  }
  s.spike_slab.slab_vars = MatrixXd::Ones(m, m);
  s.sbm.assignments = VectorXi::Ones(m);
  s.sbm.edge_probs = MatrixXd::Constant(1, 1, 0.5);
  return s;
}

DrawStore run_chain(const TimeSeriesPanel& panel, const VarConfig& config,
                    const ProgressFn& progress) {
  panel.validate();
  config.validate();
  VarData data = make_var_data(panel, config);
  ModelState state = initialize_state(data, config);
  Rng rng(config.seed);

  DrawStore store;
  store.n_vars = static_cast<int>(panel.cols());
  store.n_lags = config.lags;
  store.has_intercept = config.include_intercept;
  store.seed = config.seed;

  for (int it = 0; it < config.n_draws; ++it) {
    gibbs_sweep(state, data, config, rng);

    if (!state.precision.omega.allFinite())
      throw std::runtime_error("run_chain: non-finite precision matrix at iteration " +
                               std::to_string(it));
    if (!state.coeffs.stacked().allFinite())
      throw std::runtime_error("run_chain: non-finite VAR coefficients at iteration " +
                               std::to_string(it));
    if (!state.vols.log_vols.allFinite())
      throw std::runtime_error("run_chain: non-finite log-volatilities at iteration " +
                               std::to_string(it));

    if (it >= config.burn_in && (it - config.burn_in) % config.thin == config.thin - 1) {
      Draw d;
      d.coeffs_vec = state.coeffs.vec();
      d.last_log_vols = state.vols.log_vols.row(state.vols.log_vols.rows() - 1).transpose();
      d.persistence = state.vols.persistence;
      d.innovation_var = state.vols.innovation_var;
      d.omega = state.precision.omega;
      d.adjacency = state.spike_slab.adjacency;
      d.assignments = state.sbm.assignments;
      d.edge_probs = state.sbm.edge_probs;
      if (config.store_full_logvol_paths) d.log_vol_path = state.vols.log_vols;
      store.append(std::move(d));
    }
    if (progress && ((it + 1) % 500 == 0 || it + 1 == config.n_draws))
      progress(it + 1, config.n_draws);
  }
  return store;
}

}  // namespace sbmvar
