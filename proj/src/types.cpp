#include "sbmvar/types.hpp"

#include <cmath>
#include <iostream>

#include "sbmvar/model_core.hpp"

namespace sbmvar {

void TimeSeriesPanel::validate() const {
  if (values.rows() < 1) throw std::invalid_argument("panel: T >= 1 required");
  if (values.cols() < 2) throw std::invalid_argument("panel: M >= 2 required");
  if (static_cast<Eigen::Index>(names.size()) != values.cols())
    throw std::invalid_argument("panel: name count must equal column count");
  if (!dates.empty() && static_cast<Eigen::Index>(dates.size()) != values.rows())
    throw std::invalid_argument("panel: date count must equal row count");
  if (!values.allFinite()) throw std::invalid_argument("panel: missing or non-finite values");
}

void VarConfig::validate() const {
  if (lags < 1) throw std::invalid_argument("config: lags must be positive");
  if (n_draws < 1) throw std::invalid_argument("config: n_draws must be positive");
  if (burn_in < 0 || burn_in >= n_draws)
    throw std::invalid_argument("config: burn_in must satisfy 0 <= burn_in < n_draws");
  if (thin < 1) throw std::invalid_argument("config: thin must be positive");
  if (!(spike_factor > 0.0 && spike_factor < 1.0))
    throw std::invalid_argument("config: spike factor c must lie in (0,1)");
  if (slab_shape <= 0.0 || slab_rate <= 0.0 || edge_beta_a <= 0.0 || edge_beta_b <= 0.0)
    throw std::invalid_argument("config: shape/rate parameters must be positive");
  if (mode == ShrinkageMode::SsvsFixed &&
      !(fixed_inclusion_prob >= 0.0 && fixed_inclusion_prob <= 1.0))
    throw std::invalid_argument("config: fixed inclusion probability outside [0,1]");
  partition_prior.validate();
}

VarCoefficients VarCoefficients::zero(int m, int p, bool intercept) {
  VarCoefficients c;
  c.lag.assign(p, MatrixXd::Zero(m, m));
  c.intercept = VectorXd::Zero(m);
  c.has_intercept = intercept;
  return c;
}

MatrixXd VarCoefficients::stacked() const {
  int m = n_vars();
  int p = n_lags();
  MatrixXd phi(n_regressors(), m);
  for (int l = 0; l < p; ++l) phi.middleRows(l * m, m) = lag[l].transpose();
  if (has_intercept) phi.row(p * m) = intercept.transpose();
  return phi;
}

void VarCoefficients::set_stacked(const MatrixXd& phi) {
  int m = n_vars();
  int p = n_lags();
  if (phi.rows() != n_regressors() || phi.cols() != m)
    throw std::invalid_argument("set_stacked: dimension mismatch");
  for (int l = 0; l < p; ++l) lag[l] = phi.middleRows(l * m, m).transpose();
  if (has_intercept) intercept = phi.row(p * m).transpose();
}

VectorXd VarCoefficients::vec() const {
  MatrixXd phi = stacked();
  return Eigen::Map<const VectorXd>(phi.data(), phi.size());
}

void VarCoefficients::set_vec(const VectorXd& a, int m, int p, bool intercept) {
  lag.assign(p, MatrixXd::Zero(m, m));
  intercept_resize(m, intercept);
  int k_eq = m * p + (intercept ? 1 : 0);
  if (a.size() != static_cast<Eigen::Index>(k_eq) * m)
    throw std::invalid_argument("set_vec: length mismatch");
  MatrixXd phi = Eigen::Map<const MatrixXd>(a.data(), k_eq, m);
  set_stacked(phi);
}

void VarCoefficients::intercept_resize(int m, bool enabled) {
  has_intercept = enabled;
  intercept = VectorXd::Zero(m);
}

void VolatilityState::validate() const {
  if (!log_vols.allFinite()) throw std::invalid_argument("volatility: non-finite log-vols");
  for (Eigen::Index j = 0; j < persistence.size(); ++j) {
    if (std::abs(persistence[j]) > 0.99)
      throw std::invalid_argument("volatility: |rho| > 0.99");
    if (!(innovation_var[j] > 0.0))
      throw std::invalid_argument("volatility: innovation variance must be positive");
  }
}

void PrecisionState::set(const MatrixXd& om) {
  double asym = (om - om.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-8)
    throw std::invalid_argument("precision: asymmetry exceeds 1e-8 before symmetrization");
  omega = 0.5 * (om + om.transpose());
  try {
    chol_lower = cholesky_lower(omega);
  } catch (const std::runtime_error&) {
    double jitter = 1e-10 * omega.trace() / static_cast<double>(omega.rows());
    std::cerr << "[sbmvar] precision Cholesky failed; adding diagonal jitter " << jitter
              << "\n";
    omega.diagonal().array() += jitter;
    chol_lower = cholesky_lower(omega);
  }
}

void SpikeSlabState::validate() const {
  int m = static_cast<int>(adjacency.rows());
  for (int i = 0; i < m; ++i) {
    if (adjacency(i, i) != 0) throw std::invalid_argument("spike-slab: nonzero diagonal");
    for (int j = 0; j < m; ++j) {
      if (adjacency(i, j) != adjacency(j, i))
        throw std::invalid_argument("spike-slab: adjacency not symmetric");
      if (adjacency(i, j) != 0 && adjacency(i, j) != 1)
        throw std::invalid_argument("spike-slab: adjacency not binary");
      if (i != j && !(slab_vars(i, j) > 0.0 && slab_vars(i, j) == slab_vars(j, i)))
        throw std::invalid_argument("spike-slab: slab variances must be symmetric positive");
    }
  }
}

void SbmState::validate() const {
  int h = n_groups();
  if (h < 1) throw std::invalid_argument("sbm: empty assignment vector");
  std::vector<int> counts(h, 0);
  for (Eigen::Index i = 0; i < assignments.size(); ++i) {
    int z = assignments[i];
    if (z < 1 || z > h) throw std::invalid_argument("sbm: label out of range");
    counts[z - 1]++;
  }
  for (int c : counts)
    if (c == 0) throw std::invalid_argument("sbm: labels not contiguous (empty label)");
  if (edge_probs.rows() != h || edge_probs.cols() != h)
    throw std::invalid_argument("sbm: edge-probability matrix must be H x H");
  if ((edge_probs - edge_probs.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("sbm: edge-probability matrix must be symmetric");
}

HorseshoeState HorseshoeState::ones(int k) {
  HorseshoeState s;
  s.local_scale2 = VectorXd::Ones(k);
  s.aux_local = VectorXd::Ones(k);
  s.global_scale2 = 1.0;
  s.aux_global = 1.0;
  return s;
}

void HorseshoeState::validate() const {
  auto positive_finite = [](double x) { return x > 0.0 && std::isfinite(x); };
  for (Eigen::Index j = 0; j < local_scale2.size(); ++j)
    if (!positive_finite(local_scale2[j]) || !positive_finite(aux_local[j]))
      throw std::invalid_argument("horseshoe: scales must be strictly positive finite");
  if (!positive_finite(global_scale2) || !positive_finite(aux_global))
    throw std::invalid_argument("horseshoe: global scale must be strictly positive finite");
}

}  // namespace sbmvar
