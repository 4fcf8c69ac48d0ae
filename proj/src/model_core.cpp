#include "sbmvar/model_core.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace sbmvar {

MatrixXd build_design(const TimeSeriesPanel& panel, int lags, bool intercept) {
  const Eigen::Index t_total = panel.rows();
  const Eigen::Index m = panel.cols();
  if (t_total <= lags) throw std::invalid_argument("build_design: T must exceed lag count");
  const Eigen::Index t_eff = t_total - lags;
  MatrixXd x(t_eff, m * lags + (intercept ? 1 : 0));
  for (Eigen::Index t = 0; t < t_eff; ++t) {
    for (int p = 0; p < lags; ++p)
      x.block(t, p * m, 1, m) = panel.values.row(t + lags - 1 - p);
    if (intercept) x(t, m * lags) = 1.0;
  }
  return x;
}

MatrixXd compute_residuals(const TimeSeriesPanel& panel, const VarCoefficients& coeffs,
                           int lags) {
  const Eigen::Index t_total = panel.rows();
  const Eigen::Index m = panel.cols();
  if (t_total <= lags) throw std::invalid_argument("compute_residuals: T must exceed P");
  if (coeffs.n_vars() != m || coeffs.n_lags() != lags)
    throw std::invalid_argument("compute_residuals: coefficients dimensioned for wrong (M, P)");
  MatrixXd x = build_design(panel, lags, coeffs.has_intercept);
  return panel.values.bottomRows(t_total - lags) - x * coeffs.stacked();
}

RescaledResiduals rescale_residuals(const MatrixXd& residuals, const MatrixXd& log_vols) {
  if (residuals.rows() != log_vols.rows() || residuals.cols() != log_vols.cols())
    throw std::invalid_argument("rescale_residuals: residuals and log-vols not conformable");
  if (!log_vols.allFinite())
    throw std::invalid_argument("rescale_residuals: non-finite log-volatility");
  RescaledResiduals out;
  out.scaled = residuals.array() * (-0.5 * log_vols.array()).exp();
  out.cross_product = out.scaled.transpose() * out.scaled;
  out.cross_product = 0.5 * (out.cross_product + out.cross_product.transpose()).eval();
  return out;
}

MatrixXd covariance_at_t(const PrecisionState& precision, const VectorXd& log_vol_row) {
  const Eigen::Index m = precision.omega.rows();
  if (log_vol_row.size() != m)
    throw std::invalid_argument("covariance_at_t: log-vol row length mismatch");
  const MatrixXd& l = precision.chol_lower;
  // Omega^{-1} = L^{-T} L^{-1}
  MatrixXd linv = l.triangularView<Eigen::Lower>().solve(MatrixXd::Identity(m, m));
  MatrixXd omega_inv = linv.transpose() * linv;
  VectorXd d = (0.5 * log_vol_row.array()).exp();
  MatrixXd sigma = d.asDiagonal() * omega_inv * d.asDiagonal();
  return 0.5 * (sigma + sigma.transpose());
}

MatrixXd cholesky_lower(const MatrixXd& symmetric) {
  const Eigen::Index m = symmetric.rows();
  if (symmetric.cols() != m) throw std::invalid_argument("cholesky_lower: matrix not square");
  if ((symmetric - symmetric.transpose()).cwiseAbs().maxCoeff() >
      1e-8 * std::max(1.0, symmetric.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("cholesky_lower: input not symmetric within tolerance");
  MatrixXd l = MatrixXd::Zero(m, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    double pivot = symmetric(j, j) - l.row(j).head(j).squaredNorm();
    if (!(pivot > 0.0))
      throw std::runtime_error("cholesky_lower: non-positive pivot at index " +
                               std::to_string(j));
    l(j, j) = std::sqrt(pivot);
    for (Eigen::Index i = j + 1; i < m; ++i) {
      double s = symmetric(i, j) - l.row(i).head(j).dot(l.row(j).head(j));
      l(i, j) = s / l(j, j);
    }
  }
  return l;
}

}  // namespace sbmvar
