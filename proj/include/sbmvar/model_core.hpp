#pragma once

#include "sbmvar/types.hpp"

namespace sbmvar {

/// Residuals eps_t = y_t - intercept - sum_p A_p y_{t-p} for t = P..T-1.
/// Returns a (T-P) x M matrix.
MatrixXd compute_residuals(const TimeSeriesPanel& panel, const VarCoefficients& coeffs,
                           int lags);

/// Design matrix X with rows (y_{t-1}', ..., y_{t-P}'[, 1]) aligned with
/// compute_residuals output; (T-P) x K_eq.
MatrixXd build_design(const TimeSeriesPanel& panel, int lags, bool intercept);

struct RescaledResiduals {
  MatrixXd scaled;        // eps_tilde
  MatrixXd cross_product; // S = eps_tilde' eps_tilde
};

/// eps_tilde_{t,j} = eps_{t,j} * exp(-d_{j,t}/2) and its cross-product.
RescaledResiduals rescale_residuals(const MatrixXd& residuals, const MatrixXd& log_vols);

/// Sigma_t = D_t Omega^{-1} D_t with D_t = diag(exp(d_t/2)).
MatrixXd covariance_at_t(const PrecisionState& precision, const VectorXd& log_vol_row);

/// Lower Cholesky factor; throws with the failing pivot index when the
/// input is not positive definite.
MatrixXd cholesky_lower(const MatrixXd& symmetric);

}  // namespace sbmvar
