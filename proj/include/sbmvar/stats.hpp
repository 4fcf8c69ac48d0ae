#pragma once

#include <cmath>
#include <span>

namespace sbmvar {

/// Standard normal CDF.
double norm_cdf(double x);

/// Standard normal quantile (Acklam approximation + Newton polish).
double norm_quantile(double p);

/// log N(x | mean, var)
double norm_logpdf(double x, double mean, double var);

/// log Beta(a, b)
double log_beta(double a, double b);

/// log(sum(exp(v)))
double log_sum_exp(std::span<const double> v);

}  // namespace sbmvar
