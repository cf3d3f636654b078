#pragma once

// Two-parameter Weibull statistics for fracture loads: median-rank plotting
// positions, rank-regression fitting, the R fit-quality measure, CDF inversion
// for failure-probability budgets, and distribution moments.

#include <cmath>
#include <span>

#include <Eigen/Core>

#include "memsrel/error.hpp"

namespace memsrel {

struct WeibullParams {
  double f0 = 1.0;   ///< scale [N]
  double beta = 1.0; ///< shape [-]
};

struct WeibullFit {
  WeibullParams params;
  double r = 1.0;  ///< fit quality on the probability scale, <= 1
};

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

/// Bernard's median ranks (i - 0.3) / (n + 0.4), i = 1..n.
Eigen::VectorXd median_ranks(int n);

/// P(F <= f) = 1 - exp(-(f / f0)^beta); zero for f <= 0.
template <typename Scalar>
Scalar weibull_cdf(const WeibullParams& p, Scalar f) {
  using std::exp;
  using std::pow;
  if (!(f > Scalar(0))) return Scalar(0);
  return -std::expm1(-pow(f / Scalar(p.f0), Scalar(p.beta)));
}

/// Force at which the failure probability reaches p, f0 (-ln(1 - p))^(1/beta).
/// Throws DomainError unless 0 < p < 1.
template <typename Scalar>
Scalar invert_failure_probability(const WeibullParams& params, Scalar p) {
  if (!(p > Scalar(0) && p < Scalar(1))) {
    throw DomainError("failure probability must lie in (0, 1)");
  }
  using std::pow;
  return Scalar(params.f0) * pow(-std::log1p(-p), Scalar(1) / Scalar(params.beta));
}

/// R = (sum y^2 - sum (y - y')^2) / sum y^2.
double r_parameter(const Eigen::Ref<const Eigen::VectorXd>& y,
                   const Eigen::Ref<const Eigen::VectorXd>& y_fit);

/// Linearised rank regression of ln(-ln(1 - p_i)) on ln(f_i). R is evaluated
/// with the median ranks against the fitted CDF at each force.
WeibullFit fit_weibull(std::span<const double> fracture_forces);

MeanStd weibull_mean_std(const WeibullParams& params);

}  // namespace memsrel
