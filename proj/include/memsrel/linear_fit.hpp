#pragma once

#include <Eigen/Dense>

namespace memsrel {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  /// Sample standard deviation of y about the fitted line (n - 2 dof).
  double residual_std = 0.0;
};

/// Ordinary least squares y = slope * x + intercept on centred data.
/// Requires x.size() == y.size() >= 2 and nonzero variance in x.
LineFit fit_line(const Eigen::Ref<const Eigen::VectorXd>& x,
                 const Eigen::Ref<const Eigen::VectorXd>& y);

/// Sample standard deviation (n - 1); zero for fewer than two values.
double sample_std(const Eigen::Ref<const Eigen::VectorXd>& v);

}  // namespace memsrel
