#include "memsrel/linear_fit.hpp"

#include <cmath>

#include "memsrel/error.hpp"

namespace memsrel {

LineFit fit_line(const Eigen::Ref<const Eigen::VectorXd>& x,
                 const Eigen::Ref<const Eigen::VectorXd>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw InsufficientData("line fit needs at least two paired points");
  }
  const Eigen::VectorXd xc = x.array() - x.mean();
  const Eigen::VectorXd yc = y.array() - y.mean();
  const double sxx = xc.squaredNorm();
  if (!(sxx > 0.0)) {
    throw DegenerateData("line fit: zero variance in abscissa");
  }
  LineFit fit;
  fit.slope = xc.dot(yc) / sxx;
  fit.intercept = y.mean() - fit.slope * x.mean();
  if (x.size() > 2) {
    const Eigen::VectorXd resid = yc - fit.slope * xc;
    fit.residual_std = std::sqrt(resid.squaredNorm() / double(x.size() - 2));
  }
  return fit;
}

double sample_std(const Eigen::Ref<const Eigen::VectorXd>& v) {
  if (v.size() < 2) return 0.0;
  return std::sqrt((v.array() - v.mean()).square().sum() / double(v.size() - 1));
}

}  // namespace memsrel
