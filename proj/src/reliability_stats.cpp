#include "memsrel/reliability_stats.hpp"

#include <algorithm>
#include <vector>

#include "memsrel/linear_fit.hpp"

namespace memsrel {

Eigen::VectorXd median_ranks(int n) {
  if (n < 1) throw DomainError("median_ranks: n must be at least 1");
  return (Eigen::VectorXd::LinSpaced(n, 1.0, double(n)).array() - 0.3) / (double(n) + 0.4);
}

double r_parameter(const Eigen::Ref<const Eigen::VectorXd>& y,
                   const Eigen::Ref<const Eigen::VectorXd>& y_fit) {
  if (y.size() != y_fit.size() || y.size() < 1) {
    throw DomainError("r_parameter: vectors must have equal nonzero length");
  }
  const double total = y.squaredNorm();
  if (!(total > 0.0)) throw DomainError("r_parameter: sum of squares of y is zero");
  return (total - (y - y_fit).squaredNorm()) / total;
}

WeibullFit fit_weibull(std::span<const double> fracture_forces) {
  const auto n = Eigen::Index(fracture_forces.size());
  if (n < 3) throw InsufficientData("Weibull fit needs at least 3 fracture forces");
  std::vector<double> sorted(fracture_forces.begin(), fracture_forces.end());
  for (double f : sorted) {
    if (!(f > 0.0) || !std::isfinite(f)) throw DomainError("fracture forces must be positive");
  }
  std::stable_sort(sorted.begin(), sorted.end());
  if (sorted.front() == sorted.back()) throw DegenerateData("all fracture forces are equal");

  const Eigen::Map<const Eigen::VectorXd> forces(sorted.data(), n);
  const Eigen::VectorXd ranks = median_ranks(int(n));
  const Eigen::VectorXd x = forces.array().log();
  const Eigen::VectorXd y = (-(-ranks.array()).log1p()).log();
  const LineFit line = fit_line(x, y);
  if (!(line.slope > 0.0)) throw DegenerateData("Weibull fit produced a nonpositive shape");

  WeibullFit fit;
  fit.params.beta = line.slope;
  fit.params.f0 = std::exp(-line.intercept / line.slope);
  const Eigen::VectorXd predicted =
      forces.unaryExpr([&](double f) { return weibull_cdf(fit.params, f); });
  fit.r = r_parameter(ranks, predicted);
  return fit;
}

MeanStd weibull_mean_std(const WeibullParams& params) {
  const double g1 = std::tgamma(1.0 + 1.0 / params.beta);
  const double g2 = std::tgamma(1.0 + 2.0 / params.beta);
  return {params.f0 * g1, params.f0 * std::sqrt(std::max(0.0, g2 - g1 * g1))};
}

}  // namespace memsrel
