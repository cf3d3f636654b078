#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"

#include "memsrel/error.hpp"
#include "memsrel/reliability_stats.hpp"

using namespace memsrel;

namespace {

std::vector<double> weibull_draws(const WeibullParams& p, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::weibull_distribution<double> dist(p.beta, p.f0);
  std::vector<double> out(static_cast<std::size_t>(n));
  for (double& v : out) v = dist(rng);
  return out;
}

// Composite Simpson on the survival function: E[F] = int_0^inf S(f) df and
// E[F^2] = int_0^inf 2 f S(f) df, truncated where S is negligible.
MeanStd quadrature_moments(const WeibullParams& p) {
  const double upper = p.f0 * std::pow(60.0, 1.0 / p.beta);
  const int n = 200000;
  const double h = upper / n;
  double m1 = 0.0, m2 = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double f = i * h;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    const double s = std::exp(-std::pow(f / p.f0, p.beta));
    m1 += w * s;
    m2 += w * 2.0 * f * s;
  }
  m1 *= h / 3.0;
  m2 *= h / 3.0;
  return {m1, std::sqrt(m2 - m1 * m1)};
}

}  // namespace

TEST_CASE("median ranks") {
  CHECK(median_ranks(1)[0] == doctest::Approx(0.5));
  const Eigen::VectorXd r = median_ranks(20);
  CHECK(r[0] == doctest::Approx(0.034314).epsilon(1e-5));
  for (int i = 0; i < 20; ++i) {
    CHECK(r[i] + r[19 - i] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(r[i] > 0.0);
    CHECK(r[i] < 1.0);
    if (i > 0) CHECK(r[i] > r[i - 1]);
  }
  CHECK_THROWS_AS(median_ranks(0), DomainError);
}

TEST_CASE("Weibull CDF") {
  const WeibullParams front{1.22, 10.69};
  CHECK(weibull_cdf(front, 0.0) == 0.0);
  CHECK(weibull_cdf(front, 1.22) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-14));
  CHECK(weibull_cdf(front, 0.42) == doctest::Approx(1.12033e-5).epsilon(1e-4));
  double previous = 0.0;
  for (double f = 0.0; f < 4.0; f += 0.001) {
    const double p = weibull_cdf(front, f);
    CHECK(p >= previous);
    CHECK(p < 1.0 + 1e-15);
    previous = p;
  }
}

TEST_CASE("failure probability inversion") {
  const WeibullParams front{1.22, 10.69};
  const WeibullParams back{0.77, 7.21};
  CHECK(invert_failure_probability(front, 1e-5) == doctest::Approx(0.4156).epsilon(1e-3));
  CHECK(invert_failure_probability(back, 1e-6) == doctest::Approx(0.1133).epsilon(1e-3));
  CHECK(invert_failure_probability(front, 1.0 - std::exp(-1.0)) == doctest::Approx(1.22).epsilon(1e-14));
  CHECK_THROWS_AS(invert_failure_probability(front, 0.0), DomainError);
  CHECK_THROWS_AS(invert_failure_probability(front, 1.0), DomainError);
  CHECK_THROWS_AS(invert_failure_probability(front, -0.2), DomainError);

  SUBCASE("round trip through the CDF over random parameters") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> f0(0.1, 5.0), beta(0.5, 30.0), frac(1e-3, 3.0);
    for (int seed = 0; seed < 200; ++seed) {
      const WeibullParams p{f0(rng), beta(rng)};
      const double f = frac(rng) * p.f0;
      const double prob = weibull_cdf(p, f);
      if (prob <= 0.0 || prob >= 1.0 - 1e-6) continue;
      CHECK(invert_failure_probability(p, prob) == doctest::Approx(f).epsilon(1e-9));
    }
  }
}

TEST_CASE("R parameter") {
  Eigen::VectorXd y(3), yp(3);
  y << 0.2, 0.5, 0.9;
  yp << 0.25, 0.45, 0.95;
  CHECK(r_parameter(y, yp) == doctest::Approx(0.993182).epsilon(1e-6));
  CHECK(r_parameter(y, y) == 1.0);
  CHECK(r_parameter(y, Eigen::VectorXd::Zero(3)) == 0.0);
  CHECK_THROWS_AS(r_parameter(Eigen::VectorXd::Zero(3), y), DomainError);
  CHECK_THROWS_AS(r_parameter(y, Eigen::VectorXd::Zero(2)), DomainError);

  SUBCASE("equals one only for an exact fit") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.01, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
      Eigen::VectorXd a(8);
      for (auto& v : a) v = u(rng);
      Eigen::VectorXd b = a;
      CHECK(r_parameter(a, b) == 1.0);
      b[trial % 8] += 1e-6;
      CHECK(r_parameter(a, b) < 1.0);
    }
  }
}

TEST_CASE("Weibull fit") {
  SUBCASE("points on an exact Weibull line") {
    const Eigen::VectorXd p = median_ranks(3);
    std::vector<double> forces;
    for (double pi : p) forces.push_back(std::pow(-std::log1p(-pi), 0.5));
    std::reverse(forces.begin(), forces.end());
    const WeibullFit fit = fit_weibull(forces);
    CHECK(fit.params.f0 == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(fit.params.beta == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(fit.r == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(fit_weibull(std::vector<double>{1.0, 2.0}), InsufficientData);
    CHECK_THROWS_AS(fit_weibull(std::vector<double>{1.0, 1.0, 1.0}), DegenerateData);
    CHECK_THROWS_AS(fit_weibull(std::vector<double>{1.0, -1.0, 2.0}), DomainError);
  }
  SUBCASE("Monte Carlo round trip") {
    const WeibullParams truth{1.22, 10.69};
    const WeibullFit fit = fit_weibull(weibull_draws(truth, 10000, 2024));
    CHECK(std::abs(fit.params.f0 / truth.f0 - 1.0) < 0.01);
    CHECK(std::abs(fit.params.beta / truth.beta - 1.0) < 0.03);
    CHECK(fit.r > 0.99);
  }
  SUBCASE("scale equivariance") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> c(0.01, 100.0);
    for (int seed = 0; seed < 100; ++seed) {
      auto forces = weibull_draws({0.77, 7.21}, 20, std::uint64_t(seed));
      const WeibullFit base = fit_weibull(forces);
      const double scale = c(rng);
      for (double& f : forces) f *= scale;
      const WeibullFit scaled = fit_weibull(forces);
      CHECK(scaled.params.f0 == doctest::Approx(scale * base.params.f0).epsilon(1e-9));
      CHECK(scaled.params.beta == doctest::Approx(base.params.beta).epsilon(1e-9));
      CHECK(scaled.r == doctest::Approx(base.r).epsilon(1e-9));
    }
  }
  SUBCASE("R of 20-specimen fits brackets typical values") {
    int inside = 0;
    for (int seed = 0; seed < 200; ++seed) {
      const auto& params = seed % 2 ? WeibullParams{0.77, 7.21} : WeibullParams{1.22, 10.69};
      const WeibullFit fit = fit_weibull(weibull_draws(params, 20, std::uint64_t(1000 + seed)));
      CHECK(fit.r <= 1.0);
      inside += (fit.r >= 0.95) ? 1 : 0;
    }
    CHECK(inside >= 190);
  }
}

TEST_CASE("shape estimate converges with sample size") {
  std::vector<double> betas;
  for (int seed = 0; seed < 100; ++seed) {
    betas.push_back(fit_weibull(weibull_draws({1.22, 10.69}, 100000, std::uint64_t(seed))).params.beta);
  }
  std::nth_element(betas.begin(), betas.begin() + 50, betas.end());
  CHECK(std::abs(betas[50] / 10.69 - 1.0) < 0.01);
}

TEST_CASE("Weibull moments") {
  for (const WeibullParams& p : {WeibullParams{1.22, 10.69}, WeibullParams{0.77, 7.21},
                                  WeibullParams{2.0, 1.5}}) {
    const MeanStd gamma_route = weibull_mean_std(p);
    const MeanStd quad = quadrature_moments(p);
    CHECK(gamma_route.mean == doctest::Approx(quad.mean).epsilon(1e-8));
    CHECK(gamma_route.std == doctest::Approx(quad.std).epsilon(1e-6));
  }
  const MeanStd front = weibull_mean_std({1.22, 10.69});
  CHECK(front.mean == doctest::Approx(1.1638617142).epsilon(1e-8));
  CHECK(front.std == doctest::Approx(0.1314632293).epsilon(1e-8));
  const MeanStd back = weibull_mean_std({0.77, 7.21});
  CHECK(back.mean == doctest::Approx(0.7213871022).epsilon(1e-8));

  const MeanStd sharp = weibull_mean_std({1.5, 1e6});
  CHECK(std::abs(sharp.mean - 1.5) < 1e-4 * 1.5);
  CHECK(sharp.std < 1e-4 * 1.5);
}
