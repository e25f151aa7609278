#include "doctest.h"

#include <bit>
#include <cmath>
#include <random>

#include "latclt/random.hpp"
#include "latclt/stats.hpp"
#include "oracles.hpp"

using namespace latclt;

TEST_CASE("set partitions") {
  CHECK(set_partitions(1).size() == 1);
  for (int r = 1; r <= 8; ++r) CHECK(static_cast<std::int64_t>(set_partitions(r).size()) == oracle::bell(r));
  CHECK(oracle::bell(3) == 5);
  CHECK(oracle::bell(6) == 203);
  // Every partition covers {0..r-1} with disjoint blocks.
  for (const SetPartition& p : set_partitions(5)) {
    std::uint32_t seen = 0;
    for (std::uint32_t b : p.blocks) {
      CHECK((seen & b) == 0u);
      seen |= b;
    }
    CHECK(seen == 31u);
  }
  CHECK_THROWS(set_partitions(0));
  CHECK_THROWS(set_partitions(13));
}

TEST_CASE("joint cumulant of order 2 is the covariance") {
  MomentTable m(2);
  m[1] = 0.3;
  m[2] = -1.2;
  m[3] = 2.0;
  CHECK(joint_cumulant(m) == doctest::Approx(2.0 - 0.3 * -1.2));
}

TEST_CASE("factorized tables have zero cumulant") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int r = 2; r <= 6; ++r) {
    const std::uint32_t I = (1u << (r / 2)) - 1u;  // first half
    const std::uint32_t full = (1u << r) - 1u;
    std::vector<double> mi(1u << r), mj(1u << r);
    for (auto& v : mi) v = u(rng);
    for (auto& v : mj) v = u(rng);
    const MomentTable m(r, [&](std::uint32_t s) {
      const std::uint32_t a = s & I;
      const std::uint32_t b = s & (full & ~I);
      return (a ? mi[a] : 1.0) * (b ? mj[b] : 1.0);
    });
    CHECK(std::abs(joint_cumulant(m)) < 1e-10);
  }
}

TEST_CASE("cumulant of a symmetric two-point variable") {
  const MomentTable m(3, [](std::uint32_t s) { return std::popcount(s) % 2 == 0 ? 1.0 : 0.0; });
  CHECK(joint_cumulant(m) == doctest::Approx(0.0));
  const EmpiricalDistribution pm({-1, 1, -1, 1});
  CHECK(empirical_cumulant(pm, 4) == doctest::Approx(-2.0));
  const EmpiricalDistribution constant({2.5, 2.5, 2.5, 2.5});
  for (int r = 2; r <= 6; ++r) CHECK(empirical_cumulant(constant, r) == 0.0);
}

TEST_CASE("Gaussian sample has small higher cumulants") {
  Rng rng = trial_rng(123, 0);
  std::vector<double> xs(100000);
  for (double& x : xs) x = standard_normal(rng);
  const EmpiricalDistribution e(xs);
  CHECK(std::abs(empirical_cumulant(e, 3)) < 0.05);
  CHECK(std::abs(empirical_cumulant(e, 4)) < 0.1);
  CHECK(empirical_cumulant(e, 2) == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("gaussian_cdf") {
  CHECK(gaussian_cdf(0.0) == 0.5);
  CHECK(std::abs(gaussian_cdf(1.0) - 0.8413447460685429) < 1e-12);
  for (double u = -4; u <= 4; u += 0.25) {
    CHECK(std::abs(gaussian_cdf(u) + gaussian_cdf(-u) - 1.0) < 1e-15);
    CHECK(std::abs(gaussian_cdf(u) - oracle::normal_cdf_series(u)) < 1e-10);
  }
}

TEST_CASE("ks_distance") {
  std::vector<double> q;
  const int n = 1000;
  // Normal quantiles by bisection on the oracle CDF.
  for (int i = 1; i <= n; ++i) {
    const double p = (i - 0.5) / n;
    double lo = -10, hi = 10;
    for (int k = 0; k < 100; ++k) {
      const double mid = 0.5 * (lo + hi);
      (oracle::normal_cdf_series(mid) < p ? lo : hi) = mid;
    }
    q.push_back(0.5 * (lo + hi));
  }
  CHECK(ks_distance(EmpiricalDistribution(q), 0.0, 1.0) < 0.002);
  CHECK(ks_distance(EmpiricalDistribution({-1, 1, -1, 1}), 0.0, 1.0) ==
        doctest::Approx(0.34134).epsilon(1e-4));
  std::mt19937_64 rng(9);
  std::exponential_distribution<double> ex;
  std::vector<double> s(500);
  for (double& x : s) x = ex(rng);
  const EmpiricalDistribution e(s);
  const double d = ks_distance(e, e.mean(), e.central_moment(2));
  CHECK(d >= 0.0);
  CHECK(d <= 1.0);
  CHECK_THROWS(ks_distance(e, 0.0, 0.0));
}

TEST_CASE("two-sample KS") {
  const EmpiricalDistribution a({1, 2, 3, 4});
  CHECK(ks_two_sample(a, a) == 0.0);
  CHECK(ks_two_sample(a, EmpiricalDistribution({10, 11})) == 1.0);
  CHECK(ks_two_sample(a, EmpiricalDistribution({2.5})) == doctest::Approx(0.5));
}

TEST_CASE("variance_series") {
  const std::vector<double> single{2.0};
  CHECK(variance_series(single, 0.5) == 1.5);
  const std::vector<double> flat{3.0, 1.0, 1.0, 1.0};
  CHECK(variance_series(flat, 1.0) == 2.0);
  const double v = 0.7, ms = 0.4, rho = 0.5;
  std::vector<double> geo;
  for (int k = 0; k <= 40; ++k) geo.push_back(ms + std::pow(rho, k) * v);
  CHECK(std::abs(variance_series(geo, ms) - 3 * v) < 1e-10);
}

TEST_CASE("summary_stats") {
  const SummaryStats s = summary_stats(EmpiricalDistribution({-1, 1, -1, 1}));
  CHECK(s.mean == 0.0);
  CHECK(s.variance == 1.0);
  CHECK(s.skewness == 0.0);
  CHECK(s.excess_kurtosis == doctest::Approx(-2.0));
  CHECK_THROWS_AS(summary_stats(EmpiricalDistribution({1, 1, 1, 1})), DegenerateSample);

  std::mt19937_64 rng(13);
  std::gamma_distribution<double> g(2.0);
  std::vector<double> xs(1000), ys;
  for (double& x : xs) x = g(rng);
  for (double x : xs) ys.push_back(3.0 * x - 7.0);
  const SummaryStats a = summary_stats(EmpiricalDistribution(xs));
  const SummaryStats b = summary_stats(EmpiricalDistribution(ys));
  CHECK(b.mean == doctest::Approx(3 * a.mean - 7));
  CHECK(b.variance == doctest::Approx(9 * a.variance));
  CHECK(b.skewness == doctest::Approx(a.skewness));
  CHECK(b.excess_kurtosis == doctest::Approx(a.excess_kurtosis));
}

TEST_CASE("least squares slope") {
  const std::vector<double> x{1, 2, 3, 4};
  const std::vector<double> y{-1, -4, -7, -10};
  CHECK(least_squares_slope(x, y) == doctest::Approx(-3.0));
}

TEST_CASE("stream seeds are distinct and reproducible") {
  CHECK(stream_seed(1, 2) == stream_seed(1, 2));
  CHECK(stream_seed(1, 2) != stream_seed(1, 3));
  CHECK(stream_seed(1, 2) != stream_seed(2, 2));
}
