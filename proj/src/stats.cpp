#include "latclt/stats.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

namespace latclt {

void for_each_set_partition(int r, const std::function<void(const SetPartition&)>& visit) {
  if (r < 1 || r > kMaxPartitionOrder) {
    throw std::invalid_argument("set partitions: order must lie in 1.." +
                                std::to_string(kMaxPartitionOrder));
  }
  // Restricted growth strings: a[0] = 0, a[i] <= 1 + max(a[0..i-1]).
  std::vector<int> a(static_cast<std::size_t>(r), 0);
  std::vector<int> prefix_max(static_cast<std::size_t>(r), 0);
  SetPartition p;
  while (true) {
    const int nblocks = prefix_max[static_cast<std::size_t>(r - 1)] + 1;
    p.blocks.assign(static_cast<std::size_t>(nblocks), 0u);
    for (int i = 0; i < r; ++i) p.blocks[static_cast<std::size_t>(a[static_cast<std::size_t>(i)])] |= 1u << i;
    visit(p);

    int i = r - 1;
    while (i > 0 && a[static_cast<std::size_t>(i)] > prefix_max[static_cast<std::size_t>(i - 1)]) --i;
    if (i == 0) return;
    ++a[static_cast<std::size_t>(i)];
    prefix_max[static_cast<std::size_t>(i)] =
        std::max(prefix_max[static_cast<std::size_t>(i - 1)], a[static_cast<std::size_t>(i)]);
    for (int j = i + 1; j < r; ++j) {
      a[static_cast<std::size_t>(j)] = 0;
      prefix_max[static_cast<std::size_t>(j)] = prefix_max[static_cast<std::size_t>(i)];
    }
  }
}

std::vector<SetPartition> set_partitions(int r) {
  std::vector<SetPartition> out;
  for_each_set_partition(r, [&out](const SetPartition& p) { out.push_back(p); });
  return out;
}

MomentTable::MomentTable(int r) : r_(r) {
  if (r < 1 || r > kMaxPartitionOrder) throw std::invalid_argument("moment table: bad order");
  values_.assign(std::size_t{1} << r, 0.0);
}

MomentTable::MomentTable(int r, const std::function<double(std::uint32_t)>& moment)
    : MomentTable(r) {
  for (std::uint32_t s = 1; s < values_.size(); ++s) {
    values_[s] = moment(s);
    if (!std::isfinite(values_[s])) throw std::invalid_argument("moment table: non-finite entry");
  }
}

double joint_cumulant(const MomentTable& moments) {
  const int r = moments.order();
  std::vector<double> factorial(static_cast<std::size_t>(r) + 1, 1.0);
  for (int i = 1; i <= r; ++i) factorial[static_cast<std::size_t>(i)] = factorial[static_cast<std::size_t>(i - 1)] * i;
  long double sum = 0.0L;
  for_each_set_partition(r, [&](const SetPartition& p) {
    const std::size_t k = p.size();
    long double term = (k % 2 == 1 ? 1.0L : -1.0L) * factorial[k - 1];
    for (std::uint32_t block : p.blocks) term *= moments[block];
    sum += term;
  });
  return static_cast<double>(sum);
}

EmpiricalDistribution::EmpiricalDistribution(std::vector<double> samples)
    : samples_(std::move(samples)), sorted_(samples_) {
  for (double x : samples_) {
    if (!std::isfinite(x)) throw std::invalid_argument("empirical distribution: non-finite sample");
  }
  std::sort(sorted_.begin(), sorted_.end());
}

double EmpiricalDistribution::mean() const {
  if (samples_.empty()) throw DegenerateSample("empty sample");
  long double s = 0.0L;
  for (double x : samples_) s += x;
  return static_cast<double>(s / samples_.size());
}

double EmpiricalDistribution::central_moment(int k) const {
  const double m = mean();
  long double s = 0.0L;
  for (double x : samples_) {
    const long double d = x - m;
    long double p = 1.0L;
    for (int i = 0; i < k; ++i) p *= d;
    s += p;
  }
  return static_cast<double>(s / samples_.size());
}

double empirical_cumulant(const EmpiricalDistribution& e, int r) {
  if (e.size() == 0) throw DegenerateSample("empirical cumulant of an empty sample");
  if (r < 1 || r > 6) throw std::invalid_argument("empirical cumulant: order must lie in 1..6");
  if (r == 1) return e.mean();
  // Cumulants of order >= 2 are shift invariant; centering keeps the
  // partition sum free of cancellation.
  std::vector<double> m(static_cast<std::size_t>(r) + 1, 0.0);
  for (int k = 1; k <= r; ++k) m[static_cast<std::size_t>(k)] = e.central_moment(k);
  m[1] = 0.0;
  const MomentTable table(r, [&m](std::uint32_t s) { return m[static_cast<std::size_t>(std::popcount(s))]; });
  return joint_cumulant(table);
}

double gaussian_cdf(double u) { return 0.5 * std::erfc(-u / std::numbers::sqrt2); }

double ks_distance(const EmpiricalDistribution& e, double mean, double variance) {
  if (!(variance > 0.0)) throw std::invalid_argument("ks_distance: variance must be > 0");
  const auto& xs = e.sorted();
  if (xs.empty()) throw DegenerateSample("ks_distance of an empty sample");
  const double n = static_cast<double>(xs.size());
  const double sd = std::sqrt(variance);
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = gaussian_cdf((xs[i] - mean) / sd);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return std::clamp(d, 0.0, 1.0);
}

double ks_two_sample(const EmpiricalDistribution& a, const EmpiricalDistribution& b) {
  const auto& xa = a.sorted();
  const auto& xb = b.sorted();
  if (xa.empty() || xb.empty()) throw DegenerateSample("ks_two_sample of an empty sample");
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < xa.size() && j < xb.size()) {
    const double v = std::min(xa[i], xb[j]);
    while (i < xa.size() && xa[i] == v) ++i;
    while (j < xb.size() && xb[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / xa.size() - static_cast<double>(j) / xb.size()));
  }
  return d;
}

double variance_series(std::span<const double> correlations, double mean_square) {
  if (correlations.empty()) throw std::invalid_argument("variance_series: need correlations[0]");
  long double s = correlations[0] - mean_square;
  for (std::size_t k = 1; k < correlations.size(); ++k) s += 2.0L * (correlations[k] - mean_square);
  return static_cast<double>(s);
}

SummaryStats summary_stats(const EmpiricalDistribution& e) {
  if (e.size() < 4) throw DegenerateSample("summary statistics need at least 4 samples");
  SummaryStats s;
  s.mean = e.mean();
  s.variance = e.central_moment(2);
  if (!(s.variance > 0.0)) throw DegenerateSample("zero variance: skewness and kurtosis undefined");
  s.skewness = e.central_moment(3) / std::pow(s.variance, 1.5);
  s.excess_kurtosis = e.central_moment(4) / (s.variance * s.variance) - 3.0;
  return s;
}

double least_squares_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("slope fit needs >= 2 points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw std::invalid_argument("slope fit needs distinct abscissae");
  return sxy / sxx;
}

}  // namespace latclt
