#pragma once

// Set partitions, joint cumulants and empirical distribution statistics.

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace latclt {

/// A partition of {0, ..., r-1}; each block is a bitmask. Blocks are sorted
/// by their smallest element.
struct SetPartition {
  std::vector<std::uint32_t> blocks;

  std::size_t size() const { return blocks.size(); }
  friend bool operator==(const SetPartition&, const SetPartition&) = default;
};

inline constexpr int kMaxPartitionOrder = 12;

/// All partitions of an r-set in restricted-growth-string order, 1 <= r <= 12.
std::vector<SetPartition> set_partitions(int r);
void for_each_set_partition(int r, const std::function<void(const SetPartition&)>& visit);

/// E[prod_{i in I} X_i] for every nonempty I, indexed by bitmask.
class MomentTable {
 public:
  explicit MomentTable(int r);
  MomentTable(int r, const std::function<double(std::uint32_t)>& moment);

  int order() const { return r_; }
  double operator[](std::uint32_t subset) const { return values_.at(subset); }
  double& operator[](std::uint32_t subset) { return values_.at(subset); }

 private:
  int r_;
  std::vector<double> values_;  // index 0 unused
};

/// sum over partitions P of (-1)^{|P|-1} (|P|-1)! prod_{I in P} M(I).
double joint_cumulant(const MomentTable& moments);

class DegenerateSample : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class EmpiricalDistribution {
 public:
  explicit EmpiricalDistribution(std::vector<double> samples);

  std::size_t size() const { return samples_.size(); }
  const std::vector<double>& samples() const { return samples_; }
  const std::vector<double>& sorted() const { return sorted_; }
  double mean() const;
  /// Plug-in central moment E[(X - mean)^k].
  double central_moment(int k) const;

 private:
  std::vector<double> samples_;
  std::vector<double> sorted_;
};

/// r-th cumulant from plug-in moments, 1 <= r <= 6.
double empirical_cumulant(const EmpiricalDistribution& e, int r);

double gaussian_cdf(double u);

/// sup_x |F_emp(x) - Phi((x - mean)/sqrt(variance))|.
double ks_distance(const EmpiricalDistribution& e, double mean, double variance);

/// sup_x |F_1(x) - F_2(x)| between two empirical distributions.
double ks_two_sample(const EmpiricalDistribution& a, const EmpiricalDistribution& b);

/// (c_0 - m) + 2 sum_{k=1}^{K} (c_k - m) for correlations c_k and m = meanSquare.
double variance_series(std::span<const double> correlations, double mean_square);

struct SummaryStats {
  double mean = 0.0;
  double variance = 0.0;
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
};

/// Plug-in mean, variance, skewness and excess kurtosis. Needs at least 4
/// samples; throws DegenerateSample when the variance is zero.
SummaryStats summary_stats(const EmpiricalDistribution& e);

/// Least-squares slope of y against x.
double least_squares_slope(std::span<const double> x, std::span<const double> y);

}  // namespace latclt
