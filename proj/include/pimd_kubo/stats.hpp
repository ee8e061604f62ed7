#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "pimd_kubo/parallel.hpp"

namespace pimd_kubo {

// Neumaier-compensated running sum.
class CompensatedSum {
public:
  void add(double x);
  double value() const { return sum_ + compensation_; }

private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

// Pairwise summation in index order; result depends only on the values.
double pairwise_sum(std::span<const double> values);

struct MeanWithError {
  double mean = 0.0;
  double std_error = 0.0;
};

inline constexpr std::size_t kDefaultBlocks = 16;

// Contiguous block boundaries: block b covers [bounds[b], bounds[b+1]).
std::vector<std::size_t> block_bounds(std::size_t n_samples, std::size_t n_blocks);

// Mean and block-averaged standard error of the mean. Needs at least
// 2 * n_blocks samples; throws InsufficientSamples otherwise.
MeanWithError block_average(std::span<const double> samples, std::size_t n_blocks = kDefaultBlocks);

// Standard error only, for one time point. Needs >= 32 samples.
double block_error(std::span<const double> samples, std::size_t n_blocks = kDefaultBlocks);

// Standard error of the mean from per-block means (equal-weight blocks).
double standard_error_from_block_means(std::span<const double> block_means);

// Two-sample Kolmogorov-Smirnov statistic and asymptotic p-value.
struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

// Survival function of the Kolmogorov distribution, Q(lambda).
double kolmogorov_q(double lambda);

double sample_skewness(std::span<const double> samples);

// Mean and block standard error of a per-sample time series.
struct SeriesAverage {
  std::vector<double> mean;
  std::vector<double> std_error;
};

// fill(i, out) writes the length-n_times series of sample i into out.
// Samples are split into n_blocks contiguous blocks; each block is summed
// sequentially with compensation, so the result does not depend on the
// number of workers.
using SeriesFill = std::function<void(std::size_t sample, std::span<double> out)>;
SeriesAverage block_series_average(std::size_t n_samples, std::size_t n_times, const SeriesFill& fill,
                                   const Parallelism& par = {}, std::size_t n_blocks = kDefaultBlocks);

}  // namespace pimd_kubo
