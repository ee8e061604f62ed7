#include "pimd_kubo/stats.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pimd_kubo/errors.hpp"

namespace pimd_kubo {

void CompensatedSum::add(double x) {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x))
    compensation_ += (sum_ - t) + x;
  else
    compensation_ += (x - t) + sum_;
  sum_ = t;
}

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

std::vector<std::size_t> block_bounds(std::size_t n_samples, std::size_t n_blocks) {
  std::vector<std::size_t> bounds(n_blocks + 1);
  for (std::size_t b = 0; b <= n_blocks; ++b) bounds[b] = b * n_samples / n_blocks;
  return bounds;
}

double standard_error_from_block_means(std::span<const double> block_means) {
  const std::size_t nb = block_means.size();
  if (nb < 2) throw InsufficientSamples("need at least two blocks");
  const double mean = pairwise_sum(block_means) / static_cast<double>(nb);
  double ss = 0.0;
  for (double m : block_means) ss += (m - mean) * (m - mean);
  return std::sqrt(ss / static_cast<double>(nb - 1) / static_cast<double>(nb));
}

MeanWithError block_average(std::span<const double> samples, std::size_t n_blocks) {
  if (n_blocks < 2) throw ValidationError("block averaging needs at least two blocks");
  if (samples.size() < 2 * n_blocks)
    throw InsufficientSamples("block averaging needs at least " + std::to_string(2 * n_blocks) +
                              " samples, got " + std::to_string(samples.size()));
  const auto bounds = block_bounds(samples.size(), n_blocks);
  std::vector<double> means(n_blocks);
  for (std::size_t b = 0; b < n_blocks; ++b) {
    const auto block = samples.subspan(bounds[b], bounds[b + 1] - bounds[b]);
    means[b] = pairwise_sum(block) / static_cast<double>(block.size());
  }
  MeanWithError out;
  out.mean = pairwise_sum(samples) / static_cast<double>(samples.size());
  out.std_error = standard_error_from_block_means(means);
  return out;
}

double block_error(std::span<const double> samples, std::size_t n_blocks) {
  if (samples.size() < 32) throw InsufficientSamples("block_error needs at least 32 samples");
  return block_average(samples, n_blocks).std_error;
}

double kolmogorov_q(double lambda) {
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 200; ++j) {
    const double term = sign * std::exp(-2.0 * j * j * lambda * lambda);
    sum += term;
    if (std::abs(term) < 1e-16 * std::abs(sum)) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw InsufficientSamples("KS test needs two nonempty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const auto na = static_cast<double>(a.size());
  const auto nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = std::sqrt(na * nb / (na + nb));
  // Stephens' small-sample correction.
  const double lambda = (ne + 0.12 + 0.11 / ne) * d;
  return {d, kolmogorov_q(lambda)};
}

double sample_skewness(std::span<const double> samples) {
  const auto n = static_cast<double>(samples.size());
  const double mean = pairwise_sum(samples) / n;
  double m2 = 0.0;
  double m3 = 0.0;
  for (double x : samples) {
    const double d = x - mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= n;
  m3 /= n;
  return m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
}

SeriesAverage block_series_average(std::size_t n_samples, std::size_t n_times, const SeriesFill& fill,
                                   const Parallelism& par, std::size_t n_blocks) {
  if (n_blocks < 2) throw ValidationError("block averaging needs at least two blocks");
  if (n_samples < 2 * n_blocks)
    throw InsufficientSamples("need at least " + std::to_string(2 * n_blocks) + " samples, got " +
                              std::to_string(n_samples));
  const auto bounds = block_bounds(n_samples, n_blocks);
  std::vector<std::vector<double>> block_sums(n_blocks, std::vector<double>(n_times, 0.0));
  parallel_for(n_blocks, par, [&](std::size_t b) {
    std::vector<CompensatedSum> sums(n_times);
    std::vector<double> buffer(n_times);
    for (std::size_t i = bounds[b]; i < bounds[b + 1]; ++i) {
      fill(i, buffer);
      for (std::size_t t = 0; t < n_times; ++t) sums[t].add(buffer[t]);
    }
    for (std::size_t t = 0; t < n_times; ++t) block_sums[b][t] = sums[t].value();
  });
  SeriesAverage out;
  out.mean.resize(n_times);
  out.std_error.resize(n_times);
  std::vector<double> sums(n_blocks), means(n_blocks);
  for (std::size_t t = 0; t < n_times; ++t) {
    for (std::size_t b = 0; b < n_blocks; ++b) {
      sums[b] = block_sums[b][t];
      means[b] = sums[b] / static_cast<double>(bounds[b + 1] - bounds[b]);
    }
    out.mean[t] = pairwise_sum(sums) / static_cast<double>(n_samples);
    out.std_error[t] = standard_error_from_block_means(means);
  }
  return out;
}

}  // namespace pimd_kubo
