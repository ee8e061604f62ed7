#pragma once

#include <map>
#include <string>
#include <vector>

#include "pimd_kubo/errors.hpp"

namespace pimd_kubo {

// C~_AB(t) on a time grid with standard errors (zero for exact references).
struct CorrelationSeries {
  std::vector<double> times;
  std::vector<double> values;
  std::vector<double> std_errors;
  std::map<std::string, std::string> metadata;
  Warnings warnings;

  std::size_t size() const { return times.size(); }
  // lengths equal, times ascending from 0, std_errors >= 0
  void validate() const;
};

// Histogram density on uniform bins; integrates to one over the bins.
struct DensityTable {
  std::vector<double> centers;
  std::vector<double> density;
  std::vector<double> std_errors;
  double bin_width = 0.0;
  // Variance of the analytic Gaussian momentum factor paired with the density.
  double momentum_variance = 0.0;
  std::size_t n_samples = 0;
  std::size_t n_outside = 0;
  // Moments of the raw samples (not the histogram), with block errors.
  double sample_mean = 0.0;
  double sample_variance = 0.0;
  double sample_variance_se = 0.0;
  std::map<std::string, std::string> metadata;

  double integral() const;
  double mean() const;
  double variance() const;
};

}  // namespace pimd_kubo
