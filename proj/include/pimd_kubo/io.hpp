#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "pimd_kubo/estimators.hpp"
#include "pimd_kubo/series.hpp"

namespace pimd_kubo {

// Shortest decimal string that parses back to exactly x.
std::string format_number(double x);

// t,value,std_error
std::string series_csv(const CorrelationSeries& series);
CorrelationSeries parse_series_csv(const std::string& text);

// t,method_value,oracle_value,diff,combined_se. The two series must share
// their time grid.
struct SeriesDiff {
  std::string csv;
  double max_abs_diff = 0.0;
  // max |diff| / combined_se over points with combined_se > 0
  double max_abs_diff_over_se = 0.0;
};
SeriesDiff diff_series(const CorrelationSeries& method, const CorrelationSeries& oracle);

// omega,intensity
std::string spectrum_csv(const Spectrum& s);

// q,density,std_error
std::string density_csv(const DensityTable& table);

void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace pimd_kubo
