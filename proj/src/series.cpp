#include "pimd_kubo/series.hpp"

#include <cmath>

namespace pimd_kubo {

void CorrelationSeries::validate() const {
  if (values.size() != times.size() || std_errors.size() != times.size())
    throw ValidationError("correlation series arrays differ in length");
  if (times.empty()) throw ValidationError("empty correlation series");
  if (times.front() != 0.0) throw ValidationError("correlation series must start at t = 0");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1])) throw ValidationError("correlation series times must ascend");
  for (double e : std_errors)
    if (!(e >= 0.0)) throw ValidationError("negative standard error");
}

double DensityTable::integral() const {
  double s = 0.0;
  for (double d : density) s += d * bin_width;
  return s;
}

double DensityTable::mean() const {
  double s = 0.0;
  for (std::size_t i = 0; i < centers.size(); ++i) s += centers[i] * density[i] * bin_width;
  return s / integral();
}

double DensityTable::variance() const {
  const double mu = mean();
  double s = 0.0;
  for (std::size_t i = 0; i < centers.size(); ++i) {
    const double d = centers[i] - mu;
    s += d * d * density[i] * bin_width;
  }
  return s / integral();
}

}  // namespace pimd_kubo
