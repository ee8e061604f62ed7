#include "pimd_kubo/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pimd_kubo/errors.hpp"

namespace pimd_kubo {

std::string format_number(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string series_csv(const CorrelationSeries& series) {
  series.validate();
  std::string out = "t,value,std_error\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    out += format_number(series.times[i]);
    out += ',';
    out += format_number(series.values[i]);
    out += ',';
    out += format_number(series.std_errors[i]);
    out += '\n';
  }
  return out;
}

namespace {

double parse_double(const std::string& s, std::size_t line) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ValidationError("line " + std::to_string(line) + ": not a number: '" + s + "'");
  return v;
}

}  // namespace

CorrelationSeries parse_series_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "t,value,std_error")
    throw ValidationError("expected header t,value,std_error");
  CorrelationSeries s;
  std::size_t n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 == std::string::npos ? c1 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
      throw ValidationError("line " + std::to_string(n) + ": expected three columns");
    s.times.push_back(parse_double(line.substr(0, c1), n));
    s.values.push_back(parse_double(line.substr(c1 + 1, c2 - c1 - 1), n));
    s.std_errors.push_back(parse_double(line.substr(c2 + 1), n));
  }
  s.validate();
  return s;
}

SeriesDiff diff_series(const CorrelationSeries& method, const CorrelationSeries& oracle) {
  if (method.size() != oracle.size()) throw ValidationError("series to compare differ in length");
  SeriesDiff d;
  d.csv = "t,method_value,oracle_value,diff,combined_se\n";
  for (std::size_t i = 0; i < method.size(); ++i) {
    if (std::abs(method.times[i] - oracle.times[i]) > 1e-12 * std::max(1.0, std::abs(method.times[i])))
      throw ValidationError("series to compare use different time grids");
    const double diff = method.values[i] - oracle.values[i];
    const double se = std::hypot(method.std_errors[i], oracle.std_errors[i]);
    d.max_abs_diff = std::max(d.max_abs_diff, std::abs(diff));
    if (se > 0.0) d.max_abs_diff_over_se = std::max(d.max_abs_diff_over_se, std::abs(diff) / se);
    d.csv += format_number(method.times[i]) + ',' + format_number(method.values[i]) + ',' +
             format_number(oracle.values[i]) + ',' + format_number(diff) + ',' + format_number(se) + '\n';
  }
  return d;
}

std::string spectrum_csv(const Spectrum& s) {
  std::string out = "omega,intensity\n";
  for (std::size_t i = 0; i < s.frequencies.size(); ++i)
    out += format_number(s.frequencies[i]) + ',' + format_number(s.intensity[i]) + '\n';
  return out;
}

std::string density_csv(const DensityTable& table) {
  std::string out = "q,density,std_error\n";
  for (std::size_t i = 0; i < table.centers.size(); ++i)
    out += format_number(table.centers[i]) + ',' + format_number(table.density[i]) + ',' +
           format_number(table.std_errors[i]) + '\n';
  return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw Error("failed writing " + path.string());
}

}  // namespace pimd_kubo
