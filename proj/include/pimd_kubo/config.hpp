#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pimd_kubo/dynamics.hpp"
#include "pimd_kubo/errors.hpp"
#include "pimd_kubo/estimators.hpp"
#include "pimd_kubo/model.hpp"
#include "pimd_kubo/oracle.hpp"
#include "pimd_kubo/ringpoly.hpp"
#include "pimd_kubo/sampler.hpp"

namespace pimd_kubo {

// Parse or validation error at a position in the config text. line and
// column are 1-based; 0 means the error is not tied to a position.
class ConfigError : public ValidationError {
public:
  ConfigError(std::size_t line, std::size_t column, std::string key, const std::string& message);

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }
  const std::string& key() const { return key_; }

private:
  std::size_t line_;
  std::size_t column_;
  std::string key_;
};

enum class Command { Static, Rpmd, Cmd, Oracle, Compare, Spectrum, Convergence };
std::string to_string(Command c);

enum class StaticEstimator { Plain, VirialCv };
enum class CorrelatorMethod { Rpmd, Cmd, Oracle, HarmonicReference };
std::string to_string(CorrelatorMethod m);

struct ObservablesBlock {
  Observable a = Observable::q();
  std::optional<Observable> b;
  MomentumConvention convention = MomentumConvention::Bead;
};

struct GridBlock {
  GridSpec grid;
  std::size_t n_states = 0;
};

struct TableBlock {
  double q_min = 0.0;
  double q_max = 0.0;
  std::size_t n_nodes = 0;
  std::size_t n_samples = 0;
  std::size_t burn_in = 0;
  std::size_t stride = 1;

  std::vector<double> nodes() const;
};

struct SpectrumBlock {
  CorrelatorMethod method = CorrelatorMethod::Rpmd;
  Window window = Window::None;
  std::size_t oversample = 8;
};

struct ConvergenceBlock {
  std::vector<int> n_beads;
  StaticEstimator estimator = StaticEstimator::Plain;
};

// One key = value line as written, for the provenance echo.
struct ConfigEntry {
  std::string section;  // empty for top-level keys
  std::string key;
  std::string value;
};

struct RunConfig {
  Command command = Command::Static;
  std::string output_dir;
  std::uint64_t seed = 0;

  std::optional<PotentialModel> model;
  std::optional<ThermoParams> thermo;
  std::optional<SamplerConfig> sampler;
  std::optional<IntegratorConfig> integrator;
  std::optional<ObservablesBlock> observables;
  std::optional<GridBlock> grid;
  std::optional<TableBlock> table;
  std::optional<SpectrumBlock> spectrum;
  std::optional<CorrelatorMethod> compare_method;
  std::optional<StaticEstimator> static_estimator;
  std::optional<ConvergenceBlock> convergence;

  std::vector<ConfigEntry> entries;
};

// Strict parse: unknown sections or keys, duplicates, missing required keys,
// sections the command does not use, and invalid values are all errors.
RunConfig parse_config(const std::string& text);

// Observable from a label: q, p, q2, q3, q4 or poly(c0, c1, ...).
Observable parse_observable(const std::string& label);

}  // namespace pimd_kubo
