#include "pimd_kubo/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace pimd_kubo {

ConfigError::ConfigError(std::size_t line, std::size_t column, std::string key, const std::string& message)
    : ValidationError(line > 0 ? "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " +
                                     message
                               : message),
      line_(line),
      column_(column),
      key_(std::move(key)) {}

std::string to_string(Command c) {
  switch (c) {
    case Command::Static: return "static";
    case Command::Rpmd: return "rpmd";
    case Command::Cmd: return "cmd";
    case Command::Oracle: return "oracle";
    case Command::Compare: return "compare";
    case Command::Spectrum: return "spectrum";
    case Command::Convergence: return "convergence";
  }
  return "?";
}

std::string to_string(CorrelatorMethod m) {
  switch (m) {
    case CorrelatorMethod::Rpmd: return "rpmd";
    case CorrelatorMethod::Cmd: return "cmd";
    case CorrelatorMethod::Oracle: return "oracle";
    case CorrelatorMethod::HarmonicReference: return "harmonic_reference";
  }
  return "?";
}

std::vector<double> TableBlock::nodes() const {
  std::vector<double> g(n_nodes);
  for (std::size_t i = 0; i < n_nodes; ++i)
    g[i] = q_min + (q_max - q_min) * static_cast<double>(i) / static_cast<double>(n_nodes - 1);
  return g;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

bool is_identifier(const std::string& s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(),
                     [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

const std::set<std::string> kSections = {"model",   "thermo", "sampler",  "integrator", "observables", "grid",
                                         "table",   "spectrum", "compare", "static",     "convergence"};

struct RawEntry {
  std::string key;
  std::string value;
  std::size_t line;
  std::size_t key_column;
  std::size_t value_column;
  bool used = false;
};

struct RawSection {
  std::string name;  // empty for the top level
  std::size_t line = 0;
  std::vector<RawEntry> entries;
  bool used = false;
};

struct RawConfig {
  std::vector<RawSection> sections;  // sections[0] is the top level
  std::vector<ConfigEntry> entries;

  RawSection* find(const std::string& name) {
    for (auto& s : sections)
      if (s.name == name) return &s;
    return nullptr;
  }
};

RawConfig tokenize(const std::string& text) {
  RawConfig raw;
  raw.sections.push_back({});
  std::istringstream in(text);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const std::size_t indent = line.find_first_not_of(" \t") + 1;
    if (t.front() == '[') {
      if (t.back() != ']') throw ConfigError(n, indent, "", "unterminated section header");
      const std::string name = trim(t.substr(1, t.size() - 2));
      if (!kSections.contains(name))
        throw ConfigError(n, indent + 1, name, "unknown section [" + name + "]");
      if (raw.find(name)) throw ConfigError(n, indent + 1, name, "duplicate section [" + name + "]");
      raw.sections.push_back({name, n, {}, false});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(n, indent, "", "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!is_identifier(key)) throw ConfigError(n, indent, key, "invalid key '" + key + "'");
    const std::size_t value_col = value.empty() ? eq + 2 : line.find_first_not_of(" \t", eq + 1) + 1;
    if (value.empty()) throw ConfigError(n, value_col, key, "key '" + key + "' has no value");
    auto& sec = raw.sections.back();
    for (const auto& e : sec.entries)
      if (e.key == key)
        throw ConfigError(n, indent, key,
                          "duplicate key '" + key + "' (first set on line " + std::to_string(e.line) + ")");
    sec.entries.push_back({key, value, n, indent, value_col});
    raw.entries.push_back({sec.name, key, value});
  }
  return raw;
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] != b[j - 1] ? 1u : 0u)});
      diag = up;
    }
  }
  return row[b.size()];
}

std::string where(const RawSection& s) { return s.name.empty() ? "top level" : "[" + s.name + "]"; }

// Typed access to one section; every key must be consumed.
class Reader {
public:
  explicit Reader(RawSection& s) : s_(s) { s_.used = true; }

  RawEntry* find(const std::string& key) {
    for (auto& e : s_.entries)
      if (e.key == key) {
        e.used = true;
        return &e;
      }
    return nullptr;
  }

  RawEntry& require(const std::string& key) {
    if (auto* e = find(key)) return *e;
    // A misspelling is more useful to report than the key it displaced.
    for (const auto& e : s_.entries)
      if (!e.used && edit_distance(e.key, key) <= 2)
        throw ConfigError(e.line, e.key_column, e.key,
                          "unknown key '" + e.key + "' in " + where(s_) + " (did you mean '" + key + "'?)");
    throw ConfigError(s_.line, 1, key, "missing required key '" + key + "' in " + where(s_));
  }

  static double to_real(const RawEntry& e) {
    double v = 0.0;
    const auto res = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
    if (res.ec != std::errc() || res.ptr != e.value.data() + e.value.size() || !std::isfinite(v))
      throw ConfigError(e.line, e.value_column, e.key, "key '" + e.key + "' expects a real number, got '" +
                                                           e.value + "'");
    return v;
  }

  static std::uint64_t to_count(const RawEntry& e) {
    std::uint64_t v = 0;
    const auto res = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
    if (res.ec != std::errc() || res.ptr != e.value.data() + e.value.size())
      throw ConfigError(e.line, e.value_column, e.key, "key '" + e.key +
                                                           "' expects a non-negative integer, got '" + e.value +
                                                           "'");
    return v;
  }

  double real(const std::string& key) { return to_real(require(key)); }

  double real_or(const std::string& key, double fallback) {
    const auto* e = find(key);
    return e ? to_real(*e) : fallback;
  }

  double positive(const std::string& key) {
    auto& e = require(key);
    const double v = to_real(e);
    if (!(v > 0.0)) throw ConfigError(e.line, e.value_column, key, key + " must be > 0");
    return v;
  }

  std::uint64_t count(const std::string& key, std::uint64_t min = 0) {
    auto& e = require(key);
    return checked_count(e, min);
  }

  std::uint64_t count_or(const std::string& key, std::uint64_t fallback, std::uint64_t min = 0) {
    auto* e = find(key);
    return e ? checked_count(*e, min) : fallback;
  }

  std::string word(const std::string& key) { return require(key).value; }

  template <class T>
  T choice(const std::string& key, const std::map<std::string, T>& options) {
    auto& e = require(key);
    const auto it = options.find(e.value);
    if (it == options.end()) {
      std::string list;
      for (const auto& [name, _] : options) list += (list.empty() ? "" : ", ") + name;
      throw ConfigError(e.line, e.value_column, key,
                        "key '" + key + "' must be one of {" + list + "}, got '" + e.value + "'");
    }
    return it->second;
  }

  // Re-throws a block-level validation failure at the section header.
  [[noreturn]] void fail(const std::string& message) const {
    throw ConfigError(s_.line, 1, "", where(s_) + ": " + message);
  }

  void finish() const {
    for (const auto& e : s_.entries)
      if (!e.used)
        throw ConfigError(e.line, e.key_column, e.key,
                          "unknown or unused key '" + e.key + "' in " + where(s_));
  }

private:
  static std::uint64_t checked_count(const RawEntry& e, std::uint64_t min) {
    const auto v = to_count(e);
    if (v < min)
      throw ConfigError(e.line, e.value_column, e.key, e.key + " must be >= " + std::to_string(min));
    return v;
  }

  RawSection& s_;
};

PotentialModel read_model(Reader& r) {
  const auto kind = r.choice<PotentialKind>("kind", {{"harmonic", PotentialKind::Harmonic},
                                                     {"mildly_anharmonic", PotentialKind::MildlyAnharmonic},
                                                     {"quartic", PotentialKind::Quartic}});
  const double mass = r.positive("mass");
  try {
    switch (kind) {
      case PotentialKind::Harmonic: return PotentialModel::harmonic(mass, r.positive("omega"));
      case PotentialKind::MildlyAnharmonic: {
        const double omega = r.positive("omega");
        const double c3 = r.real("c3");
        const double c4 = r.real("c4");
        return PotentialModel::mildly_anharmonic(mass, omega, c3, c4);
      }
      case PotentialKind::Quartic: return PotentialModel::quartic(mass, r.positive("a4"));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const ValidationError& e) {
    r.fail(e.what());
  }
  r.fail("unknown model kind");
}

bool uses_rpmd(const RunConfig& c) {
  return c.command == Command::Rpmd ||
         (c.command == Command::Compare && c.compare_method == CorrelatorMethod::Rpmd) ||
         (c.command == Command::Spectrum && c.spectrum && c.spectrum->method == CorrelatorMethod::Rpmd);
}

bool uses_cmd(const RunConfig& c) {
  return c.command == Command::Cmd ||
         (c.command == Command::Compare && c.compare_method == CorrelatorMethod::Cmd) ||
         (c.command == Command::Spectrum && c.spectrum && c.spectrum->method == CorrelatorMethod::Cmd);
}

}  // namespace

Observable parse_observable(const std::string& label) {
  if (label == "q") return Observable::q();
  if (label == "p") return Observable::momentum();
  if (label == "q2") return Observable::q2();
  if (label == "q3") return Observable::q3();
  if (label == "q4") return Observable::q4();
  if (label.starts_with("poly(") && label.back() == ')') {
    std::vector<double> coeffs;
    std::istringstream in(label.substr(5, label.size() - 6));
    std::string item;
    while (std::getline(in, item, ',')) {
      const std::string t = trim(item);
      double v = 0.0;
      const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
      if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size() || !std::isfinite(v))
        throw ValidationError("bad polynomial coefficient '" + t + "' in " + label);
      coeffs.push_back(v);
    }
    if (coeffs.empty()) throw ValidationError("polynomial needs at least one coefficient");
    return Observable::polynomial(label, std::move(coeffs));
  }
  throw ValidationError("unknown observable '" + label + "' (expected q, p, q2, q3, q4 or poly(c0, c1, ...))");
}

RunConfig parse_config(const std::string& text) {
  RawConfig raw = tokenize(text);
  RunConfig cfg;
  cfg.entries = raw.entries;

  Reader top(raw.sections[0]);
  cfg.command = top.choice<Command>("command", {{"static", Command::Static},
                                                {"rpmd", Command::Rpmd},
                                                {"cmd", Command::Cmd},
                                                {"oracle", Command::Oracle},
                                                {"compare", Command::Compare},
                                                {"spectrum", Command::Spectrum},
                                                {"convergence", Command::Convergence}});
  cfg.output_dir = top.word("output_dir");
  cfg.seed = top.count("seed");
  top.finish();

  const Command cmd = cfg.command;
  auto section = [&](const std::string& name) -> RawSection& {
    if (auto* s = raw.find(name)) return *s;
    throw ConfigError(0, 0, name, "command " + to_string(cmd) + " needs section [" + name + "]");
  };

  // Method selectors first: they decide which other sections are needed.
  if (cmd == Command::Compare) {
    Reader r(section("compare"));
    cfg.compare_method = r.choice<CorrelatorMethod>("method", {{"rpmd", CorrelatorMethod::Rpmd},
                                                               {"cmd", CorrelatorMethod::Cmd},
                                                               {"harmonic_reference",
                                                                CorrelatorMethod::HarmonicReference}});
    r.finish();
  }
  if (cmd == Command::Spectrum) {
    Reader r(section("spectrum"));
    SpectrumBlock b;
    b.method = r.choice<CorrelatorMethod>("method", {{"rpmd", CorrelatorMethod::Rpmd},
                                                     {"cmd", CorrelatorMethod::Cmd},
                                                     {"oracle", CorrelatorMethod::Oracle}});
    b.window = r.choice<Window>("window", {{"none", Window::None}, {"hann", Window::Hann}});
    b.oversample = r.count("oversample", 1);
    r.finish();
    cfg.spectrum = b;
  }
  const bool is_static = cmd == Command::Static || cmd == Command::Convergence;
  const bool needs_grid = cmd == Command::Oracle || cmd == Command::Compare || cmd == Command::Convergence ||
                          (cmd == Command::Spectrum && cfg.spectrum->method == CorrelatorMethod::Oracle);
  const bool needs_sampler = cmd != Command::Oracle &&
                             !(cmd == Command::Spectrum && cfg.spectrum->method == CorrelatorMethod::Oracle);
  const bool needs_table = uses_cmd(cfg);

  {
    Reader r(section("model"));
    cfg.model = read_model(r);
    r.finish();
  }
  {
    Reader r(section("thermo"));
    ThermoParams t;
    t.beta = r.positive("beta");
    if (cmd != Command::Oracle && cmd != Command::Convergence)
      t.n_beads = static_cast<int>(r.count("n_beads", 1));
    t.hbar = r.find("hbar") ? r.positive("hbar") : 1.0;
    r.finish();
    cfg.thermo = t;
  }
  if (needs_sampler) {
    Reader r(section("sampler"));
    SamplerConfig s;
    s.n_samples = r.count("n_samples", 1);
    s.burn_in = r.count("burn_in");
    s.decorrelation_stride = r.count("stride", 1);
    s.move_scale = r.positive("move_scale");
    s.target_acceptance = r.real_or("target_acceptance", 0.4);
    s.n_blocks = r.count_or("blocks", kDefaultBlocks, 2);
    s.seed = cfg.seed;
    r.finish();
    try {
      s.validate();
    } catch (const ValidationError& e) {
      r.fail(e.what());
    }
    cfg.sampler = s;
  }
  if (!is_static) {
    Reader r(section("integrator"));
    IntegratorConfig ic;
    ic.dt = r.positive("dt");
    ic.n_steps = r.count("n_steps", 1);
    ic.record_stride = r.count("record_stride", 1);
    r.finish();
    cfg.integrator = ic;
  }
  {
    Reader r(section("observables"));
    ObservablesBlock ob;
    auto observable = [&](const std::string& key) {
      auto& e = r.require(key);
      try {
        return parse_observable(e.value);
      } catch (const ValidationError& err) {
        throw ConfigError(e.line, e.value_column, key, err.what());
      }
    };
    ob.a = observable("A");
    if (!is_static) ob.b = observable("B");
    if (uses_rpmd(cfg))
      ob.convention = r.choice<MomentumConvention>(
          "convention", {{"bead", MomentumConvention::Bead}, {"bond_midpoint", MomentumConvention::BondMidpoint}});
    r.finish();
    cfg.observables = ob;
  }
  if (needs_grid) {
    Reader r(section("grid"));
    GridBlock g;
    g.grid.q_min = r.real("q_min");
    g.grid.q_max = r.real("q_max");
    g.grid.n_points = r.count("n_points", 64);
    g.n_states = r.count("n_states", 1);
    r.finish();
    try {
      g.grid.validate();
      if (g.n_states > g.grid.n_points) throw ValidationError("n_states exceeds n_points");
    } catch (const ValidationError& e) {
      r.fail(e.what());
    }
    cfg.grid = g;
  }
  if (needs_table) {
    Reader r(section("table"));
    TableBlock t;
    t.q_min = r.real("q_min");
    t.q_max = r.real("q_max");
    t.n_nodes = r.count("n_nodes", 2);
    t.n_samples = r.count("n_samples", 1);
    t.burn_in = r.count("burn_in");
    t.stride = r.count("stride", 1);
    r.finish();
    if (!(t.q_min < t.q_max)) r.fail("q_min must be < q_max");
    cfg.table = t;
  }
  if (cmd == Command::Static) {
    Reader r(section("static"));
    cfg.static_estimator = r.choice<StaticEstimator>(
        "estimator", {{"plain", StaticEstimator::Plain}, {"virial_cv", StaticEstimator::VirialCv}});
    r.finish();
  }
  if (cmd == Command::Convergence) {
    Reader r(section("convergence"));
    ConvergenceBlock b;
    auto& e = r.require("n_beads");
    std::istringstream in(e.value);
    std::string item;
    while (std::getline(in, item, ',')) {
      RawEntry one = e;
      one.value = trim(item);
      const auto v = Reader::to_count(one);
      if (v < 1) throw ConfigError(e.line, e.value_column, "n_beads", "n_beads must be >= 1");
      b.n_beads.push_back(static_cast<int>(v));
    }
    b.estimator = r.choice<StaticEstimator>(
        "estimator", {{"plain", StaticEstimator::Plain}, {"virial_cv", StaticEstimator::VirialCv}});
    r.finish();
    cfg.convergence = b;
  }

  // Sections present in the file but not used by this command.
  for (const auto& s : raw.sections)
    if (!s.name.empty() && !s.used)
      throw ConfigError(s.line, 1, s.name,
                        "section [" + s.name + "] is not used by command " + to_string(cmd));

  if (cmd == Command::Convergence && cfg.observables->a.is_momentum())
    throw ConfigError(0, 0, "A", "convergence needs a position observable A");
  if (uses_cmd(cfg) && !(cfg.observables->a.is_momentum() || cfg.observables->a.is_linear_position()))
    throw ConfigError(0, 0, "A", "CMD correlators need A = q or A = p");
  return cfg;
}

}  // namespace pimd_kubo
