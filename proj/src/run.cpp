#include "pimd_kubo/run.hpp"

#include <json.hpp>

#include <chrono>
#include <fstream>
#include <map>
#include <ostream>

#include "pimd_kubo/dynamics.hpp"
#include "pimd_kubo/estimators.hpp"
#include "pimd_kubo/io.hpp"
#include "pimd_kubo/oracle.hpp"
#include "pimd_kubo/sampler.hpp"

namespace pimd_kubo {

namespace {

using Json = nlohmann::ordered_json;

// Everything a command produces, written in one go at the end.
struct Artifacts {
  std::map<std::string, std::string> files;
  Json summary = Json::object();
  Warnings warnings;

  void add_warnings(const Warnings& w) { warnings.insert(warnings.end(), w.begin(), w.end()); }
};

Json series_summary(const CorrelationSeries& s) {
  Json j = Json::object();
  for (const auto& [k, v] : s.metadata) j[k] = v;
  return j;
}

SamplerConfig table_sampler(const RunConfig& cfg) {
  SamplerConfig s = *cfg.sampler;
  s.n_samples = cfg.table->n_samples;
  s.burn_in = cfg.table->burn_in;
  s.decorrelation_stride = cfg.table->stride;
  return s;
}

CorrelationSeries oracle_series(const RunConfig& cfg, Artifacts& art) {
  const auto& th = *cfg.thermo;
  const auto eig = diagonalize(*cfg.model, cfg.grid->grid, cfg.grid->n_states, th.hbar);
  auto series = exact_kubo_correlator(eig, cfg.observables->a, *cfg.observables->b, th.beta,
                                      cfg.integrator->record_times());
  Json energies = Json::array();
  for (Eigen::Index n = 0; n < std::min<Eigen::Index>(eig.energies().size(), 10); ++n)
    energies.push_back(eig.energies()[n]);
  art.summary["oracle"] = {{"lowest_energies", energies},
                           {"max_residual", eig.max_residual()},
                           {"max_boundary_amplitude", eig.max_boundary_amplitude()},
                           {"imag_residue", series.metadata["imag_residue"]}};
  return series;
}

CorrelationSeries method_series(CorrelatorMethod method, const RunConfig& cfg, const RunOptions& opt,
                                Artifacts& art) {
  const auto& ob = *cfg.observables;
  switch (method) {
    case CorrelatorMethod::Rpmd: {
      auto s = rpmd_kubo_correlator(*cfg.model, *cfg.thermo, *cfg.sampler, *cfg.integrator, ob.a, *ob.b,
                                    ob.convention, opt.par);
      art.add_warnings(s.warnings);
      return s;
    }
    case CorrelatorMethod::Cmd: {
      const auto table =
          build_centroid_force_table(*cfg.model, *cfg.thermo, table_sampler(cfg), cfg.table->nodes(), opt.par);
      std::string csv = "q,force,std_error\n";
      for (std::size_t i = 0; i < table.grid().size(); ++i)
        csv += format_number(table.grid()[i]) + ',' + format_number(table.force()[i]) + ',' +
               format_number(table.std_error()[i]) + '\n';
      art.files["table.csv"] = csv;
      auto s = cmd_kubo_correlator(*cfg.model, *cfg.thermo, table, *cfg.sampler, *cfg.integrator, ob.a, *ob.b,
                                   opt.par);
      art.add_warnings(s.warnings);
      return s;
    }
    case CorrelatorMethod::Oracle: return oracle_series(cfg, art);
    case CorrelatorMethod::HarmonicReference: {
      if (!ob.b->is_linear_position())
        throw ValidationError("harmonic_reference evaluates C_Aq only; B must be q");
      auto s = harmonic_caq_reference(*cfg.model, *cfg.thermo, ob.a, cfg.integrator->record_times(),
                                      *cfg.sampler, opt.par);
      art.add_warnings(s.warnings);
      return s;
    }
  }
  throw ValidationError("unsupported method");
}

MeanWithError static_estimate(const Observable& a, const Ensemble& ensemble, const PotentialModel& model,
                              StaticEstimator estimator) {
  if (estimator == StaticEstimator::VirialCv) {
    if (!a.is_position()) throw ValidationError("virial_cv needs a position observable");
    return estimate_static_average_virial_cv(a, ensemble, model, ensemble.n_blocks);
  }
  return estimate_static_average(a, ensemble, ensemble.n_blocks);
}

std::string single_row_csv(const MeanWithError& m) {
  return "t,value,std_error\n0," + format_number(m.mean) + ',' + format_number(m.std_error) + '\n';
}

Artifacts execute(const RunConfig& cfg, const RunOptions& opt) {
  Artifacts art;
  const auto& model = *cfg.model;
  switch (cfg.command) {
    case Command::Static: {
      const auto ensemble = sample_ring_positions(model, *cfg.thermo, *cfg.sampler, opt.par);
      art.add_warnings(ensemble.diagnostics.warnings);
      const auto m = static_estimate(cfg.observables->a, ensemble, model, *cfg.static_estimator);
      art.files["results.csv"] = single_row_csv(m);
      art.summary["static"] = {{"observable", cfg.observables->a.label()},
                               {"value", m.mean},
                               {"std_error", m.std_error},
                               {"move_acceptance", ensemble.diagnostics.move_acceptance},
                               {"translation_acceptance", ensemble.diagnostics.translation_acceptance}};
      break;
    }
    case Command::Rpmd:
    case Command::Cmd: {
      const auto method = cfg.command == Command::Rpmd ? CorrelatorMethod::Rpmd : CorrelatorMethod::Cmd;
      const auto s = method_series(method, cfg, opt, art);
      art.files["results.csv"] = series_csv(s);
      art.summary["series"] = series_summary(s);
      break;
    }
    case Command::Oracle: {
      const auto s = oracle_series(cfg, art);
      art.files["results.csv"] = series_csv(s);
      art.summary["series"] = series_summary(s);
      break;
    }
    case Command::Compare: {
      const auto s = method_series(*cfg.compare_method, cfg, opt, art);
      const auto o = oracle_series(cfg, art);
      const auto d = diff_series(s, o);
      art.files["results.csv"] = series_csv(s);
      art.files["diff.csv"] = d.csv;
      art.summary["series"] = series_summary(s);
      art.summary["compare"] = {{"max_abs_diff", d.max_abs_diff},
                                {"max_abs_diff_over_se", d.max_abs_diff_over_se}};
      break;
    }
    case Command::Spectrum: {
      const auto s = method_series(cfg.spectrum->method, cfg, opt, art);
      const auto sp = spectrum(s, cfg.spectrum->window, cfg.spectrum->oversample);
      art.files["results.csv"] = series_csv(s);
      art.files["spectrum.csv"] = spectrum_csv(sp);
      Json peaks = Json::array();
      const auto found = find_peaks(sp);
      for (std::size_t i = 0; i < std::min<std::size_t>(found.size(), 5); ++i)
        peaks.push_back({{"omega", found[i].frequency}, {"intensity", found[i].intensity}});
      art.summary["series"] = series_summary(s);
      art.summary["spectrum"] = {{"window", to_string(cfg.spectrum->window)},
                                 {"oversample", cfg.spectrum->oversample},
                                 {"strongest_peaks", peaks}};
      break;
    }
    case Command::Convergence: {
      const auto& th = *cfg.thermo;
      const auto& a = cfg.observables->a;
      const auto eig = diagonalize(model, cfg.grid->grid, cfg.grid->n_states, th.hbar);
      const double exact = thermal_average(eig, a, th.beta);
      std::string csv = "n_beads,value,std_error,exact,error\n";
      Json rows = Json::array();
      MeanWithError last;
      for (int n : cfg.convergence->n_beads) {
        ThermoParams t = th;
        t.n_beads = n;
        const auto ensemble = sample_ring_positions(model, t, *cfg.sampler, opt.par);
        art.add_warnings(ensemble.diagnostics.warnings);
        last = static_estimate(a, ensemble, model, cfg.convergence->estimator);
        csv += std::to_string(n) + ',' + format_number(last.mean) + ',' + format_number(last.std_error) + ',' +
               format_number(exact) + ',' + format_number(last.mean - exact) + '\n';
        rows.push_back({{"n_beads", n}, {"value", last.mean}, {"std_error", last.std_error},
                        {"error", last.mean - exact}});
      }
      art.files["convergence.csv"] = csv;
      art.files["results.csv"] = single_row_csv(last);
      art.summary["convergence"] = {{"observable", a.label()}, {"exact", exact}, {"rows", rows}};
      break;
    }
  }
  return art;
}

Json config_echo(const RunConfig& cfg) {
  Json j = Json::object();
  for (const auto& e : cfg.entries) {
    if (e.section.empty())
      j[e.key] = e.value;
    else
      j[e.section][e.key] = e.value;
  }
  return j;
}

}  // namespace

int run(const std::string& config_text, const RunOptions& options, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  try {
    const RunConfig cfg = parse_config(config_text);
    const std::filesystem::path out_dir = options.output_dir.value_or(cfg.output_dir);
    if (out_dir.empty()) throw ValidationError("output_dir is empty");
    if (std::filesystem::exists(out_dir) && !std::filesystem::is_directory(out_dir))
      throw ValidationError("output_dir " + out_dir.string() + " exists and is not a directory");
    if (options.verbosity > 0) log << "running " << to_string(cfg.command) << '\n';

    Artifacts art = execute(cfg, options);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    Json meta = Json::object();
    meta["command"] = to_string(cfg.command);
    meta["version"] = kVersion;
    meta["seed"] = cfg.seed;
    meta["config"] = config_echo(cfg);
    meta["config_text"] = config_text;
    meta["wall_time_seconds"] = wall;
    Json files = Json::array();
    for (const auto& [name, _] : art.files) files.push_back(name);
    meta["artifacts"] = files;
    Json warnings = Json::array();
    for (const auto& w : art.warnings) {
      warnings.push_back({{"code", w.code}, {"message", w.message}});
      log << "warning: " << w.code << ": " << w.message << '\n';
    }
    meta["warnings"] = warnings;
    for (auto& [k, v] : art.summary.items()) meta[k] = v;
    if (art.summary.contains("compare"))
      meta["max_abs_diff_over_combined_se"] = art.summary["compare"]["max_abs_diff_over_se"];

    std::filesystem::create_directories(out_dir);
    for (const auto& [name, text] : art.files) write_text_file(out_dir / name, text);
    write_text_file(out_dir / "meta.json", meta.dump(2) + '\n');
    if (options.verbosity > 0) log << "wrote " << art.files.size() + 1 << " files to " << out_dir.string() << '\n';
    return kExitOk;
  } catch (const ValidationError& e) {
    log << "validation error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const UnsupportedObservable& e) {
    log << "validation error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    log << "runtime error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace pimd_kubo
