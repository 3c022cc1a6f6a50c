// Copyright 2026 The piezowim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// piezowim command-line front end.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "piezowim/piezowim.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace piezowim;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Globals {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  bool strict = false;
};

RunConfig run_config(const Globals& g) {
  if (g.config.empty()) return RunConfig{};
  ConfigParseResult r = load_config(g.config, g.strict);
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
  return r.config;
}

fs::path output_dir(const Globals& g, const RunConfig& cfg) {
  fs::path dir = g.out.empty() ? fs::path(cfg.output_dir) : fs::path(g.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (!fs::is_directory(dir)) throw IoError("cannot create output directory: " + dir.string());
  return dir;
}

double parse_resistance(const std::string& s) {
  auto v = try_parse_double(s);
  if (!v || !(*v > 0)) throw ValidationError("load resistance must be a positive number or inf");
  return *v;
}

/// Writes every table and then the metadata sidecar. Nothing lands on disk
/// until all results exist.
void write_outputs(const fs::path& dir, const std::string& command, const Globals& g,
                   const RunConfig& cfg, json params,
                   const std::vector<std::pair<std::string, Table>>& tables) {
  std::vector<std::pair<fs::path, std::string>> files;
  json meta;
  meta["command"] = command;
  meta["version"] = kVersion;
  meta["seed"] = g.seed;
  meta["config_file"] = g.config;
  meta["config"] = serialize_config(cfg);
  meta["parameters"] = std::move(params);
  meta["outputs"] = json::array();
  for (const auto& [name, table] : tables) {
    files.emplace_back(dir / name, to_csv(table));
    meta["outputs"].push_back({{"file", name}, {"rows", table.size()}, {"columns", table.header}});
  }
  files.emplace_back(dir / (command + ".meta.json"), meta.dump(2) + "\n");
  for (const auto& [path, content] : files) write_file_atomic(path, content);
}

std::optional<TipMass> tip_from(const RunConfig& cfg, double tip_mass_g) {
  TipMass t = cfg.tip;
  if (tip_mass_g >= 0) t.mass = tip_mass_g / 1e3;
  t.validate();
  if (t.mass > 0) return t;
  return std::nullopt;
}

std::vector<double> frequency_grid(double fmin, double fmax, int points, bool log_spacing) {
  detail::require(fmin > 0 && fmax > fmin, "frequency grid needs 0 < fmin < fmax");
  detail::require(points >= 2, "frequency grid needs at least 2 points");
  std::vector<double> f(points);
  for (int k = 0; k < points; ++k) {
    const double u = static_cast<double>(k) / (points - 1);
    f[k] = log_spacing ? fmin * std::pow(fmax / fmin, u) : fmin + u * (fmax - fmin);
  }
  return f;
}

// Console figures; files keep full precision.
std::string show(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

double arg_deg(std::complex<double> z) { return std::arg(z) * 180 / std::numbers::pi; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bimorph harvester, pavement sensing and energy-budget simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  Globals g;
  app.add_option("--config", g.config, "INI run configuration")->check(CLI::ExistingFile);
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--seed", g.seed, "Seed for stochastic operations");
  app.add_flag("--strict", g.strict, "Reject unknown config keys and treat warnings as errors");

  // modal
  auto* modal = app.add_subcommand("modal", "Short- and open-circuit natural frequencies");
  int modal_elements = 0, modal_modes = 5;
  double modal_tip_g = -1;
  bool export_matrices = false;
  modal->add_option("--elements", modal_elements, "Mesh size (default from config)");
  modal->add_option("--modes", modal_modes, "Number of modes")->check(CLI::PositiveNumber);
  modal->add_option("--tip-mass-g", modal_tip_g, "Tip mass [g]");
  modal->add_flag("--export-matrices", export_matrices, "Also write M, K and Theta as CSV");

  // frf
  auto* frf = app.add_subcommand("frf", "Voltage and tip-velocity FRFs per g");
  std::string frf_rl = "100";
  double frf_fmin = 5, frf_fmax = 150, frf_tip_g = -1;
  int frf_points = 1000, frf_units = 1, frf_modes = 5;
  bool frf_log = false;
  frf->add_option("--rl-ohm", frf_rl, "Load resistance per unit [Ohm] or inf");
  frf->add_option("--fmin", frf_fmin, "Lowest frequency [Hz]");
  frf->add_option("--fmax", frf_fmax, "Highest frequency [Hz]");
  frf->add_option("--points", frf_points, "Grid points");
  frf->add_option("--tip-mass-g", frf_tip_g, "Tip mass [g]");
  frf->add_option("--units", frf_units, "Identical units in series")->check(CLI::PositiveNumber);
  frf->add_option("--modes", frf_modes, "Modes in the superposition")->check(CLI::PositiveNumber);
  frf->add_flag("--log", frf_log, "Logarithmic grid");

  // timesim
  auto* ts = app.add_subcommand("timesim", "Coupled time integration");
  std::string ts_file, ts_harm, ts_rl = "100";
  double ts_dt = 0, ts_duration = 0, ts_tip_g = -1, ts_vbatt = 4.8;
  int ts_units = 0, ts_stride = 1;
  bool ts_rect = false;
  auto* ts_ex = ts->add_option("--excitation", ts_file, "Acceleration record CSV (t_s, a_mps2)")
                    ->check(CLI::ExistingFile);
  ts->add_option("--harmonic", ts_harm, "Harmonic drive f_Hz,a_g")->excludes(ts_ex);
  ts->add_option("--rl-ohm", ts_rl, "Load resistance per unit [Ohm]");
  ts->add_flag("--rectifier", ts_rect, "Bridge rectifier into the battery instead of R_l");
  ts->add_option("--vbatt", ts_vbatt, "Battery voltage for --rectifier [V]");
  ts->add_option("--units", ts_units, "Units in series (default 1, or 2 with --rectifier)");
  ts->add_option("--dt", ts_dt, "Time step [s] (default 1/(40 f1))");
  ts->add_option("--duration", ts_duration, "Simulated time [s] (default 10, or the record length)");
  ts->add_option("--tip-mass-g", ts_tip_g, "Tip mass [g]");
  ts->add_option("--stride", ts_stride, "Record every n-th step")->check(CLI::PositiveNumber);

  // tune-mass
  auto* tm = app.add_subcommand("tune-mass", "Tip mass placing f1 at a target");
  double tm_target = 0, tm_min = 0, tm_max = 100, tm_tol = 0.01;
  tm->add_option("--target-hz", tm_target, "Target fundamental [Hz]")->required();
  tm->add_option("--min-g", tm_min, "Lower mass bound [g]");
  tm->add_option("--max-g", tm_max, "Upper mass bound [g]");
  tm->add_option("--tol-hz", tm_tol, "Frequency tolerance [Hz]");

  // wim-sim
  auto* wim = app.add_subcommand("wim-sim", "Synthetic pavement DAQ trace");
  std::string wim_events, wim_trace = "wim_trace.csv";
  double wim_noise = 0, wim_tau = -1, wim_resid = -1;
  int wim_samples = 0;
  bool wim_detect = false;
  wim->add_option("--events", wim_events, "Event CSV (t_start_s, t_end_s, peak_strain)")
      ->required()->check(CLI::ExistingFile);
  wim->add_option("--noise-rms", wim_noise, "Gaussian noise on V_k [V]");
  wim->add_option("-o,--out", wim_trace, "Trace file name inside the output directory");
  wim->add_option("--samples", wim_samples, "Samples (default: record_len, extended to cover the events)");
  wim->add_option("--visco-tau", wim_tau, "Relaxation time [s]");
  wim->add_option("--residual", wim_resid, "Residual strain fraction");
  wim->add_flag("--detect", wim_detect, "Also write detected events");

  // fit-gf
  auto* gf = app.add_subcommand("fit-gf", "Gauge factor by least squares");
  std::string gf_strain, gf_drr;
  gf->add_option("--strain", gf_strain, "Strain series CSV")->required()->check(CLI::ExistingFile);
  gf->add_option("--drr", gf_drr, "dR/R series CSV")->required()->check(CLI::ExistingFile);

  // budget
  auto* bd = app.add_subcommand("budget", "Duty-cycle ledger and self-sustainability verdict");
  double bd_harvest = -1, bd_monitor = -1, bd_monitor_s = -1, bd_sleep = -1, bd_rate = -1;
  double bd_horizon = -1, bd_soc = -1, bd_sample = 0;
  std::string bd_triggers;
  bd->add_option("--harvest-mw", bd_harvest, "Harvested power [mW]");
  bd->add_option("--monitor-mw", bd_monitor, "Monitoring power [mW]");
  bd->add_option("--monitor-s", bd_monitor_s, "Monitoring window [s]");
  bd->add_option("--sleep-mw", bd_sleep, "Sleep power [mW]");
  auto* bd_rate_opt = bd->add_option("--events-per-day", bd_rate, "Uniform trigger rate");
  bd->add_option("--triggers", bd_triggers, "Trigger CSV (t_start_s column, or t_s)")
      ->check(CLI::ExistingFile)->excludes(bd_rate_opt);
  bd->add_option("--horizon-h", bd_horizon, "Horizon [h]");
  bd->add_option("--initial-soc", bd_soc, "Initial state of charge");
  bd->add_option("--sample-s", bd_sample, "Extra trace sampling interval [s]");

  // spectrogram
  auto* sg = app.add_subcommand("spectrogram", "Hann STFT of an acceleration record");
  std::string sg_input;
  double sg_window = 2, sg_overlap = 0.5;
  sg->add_option("--input", sg_input, "Acceleration record CSV")->required()->check(CLI::ExistingFile);
  sg->add_option("--window-s", sg_window, "Window length [s]");
  sg->add_option("--overlap", sg_overlap, "Fractional overlap in [0, 1)");

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig cfg = run_config(g);

    if (*modal) {
      if (modal_elements > 0) cfg.harvester.n_elements = modal_elements;
      const auto tip = tip_from(cfg, modal_tip_g);
      const AssembledSystem sys = assemble(cfg.harvester, tip);
      const ModalBasis sc = short_circuit_modes(sys, modal_modes);
      const ModalBasis oc = open_circuit_modes(sys, modal_modes);
      for (const auto* b : {&sc, &oc})
        for (const auto& w : b->warnings) {
          if (g.strict) throw ConvergenceError(w);
          std::cerr << "warning: " << w << "\n";
        }
      Table t({"mode", "f_sc_Hz", "f_oc_Hz"});
      for (int r = 0; r < sc.count(); ++r) {
        t.add_row({static_cast<long long>(r + 1), sc.frequencies[r], oc.frequencies[r]});
        std::cout << "mode " << r + 1 << ": short-circuit " << show(sc.frequencies[r])
                  << " Hz, open-circuit " << show(oc.frequencies[r]) << " Hz\n";
      }
      std::vector<std::pair<std::string, Table>> tables{{"modal.csv", t}};
      if (export_matrices) {
        tables.emplace_back("M.csv", matrix_table(sys.M));
        tables.emplace_back("K.csv", matrix_table(sys.K));
        tables.emplace_back("theta.csv", matrix_table(sys.theta));
      }
      write_outputs(output_dir(g, cfg), "modal", g, cfg,
                    {{"n_elements", cfg.harvester.n_elements}, {"modes", modal_modes},
                     {"tip_mass_kg", tip ? tip->mass : 0.0}, {"capacitance_F", sys.Cp}},
                    tables);
      return 0;
    }

    if (*frf) {
      const double R_l = parse_resistance(frf_rl);
      const auto tip = tip_from(cfg, frf_tip_g);
      const AssembledSystem sys = assemble(cfg.harvester, tip);
      const ModalBasis sc = short_circuit_modes(sys, frf_modes);
      const auto grid = frequency_grid(frf_fmin, frf_fmax, frf_points, frf_log);
      const FrfResult r = series_chain(tip_velocity_frf(sys, sc, R_l, grid, cfg.harvester.zeta), frf_units);
      Table t({"f_Hz", "absHv_per_g", "argHv_deg", "absHvel_per_g", "argHvel_deg"});
      for (std::size_t k = 0; k < grid.size(); ++k) {
        const auto hv = r.voltage_per_g(k), hw = r.velocity_per_g(k);
        t.add_row({grid[k], std::abs(hv), arg_deg(hv), std::abs(hw), arg_deg(hw)});
      }
      const double peak = voltage_peak_frequency(sys, sc, R_l, cfg.harvester.zeta, frf_fmin, frf_fmax);
      std::cout << "voltage peak " << show(peak) << " Hz\n";
      write_outputs(output_dir(g, cfg), "frf", g, cfg,
                    {{"rl_ohm", frf_rl}, {"units", frf_units}, {"modes", frf_modes},
                     {"tip_mass_kg", tip ? tip->mass : 0.0}, {"peak_Hz", peak}},
                    {{"frf.csv", t}});
      return 0;
    }

    if (*ts) {
      const auto tip = tip_from(cfg, ts_tip_g);
      const AssembledSystem sys = damped_system(cfg.harvester, tip);
      Excitation ex;
      double duration = ts_duration;
      if (!ts_file.empty()) {
        const AccelerationRecord rec = load_acceleration_csv(ts_file);
        ex = rec.excitation;
        if (duration <= 0) duration = rec.excitation.t0 + rec.duration();
      } else if (!ts_harm.empty()) {
        const auto comma = ts_harm.find(',');
        if (comma == std::string::npos) throw ValidationError("--harmonic expects f_Hz,a_g");
        const auto f = try_parse_double(ts_harm.substr(0, comma));
        const auto a = try_parse_double(ts_harm.substr(comma + 1));
        if (!f || !a) throw ValidationError("--harmonic expects f_Hz,a_g");
        ex = HarmonicExcitation{*a * kGravity, *f};
        if (duration <= 0) duration = 10;
      } else {
        throw ValidationError("timesim needs --excitation or --harmonic");
      }
      const int units = ts_units > 0 ? ts_units : (ts_rect ? 2 : 1);
      ElectricalLoad load = ResistiveLoad{parse_resistance(ts_rl)};
      if (ts_rect) load = rectifier_load(cfg.rectifier, ts_vbatt, units, cfg.series_resistance);
      const double dt = ts_dt > 0 ? ts_dt : default_time_step(sys);
      TimeSimOptions opt;
      opt.record_stride = ts_stride;
      TimeSimResult r = time_integrate(sys, load, ex, dt, duration, opt);
      if (!ts_rect) r = series_chain(r, units);
      Table t({"t_s", "vp_V", "tipvel_mps", "power_W"});
      const double vscale = ts_rect ? units : 1.0;
      for (std::size_t k = 0; k < r.t.size(); ++k)
        t.add_row({r.t[k], vscale * r.v_p[k], r.tip_vel_abs[k], r.power[k]});
      const double t_end = r.t.back();
      const double mean = t_end > 0 ? average_power(r, 0.5 * t_end, t_end) : 0.0;
      std::cout << "mean power over second half " << show(mean) << " W\n";
      write_outputs(output_dir(g, cfg), "timesim", g, cfg,
                    {{"dt_s", dt}, {"duration_s", duration}, {"units", units},
                     {"rectifier", ts_rect}, {"mean_power_W", mean}},
                    {{"timesim.csv", t}});
      return 0;
    }

    if (*tm) {
      const TipTuning r = tune_tip_mass(cfg.harvester, tm_target, tm_min / 1e3, tm_max / 1e3,
                                        cfg.tip, tm_tol);
      std::cout << "tip mass " << show(r.tip.mass * 1e3) << " g, f1 "
                << show(r.achieved_frequency) << " Hz\n";
      Table t({"target_Hz", "mass_g", "f1_Hz", "iterations"});
      t.add_row({tm_target, r.tip.mass * 1e3, r.achieved_frequency,
                 static_cast<long long>(r.iterations)});
      write_outputs(output_dir(g, cfg), "tune-mass", g, cfg,
                    {{"target_Hz", tm_target}, {"min_g", tm_min}, {"max_g", tm_max}},
                    {{"tune_mass.csv", t}});
      return 0;
    }

    if (*wim) {
      const auto events = load_events_csv(wim_events);
      WimTraceOptions opt;
      opt.noise_rms = wim_noise;
      opt.seed = g.seed;
      opt.samples = wim_samples;
      if (wim_samples == 0) {
        // Default record: the configured length, extended 3 s past the last event.
        double t_end = 0;
        for (const auto& e : events) t_end = std::max(t_end, e.t_end);
        opt.samples = std::max(cfg.circuit.record_len,
                               static_cast<int>(std::ceil((t_end + 3) * cfg.circuit.fs)));
      }
      if (wim_tau >= 0) opt.visco.tau = wim_tau;
      if (wim_resid >= 0) opt.visco.residual_fraction = wim_resid;
      const WimTrace tr = synthesize_wim_trace(events, cfg.pavement, cfg.circuit, opt);
      Table t({"t_s", "Vk_V", "R_ohm", "dRR"});
      for (std::size_t k = 0; k < tr.t.size(); ++k) t.add_row({tr.t[k], tr.V_k[k], tr.R[k], tr.dRR[k]});
      std::vector<std::pair<std::string, Table>> tables{{wim_trace, t}};
      if (wim_detect) {
        const auto found = detect_events(tr.R, cfg.circuit.fs, cfg.pavement);
        std::cout << "detected " << found.size() << " events\n";
        tables.emplace_back("wim_events.csv", events_table(found));
      }
      if (wim_trace.find('/') != std::string::npos || wim_trace.empty())
        throw ValidationError("--out must be a bare file name; use the global --out for the directory");
      write_outputs(output_dir(g, cfg), "wim-sim", g, cfg,
                    {{"events", wim_events}, {"noise_rms_V", wim_noise},
                     {"visco_tau_s", opt.visco.tau}, {"residual_fraction", opt.visco.residual_fraction}},
                    tables);
      std::cout << "wrote " << tr.t.size() << " samples\n";
      return 0;
    }

    if (*gf) {
      const auto strain = load_column_csv(gf_strain, "strain");
      const auto drr = load_column_csv(gf_drr, "dRR");
      const GaugeFit fit = fit_gauge_factor(strain, drr);
      std::cout << "lambda " << show(fit.lambda) << "\n"
                << "intercept " << show(fit.intercept) << "\n"
                << "R2 " << show(fit.r2) << "\n";
      return 0;
    }

    if (*bd) {
      if (bd_harvest >= 0) cfg.harvest_power = bd_harvest / 1e3;
      if (bd_monitor >= 0) cfg.duty.monitor_power = bd_monitor / 1e3;
      if (bd_monitor_s >= 0) cfg.duty.monitor_duration = bd_monitor_s;
      if (bd_sleep >= 0) cfg.duty.sleep_power = bd_sleep / 1e3;
      if (bd_rate >= 0) cfg.duty.events_per_day = bd_rate;
      if (bd_horizon > 0) cfg.horizon = bd_horizon * 3600;
      if (bd_soc >= 0) cfg.initial_soc = bd_soc;
      cfg.validate();
      std::vector<double> triggers;
      if (!bd_triggers.empty()) {
        const CsvData csv = read_csv(bd_triggers);
        if (csv.column("t_start_s") >= 0) {
          for (const auto& e : load_events_csv(bd_triggers)) triggers.push_back(e.t_start);
        } else {
          triggers = load_column_csv(bd_triggers, "t_s");
        }
      } else {
        triggers = uniform_triggers(cfg.duty.events_per_day, cfg.horizon);
      }
      DutyCycleOptions opt;
      opt.initial_soc = cfg.initial_soc;
      opt.sample_interval = bd_sample;
      const DutyCycleResult r =
          simulate_duty_cycle(cfg.duty, cfg.harvest_power, cfg.battery, cfg.horizon, triggers, opt);
      const BreakEven be = break_even_rate(cfg.duty, cfg.harvest_power, cfg.battery.charge_eff);
      std::cout << "verdict " << (r.self_sustaining ? "self-sustaining" : "not self-sustaining") << "\n"
                << "soc " << show(cfg.initial_soc) << " -> " << show(r.soc_final) << "\n"
                << "monitoring segments " << r.count(Mode::monitoring) << ", charging segments "
                << r.count(Mode::charging) << "\n";
      if (r.brownout_time) std::cout << "brownout at " << show(*r.brownout_time) << " s\n";
      if (be.never_sustains)
        std::cout << "break-even 0 events/day (never sustains)\n";
      else
        std::cout << "break-even " << show(be.rate) << " events/day (" << be.whole_events
                  << " whole events)\n";
      Table t({"t_s", "soc", "v_batt_V", "mode"});
      for (const auto& p : r.trace) t.add_row({p.t, p.soc, p.v_batt, std::string(to_string(p.mode))});
      write_outputs(output_dir(g, cfg), "budget", g, cfg,
                    {{"triggers", triggers.size()}, {"self_sustaining", r.self_sustaining},
                     {"break_even_per_day", be.never_sustains ? 0.0 : be.rate},
                     {"never_sustains", be.never_sustains}},
                    {{"soc_trace.csv", t}});
      return 0;
    }

    if (*sg) {
      const AccelerationRecord rec = load_acceleration_csv(sg_input);
      const int n = static_cast<int>(std::lround(sg_window * rec.fs()));
      const Spectrogram s = stft_spectrogram(rec.excitation.accel, rec.fs(), n, sg_overlap);
      Table t({"t_s", "f_Hz", "energy"});
      for (int m = 0; m < static_cast<int>(s.t_centers.size()); ++m)
        for (int k = 0; k < static_cast<int>(s.f_bins.size()); ++k)
          t.add_row({rec.excitation.t0 + s.t_centers[m], s.f_bins[k], s.magnitude(k, m)});
      Eigen::Index kmax;
      s.magnitude.rowwise().sum().maxCoeff(&kmax);
      std::cout << s.t_centers.size() << " frames, " << s.f_bins.size() << " bins, dominant "
                << show(s.f_bins[kmax]) << " Hz\n";
      write_outputs(output_dir(g, cfg), "spectrogram", g, cfg,
                    {{"input", sg_input}, {"window_samples", n}, {"overlap", sg_overlap},
                     {"fs_Hz", rec.fs()}},
                    {{"spectrogram.csv", t}});
      return 0;
    }
  } catch (const piezowim::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
