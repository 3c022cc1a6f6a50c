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

// Rectifier idealization, battery state-of-charge ledger and the
// charging/monitoring duty cycle that decides self-sustainability.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "piezowim/errors.hpp"
#include "piezowim/response.hpp"

namespace piezowim {

/// Full bridge (two diodes conducting per half-cycle) plus one series diode.
struct RectifierSpec {
  double diode_drop = 0.7;  // [V]
  int bridge_diodes = 2;
  int series_diodes = 1;

  double total_drop() const { return diode_drop * (bridge_diodes + series_diodes); }
  bool operator==(const RectifierSpec&) const = default;
  void validate() const {
    detail::require(diode_drop >= 0, "diode drop must be >= 0");
    detail::require(bridge_diodes >= 0 && series_diodes >= 0, "diode counts must be >= 0");
  }
};

/// Four Ni-MH AA cells, 2000 mAh, 1.2 V each.
struct BatterySpec {
  double capacity_Ah = 2.0;
  double nominal_V = 4.8;
  double v_full = 5.0;
  double v_empty = 4.6;
  double charge_eff = 0.85;

  bool operator==(const BatterySpec&) const = default;
  void validate() const {
    detail::require(capacity_Ah > 0, "battery capacity must be > 0");
    detail::require(nominal_V > 0, "nominal voltage must be > 0");
    detail::require(v_full > v_empty, "v_full must exceed v_empty");
    detail::require(charge_eff > 0 && charge_eff <= 1, "charge efficiency must lie in (0, 1]");
  }
  double energy_capacity() const { return capacity_Ah * 3600 * nominal_V; }  // [J]
  double voltage(double soc) const { return v_empty + soc * (v_full - v_empty); }
};

struct DutyCycleSpec {
  double monitor_power = 0.125;   // [W]
  double monitor_duration = 10;   // [s]
  double sleep_power = 0.03e-3;   // [W], includes the trigger sensor
  double events_per_day = 0;

  bool operator==(const DutyCycleSpec&) const = default;
  void validate() const {
    detail::require(monitor_power >= 0 && monitor_duration >= 0 && sleep_power >= 0 &&
                        events_per_day >= 0,
                    "duty-cycle parameters must be non-negative");
    detail::require(monitor_power > sleep_power, "monitor power must exceed sleep power");
  }
};

struct RectifiedPower {
  std::vector<double> current;        // into the battery [A]
  std::vector<double> power;          // excess voltage x current [W]
  std::vector<double> battery_power;  // v_batt x current [W]
  double mean_power = 0;
  double mean_battery_power = 0;
};

/// Constant-voltage sink model: the source trace conducts only while
/// |v_p| > total diode drop + v_batt, driving current through
/// `source_resistance`.
inline RectifiedPower rectify_trace(std::span<const double> v_p, const RectifierSpec& rect,
                                    double v_batt, double source_resistance) {
  rect.validate();
  detail::require(v_batt >= 0, "battery voltage must be >= 0");
  detail::require(source_resistance > 0, "source resistance must be > 0");
  const double threshold = rect.total_drop() + v_batt;
  RectifiedPower out;
  out.current.reserve(v_p.size());
  out.power.reserve(v_p.size());
  out.battery_power.reserve(v_p.size());
  for (double v : v_p) {
    const double excess = std::max(0.0, std::abs(v) - threshold);
    const double i = excess / source_resistance;
    out.current.push_back(i);
    out.power.push_back(excess * i);
    out.battery_power.push_back(v_batt * i);
    out.mean_power += excess * i;
    out.mean_battery_power += v_batt * i;
  }
  if (!v_p.empty()) {
    out.mean_power /= static_cast<double>(v_p.size());
    out.mean_battery_power /= static_cast<double>(v_p.size());
  }
  return out;
}

/// Rectifier + battery as the electrical load of a harvester chain in the
/// time integrator.
inline RectifierLoad rectifier_load(const RectifierSpec& rect, double v_batt, int n_units,
                                    double series_resistance = 10.0) {
  rect.validate();
  RectifierLoad load;
  load.n_units = n_units;
  load.threshold = rect.total_drop() + v_batt;
  load.series_resistance = series_resistance;
  load.battery_voltage = v_batt;
  return load;
}

struct ChainCharging {
  double frequency = 0;      // drive [Hz]
  double battery_power = 0;  // mean v_batt x |i| [W]
  double excess_power = 0;   // mean (|n v| - threshold) x |i| [W]
};

/// Steady-state charging of a rectified chain under harmonic base drive
/// a(t) = amplitude cos(2 pi f t), averaged over `window_periods` after
/// `settle_periods`.
inline ChainCharging chain_charging_power(const AssembledSystem& sys, const RectifierLoad& load,
                                          double amplitude, double frequency,
                                          int settle_periods = 150, int window_periods = 20,
                                          int steps_per_period = 200) {
  detail::require(frequency > 0 && amplitude >= 0, "drive needs frequency > 0, amplitude >= 0");
  detail::require(settle_periods >= 0 && window_periods >= 1 && steps_per_period >= 8,
                  "invalid averaging windows");
  const double period = 1.0 / frequency;
  const double dt = period / steps_per_period;
  const double T = (settle_periods + window_periods) * period;
  const TimeSimResult sim =
      time_integrate(sys, load, HarmonicExcitation{amplitude, frequency}, dt, T);
  ChainCharging out;
  out.frequency = frequency;
  out.battery_power = average_power(sim, settle_periods * period, T);
  const long first = static_cast<long>(settle_periods) * steps_per_period;
  double acc = 0;
  long count = 0;
  for (std::size_t k = static_cast<std::size_t>(first) + 1; k < sim.t.size(); ++k, ++count) {
    const double excess = std::max(0.0, std::abs(load.n_units * sim.v_p[k]) - load.threshold);
    acc += excess * std::abs(sim.current[k]);
  }
  out.excess_power = count ? acc / static_cast<double>(count) : 0.0;
  return out;
}

/// Drive frequency in [f_lo, f_hi] maximizing battery power: coarse scan,
/// then golden-section refinement.
inline ChainCharging resonant_chain_charging(const AssembledSystem& sys, const RectifierLoad& load,
                                             double amplitude, double f_lo, double f_hi,
                                             int scan_points = 9, int refine_iterations = 10) {
  detail::require(0 < f_lo && f_lo < f_hi && scan_points >= 3, "invalid resonance search interval");
  auto eval = [&](double f) { return chain_charging_power(sys, load, amplitude, f); };
  const double step = (f_hi - f_lo) / (scan_points - 1);
  ChainCharging best = eval(f_lo);
  int best_k = 0;
  for (int k = 1; k < scan_points; ++k) {
    ChainCharging c = eval(f_lo + k * step);
    if (c.battery_power > best.battery_power) {
      best = c;
      best_k = k;
    }
  }
  double a = f_lo + std::max(best_k - 1, 0) * step;
  double b = f_lo + std::min(best_k + 1, scan_points - 1) * step;
  const double gr = (std::sqrt(5.0) - 1) / 2;
  double c = b - gr * (b - a), d = a + gr * (b - a);
  ChainCharging pc = eval(c), pd = eval(d);
  for (int it = 0; it < refine_iterations; ++it) {
    if (pc.battery_power > pd.battery_power) {
      b = d;
      d = c;
      pd = pc;
      c = b - gr * (b - a);
      pc = eval(c);
    } else {
      a = c;
      c = d;
      pc = pd;
      d = a + gr * (b - a);
      pd = eval(d);
    }
  }
  for (const auto* p : {&pc, &pd})
    if (p->battery_power > best.battery_power) best = *p;
  return best;
}

enum class Mode { charging, monitoring };

inline const char* to_string(Mode m) { return m == Mode::charging ? "charging" : "monitoring"; }

struct SoCPoint {
  double t = 0;
  double soc = 0;
  double v_batt = 0;
  Mode mode = Mode::charging;
};

struct ModeSegment {
  Mode mode = Mode::charging;
  double t0 = 0;
  double t1 = 0;
};

struct DutyCycleOptions {
  double initial_soc = 0.875;
  double sample_interval = 0;  // extra trace samples [s]; 0 -> breakpoints only
};

struct DutyCycleResult {
  std::vector<SoCPoint> trace;
  std::vector<ModeSegment> segments;
  bool self_sustaining = false;
  std::optional<double> brownout_time;
  double harvested = 0;  // stored from the harvester [J]
  double consumed = 0;   // drawn by sleep + monitoring [J]
  double spilled = 0;    // harvest rejected at full charge [J]
  double unserved = 0;   // demand not met at empty [J]
  double soc_final = 0;

  int count(Mode m) const {
    return static_cast<int>(std::count_if(segments.begin(), segments.end(),
                                          [m](const ModeSegment& s) { return s.mode == m; }));
  }
};

/// Coulomb-counting ledger over [0, horizon]. Monitoring windows draw
/// monitor_power with harvesting cut off; otherwise the battery gains
/// harvest_power * charge_eff and loses sleep_power.
inline DutyCycleResult simulate_duty_cycle(const DutyCycleSpec& duty, double harvest_power,
                                           const BatterySpec& batt, double horizon,
                                           std::span<const double> trigger_times,
                                           const DutyCycleOptions& opt = {}) {
  duty.validate();
  batt.validate();
  detail::require(harvest_power >= 0, "harvest power must be >= 0");
  detail::require(horizon > 0, "horizon must be > 0");
  detail::require(opt.initial_soc >= 0 && opt.initial_soc <= 1, "initial SoC must lie in [0, 1]");
  detail::require(opt.sample_interval >= 0, "sample interval must be >= 0");
  std::vector<double> trig(trigger_times.begin(), trigger_times.end());
  std::sort(trig.begin(), trig.end());
  for (std::size_t k = 0; k < trig.size(); ++k) {
    detail::require(trig[k] >= 0 && trig[k] < horizon, "trigger time outside the horizon");
    if (k > 0)
      detail::require(trig[k] - trig[k - 1] >= duty.monitor_duration - 1e-9,
                      "triggers closer than the monitoring duration");
  }

  DutyCycleResult res;
  double t = 0;
  for (double tr : trig) {
    if (tr > t) res.segments.push_back({Mode::charging, t, tr});
    const double end = std::min(tr + duty.monitor_duration, horizon);
    if (end > tr) res.segments.push_back({Mode::monitoring, tr, end});
    t = end;
  }
  if (horizon > t) res.segments.push_back({Mode::charging, t, horizon});

  const double cap = batt.energy_capacity();
  double soc = opt.initial_soc;
  auto push = [&](double time, Mode m) {
    res.trace.push_back({time, soc, batt.voltage(soc), m});
  };

  for (const auto& seg : res.segments) {
    const bool charging = seg.mode == Mode::charging;
    const double p_in = charging ? harvest_power * batt.charge_eff : 0.0;
    const double p_out = charging ? duty.sleep_power : duty.monitor_power;
    const double net = p_in - p_out;
    push(seg.t0, seg.mode);

    // Breakpoints: optional samples plus the segment end.
    std::vector<double> marks;
    if (opt.sample_interval > 0)
      for (double s = (std::floor(seg.t0 / opt.sample_interval) + 1) * opt.sample_interval;
           s < seg.t1; s += opt.sample_interval)
        marks.push_back(s);
    marks.push_back(seg.t1);

    double tc = seg.t0;
    for (double tm : marks) {
      while (tc < tm) {
        const double dt = tm - tc;
        double step = dt;
        // Clamp crossings split the interval.
        if (net > 0 && soc < 1) {
          const double t_full = (1 - soc) * cap / net;
          if (t_full < dt) step = t_full;
        } else if (net < 0 && soc > 0) {
          const double t_empty = soc * cap / -net;
          if (t_empty < dt) step = t_empty;
        }
        const bool pinned_full = net > 0 && soc >= 1;
        const bool pinned_empty = net < 0 && soc <= 0;
        res.harvested += p_in * step;
        res.consumed += p_out * step;
        if (pinned_full) {
          res.spilled += net * step;
        } else if (pinned_empty) {
          res.unserved += -net * step;
          if (!res.brownout_time) res.brownout_time = tc;
        } else {
          soc += net * step / cap;
          if (step < dt) {
            soc = net > 0 ? 1.0 : 0.0;
            if (soc == 0 && !res.brownout_time) res.brownout_time = tc + step;
            push(tc + step, seg.mode);
          }
        }
        tc += step;
      }
      if (tm < seg.t1) push(tm, seg.mode);
    }
    push(seg.t1, seg.mode);
  }
  res.soc_final = soc;
  res.self_sustaining = soc >= opt.initial_soc;
  return res;
}

/// Triggers spread uniformly at `events_per_day` over [0, horizon).
inline std::vector<double> uniform_triggers(double events_per_day, double horizon) {
  detail::require(events_per_day >= 0 && horizon > 0, "uniform triggers need rate >= 0, horizon > 0");
  std::vector<double> out;
  if (events_per_day == 0) return out;
  const double spacing = 86400.0 / events_per_day;
  for (double t = 0.5 * spacing; t < horizon; t += spacing) out.push_back(t);
  return out;
}

/// Net daily energy of the duty cycle at `events_per_day` [J].
inline double daily_energy_margin(const DutyCycleSpec& duty, double harvest_power,
                                  double events_per_day, double charge_eff = 1.0) {
  const double busy = events_per_day * duty.monitor_duration;
  return (harvest_power * charge_eff - duty.sleep_power) * (86400.0 - busy) -
         duty.monitor_power * busy;
}

struct BreakEven {
  double rate = 0;          // events/day with zero daily energy balance
  long whole_events = 0;    // largest integer count with non-negative balance
  bool never_sustains = false;
};

inline BreakEven break_even_rate(const DutyCycleSpec& duty, double harvest_power,
                                 double charge_eff = 1.0) {
  duty.validate();
  detail::require(harvest_power >= 0, "harvest power must be >= 0");
  detail::require(charge_eff > 0 && charge_eff <= 1, "charge efficiency must lie in (0, 1]");
  BreakEven be;
  const double h = harvest_power * charge_eff;
  if (!(h > duty.sleep_power)) {
    be.never_sustains = true;
    return be;
  }
  detail::require(duty.monitor_duration > 0, "monitor duration must be > 0");
  be.rate = (h - duty.sleep_power) * 86400.0 /
            (duty.monitor_duration * (duty.monitor_power + h - duty.sleep_power));
  be.whole_events = static_cast<long>(std::floor(be.rate + 1e-12));
  return be;
}

}  // namespace piezowim
