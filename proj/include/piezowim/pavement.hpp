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

// Piezoresistive slab: strain -> resistance, DC shunt-divider readout,
// synthetic acquisition traces, gauge-factor regression and event detection.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "piezowim/errors.hpp"

namespace piezowim {

struct PavementSpec {
  double R0 = 20e3;           // baseline inter-electrode resistance [Ohm]
  double lambda = 1956;       // gauge factor
  double nu = 0.3;            // Poisson ratio
  double e_spacing = 0.20;    // electrode spacing [m]
  double area = 0.30 * 0.04;  // conduction cross-section [m^2]

  void validate() const {
    detail::require(R0 > 0, "R0 must be > 0");
    detail::require(std::isfinite(lambda), "gauge factor must be finite");
    detail::require(nu > 0 && nu < 0.5, "Poisson ratio must lie in (0, 0.5)");
    detail::require(e_spacing > 0 && area > 0, "electrode spacing and area must be > 0");
  }
  bool operator==(const PavementSpec&) const = default;
};

struct SensingCircuit {
  double V_supply = 5.0;   // [V]
  double R_k = 10e3;       // shunt [Ohm]
  double fs = 10.0;        // [Hz]
  int record_len = 100;    // samples per trigger

  void validate() const {
    detail::require(V_supply > 0, "supply voltage must be > 0");
    detail::require(R_k > 0, "shunt resistance must be > 0");
    detail::require(fs > 0, "sampling rate must be > 0");
    detail::require(record_len >= 1, "record length must be >= 1");
  }
  bool operator==(const SensingCircuit&) const = default;
};

struct LoadEvent {
  double t_start = 0;      // [s]
  double t_end = 0;        // [s]
  double peak_strain = 0;  // eps1
  std::string label;
};

inline constexpr double kLinearStrainLimit = 5e-3;

/// Fractional resistance change with its two contributions.
struct StrainResponse {
  double dRR = 0;             // lambda * eps1
  double geometric = 0;       // body deformation, eps1 / nu
  double piezoresistive = 0;  // d rho / rho = dRR - geometric
  bool out_of_range = false;  // |eps1| beyond the linear range
};

inline StrainResponse decompose_dRR(double eps1, const PavementSpec& spec) {
  spec.validate();
  detail::require(std::isfinite(eps1), "strain must be finite");
  StrainResponse r;
  r.dRR = spec.lambda * eps1;
  // With eps3 = eps1 = -nu eps2: de/e - dA/A = eps1 - eps2 - eps3 = eps1 / nu.
  r.geometric = eps1 / spec.nu;
  r.piezoresistive = r.dRR - r.geometric;
  r.out_of_range = std::abs(eps1) >= kLinearStrainLimit;
  return r;
}

inline double dRR_from_strain(double eps1, const PavementSpec& spec) {
  return decompose_dRR(eps1, spec).dRR;
}

struct DividerReadout {
  double V_p = 0;  // across the pavement [V]
  double V_k = 0;  // across the shunt [V]
};

inline DividerReadout divider_forward(double R, const SensingCircuit& c) {
  c.validate();
  detail::require(R > 0, "pavement resistance must be > 0");
  DividerReadout out;
  if (std::isinf(R)) {
    out.V_k = 0;
    out.V_p = c.V_supply;
    return out;
  }
  out.V_k = c.V_supply * c.R_k / (R + c.R_k);
  out.V_p = c.V_supply * R / (R + c.R_k);
  return out;
}

/// Ohm's-law inversion R = R_k V_p / V_k.
inline double resistance_from_readout(double V_p, double V_k, double R_k,
                                      double noise_floor = 0.0) {
  detail::require(R_k > 0, "shunt resistance must be > 0");
  if (!(V_k > noise_floor))
    throw UnresolvableReadoutError("shunt voltage " + std::to_string(V_k) +
                                   " V is at or below the noise floor");
  return R_k * V_p / V_k;
}

/// First-order relaxation of the slab strain towards the applied target; after
/// each event a fraction of its peak remains as residual strain.
struct ViscoModel {
  double tau = 2.0;                 // [s]
  double residual_fraction = 0.05;
};

struct WimTrace {
  std::vector<double> t;       // [s]
  std::vector<double> strain;  // true slab strain
  std::vector<double> V_k;     // measured shunt voltage [V]
  std::vector<double> R;       // resistance recovered from the readout [Ohm]
  std::vector<double> dRR;     // R / R0 - 1
};

struct WimTraceOptions {
  double noise_rms = 0;        // additive Gaussian on V_k [V]
  ViscoModel visco{};
  std::uint64_t seed = 0;
  int samples = 0;             // 0 -> circuit.record_len
};

inline void validate_events(std::span<const LoadEvent> events) {
  for (const auto& e : events) {
    detail::require(e.t_end > e.t_start, "event '" + e.label + "' must have t_end > t_start");
    detail::require(std::abs(e.peak_strain) < kLinearStrainLimit,
                    "event '" + e.label + "' strain outside the linear range");
  }
  std::vector<LoadEvent> sorted(events.begin(), events.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const LoadEvent& a, const LoadEvent& b) { return a.t_start < b.t_start; });
  for (std::size_t k = 1; k < sorted.size(); ++k)
    detail::require(sorted[k].t_start >= sorted[k - 1].t_end, "load events overlap");
}

inline WimTrace synthesize_wim_trace(std::span<const LoadEvent> events, const PavementSpec& spec,
                                     const SensingCircuit& circuit, const WimTraceOptions& opt = {}) {
  spec.validate();
  circuit.validate();
  detail::require(opt.noise_rms >= 0, "noise rms must be >= 0");
  detail::require(opt.visco.tau >= 0, "relaxation time must be >= 0");
  detail::require(opt.visco.residual_fraction >= 0 && opt.visco.residual_fraction < 1,
                  "residual fraction must lie in [0, 1)");
  detail::require(opt.samples >= 0, "sample count must be >= 0");
  validate_events(events);
  const int n = opt.samples > 0 ? opt.samples : circuit.record_len;
  const double dt = 1.0 / circuit.fs;
  const double span_end = (n - 1) * dt;
  for (const auto& e : events)
    detail::require(e.t_start >= 0 && e.t_end <= span_end + 1e-9,
                    "event '" + e.label + "' lies outside the record span");

  std::vector<LoadEvent> sorted(events.begin(), events.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const LoadEvent& a, const LoadEvent& b) { return a.t_start < b.t_start; });

  auto target_at = [&](double t) {
    double residual = 0;
    for (const auto& e : sorted) {
      if (t >= e.t_start && t < e.t_end) return e.peak_strain;
      if (t >= e.t_end) residual = opt.visco.residual_fraction * e.peak_strain;
    }
    return residual;
  };

  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  const double decay = opt.visco.tau > 0 ? std::exp(-dt / opt.visco.tau) : 0.0;

  WimTrace tr;
  tr.t.resize(n);
  tr.strain.resize(n);
  tr.V_k.resize(n);
  tr.R.resize(n);
  tr.dRR.resize(n);
  double eps = 0;
  double held = 0;  // target over the previous sample interval
  for (int k = 0; k < n; ++k) {
    const double t = k * dt;
    const double target = target_at(t);
    if (opt.visco.tau == 0) {
      eps = target;
    } else if (k > 0) {
      eps = held + (eps - held) * decay;
    }
    held = target;
    const double R_true = spec.R0 * (1 + dRR_from_strain(eps, spec));
    detail::require(R_true > 0, "strain drives the resistance non-positive");
    DividerReadout rd = divider_forward(R_true, circuit);
    if (opt.noise_rms > 0) rd.V_k += opt.noise_rms * noise(rng);
    tr.t[k] = t;
    tr.strain[k] = eps;
    tr.V_k[k] = rd.V_k;
    tr.R[k] = resistance_from_readout(circuit.V_supply - rd.V_k, rd.V_k, circuit.R_k);
    tr.dRR[k] = tr.R[k] / spec.R0 - 1;
  }
  return tr;
}

/// V_k noise rms giving a target signal-to-noise ratio on dR/R, by
/// linearizing the readout at R0. `signal_std` is the dR/R standard deviation.
inline double vk_noise_for_snr(double snr_db, double signal_std, const PavementSpec& spec,
                               const SensingCircuit& circuit) {
  detail::require(signal_std > 0, "signal std must be > 0");
  const double noise_drr = signal_std / std::pow(10.0, snr_db / 20);
  // dR/dV_k = -R_k V / V_k^2 at R0.
  const double Vk = circuit.V_supply * circuit.R_k / (spec.R0 + circuit.R_k);
  const double dR_dVk = circuit.R_k * circuit.V_supply / (Vk * Vk);
  return noise_drr * spec.R0 / dR_dVk;
}

/// SNR [dB] at which an OLS fit with noise only on the response reaches R^2.
inline double snr_for_r2(double r2) {
  detail::require(r2 > 0 && r2 < 1, "R^2 must lie in (0, 1)");
  return 10 * std::log10(r2 / (1 - r2));
}

struct GaugeFit {
  double lambda = 0;     // slope
  double intercept = 0;
  double r2 = 0;
};

inline GaugeFit fit_gauge_factor(std::span<const double> strain, std::span<const double> dRR) {
  detail::require(strain.size() == dRR.size(), "strain and dR/R series differ in length");
  detail::require(strain.size() >= 3, "gauge-factor fit needs at least 3 points");
  const double n = static_cast<double>(strain.size());
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < strain.size(); ++k) {
    detail::require(std::isfinite(strain[k]) && std::isfinite(dRR[k]), "non-finite sample in fit input");
    mx += strain[k];
    my += dRR[k];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t k = 0; k < strain.size(); ++k) {
    const double dx = strain[k] - mx, dy = dRR[k] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  const double scale = std::max(mx * mx, 1e-300) * n;
  detail::require(sxx > 1e-24 * scale && sxx > 0, "strain series has no variance");
  GaugeFit g;
  g.lambda = sxy / sxx;
  g.intercept = my - g.lambda * mx;
  double sse = 0;
  for (std::size_t k = 0; k < strain.size(); ++k) {
    const double e = dRR[k] - (g.intercept + g.lambda * strain[k]);
    sse += e * e;
  }
  g.r2 = syy > 0 ? 1 - sse / syy : 1.0;
  return g;
}

struct DetectionOptions {
  double threshold = 0.01;     // |dR/R| to open an event
  double release = 0.5;        // close below release * threshold
  double min_gap = 1.0;        // merge events closer than this [s]
  double baseline_tau = 5.0;   // idle-baseline smoothing [s]
  int warmup = 5;              // samples averaged for the initial baseline
};

/// Hysteresis thresholding of |dR/R| against a baseline tracked only while
/// idle. `peak_strain` of each event is its peak dR/R divided by the gauge factor.
inline std::vector<LoadEvent> detect_events(std::span<const double> resistance, double fs,
                                            const PavementSpec& spec,
                                            const DetectionOptions& opt = {}) {
  spec.validate();
  detail::require(fs > 0, "sampling rate must be > 0");
  detail::require(opt.threshold > 0 && opt.release > 0 && opt.release <= 1,
                  "detection needs threshold > 0 and release in (0, 1]");
  std::vector<LoadEvent> events;
  if (resistance.empty()) return events;
  const int warm = std::max(1, std::min<int>(opt.warmup, static_cast<int>(resistance.size())));
  double baseline = 0;
  for (int k = 0; k < warm; ++k) baseline += resistance[k];
  baseline /= warm;
  const double alpha = opt.baseline_tau > 0 ? 1 - std::exp(-1.0 / (fs * opt.baseline_tau)) : 1.0;

  bool active = false;
  LoadEvent cur;
  double peak = 0;
  for (std::size_t k = 0; k < resistance.size(); ++k) {
    const double t = static_cast<double>(k) / fs;
    const double rel = resistance[k] / baseline - 1;
    if (!active) {
      if (std::abs(rel) > opt.threshold) {
        active = true;
        cur = LoadEvent{t, t, 0, "detected"};
        peak = rel;
      } else {
        baseline += alpha * (resistance[k] - baseline);
      }
    } else {
      if (std::abs(rel) > std::abs(peak)) peak = rel;
      if (std::abs(rel) < opt.release * opt.threshold) {
        active = false;
        cur.t_end = t;
        cur.peak_strain = peak / spec.lambda;
        events.push_back(cur);
      }
    }
  }
  if (active) {
    cur.t_end = static_cast<double>(resistance.size() - 1) / fs;
    if (cur.t_end <= cur.t_start) cur.t_end = cur.t_start + 1.0 / fs;
    cur.peak_strain = peak / spec.lambda;
    events.push_back(cur);
  }

  std::vector<LoadEvent> merged;
  for (const auto& e : events) {
    if (!merged.empty() && e.t_start - merged.back().t_end < opt.min_gap) {
      auto& m = merged.back();
      m.t_end = e.t_end;
      if (std::abs(e.peak_strain) > std::abs(m.peak_strain)) m.peak_strain = e.peak_strain;
    } else {
      merged.push_back(e);
    }
  }
  return merged;
}

}  // namespace piezowim
