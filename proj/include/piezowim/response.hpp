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

// Harmonic (modal-superposition) and time-domain response of the coupled
// harvester under base acceleration, with power extraction and proof-mass
// tuning.
//
// Sign convention: base acceleration a(t) = Re(A e^{i w t}); every FRF is a
// complex response per unit A in m/s^2. Per-g values multiply by kGravity.

#pragma once

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "piezowim/beam_fem.hpp"
#include "piezowim/modal.hpp"

namespace piezowim {

inline constexpr double kGravity = 9.80665;

using cdouble = std::complex<double>;

struct FrfResult {
  std::vector<double> grid;      // [Hz]
  std::vector<cdouble> H_v;      // load voltage [V per m/s^2]
  std::vector<cdouble> H_vel;    // absolute tip velocity [(m/s) per m/s^2]
  std::vector<cdouble> H_vel_rel;
  double R_l = 0;                // load seen by the (chained) source [Ohm]
  int n_units = 1;
  double source_capacitance = 0; // [F]

  cdouble voltage_per_g(std::size_t k) const { return H_v.at(k) * kGravity; }
  cdouble velocity_per_g(std::size_t k) const { return H_vel.at(k) * kGravity; }
};

namespace detail {

struct ModalTerms {
  Eigen::VectorXd omega;    // [rad/s]
  Eigen::VectorXd theta_r;  // Theta^T phi_r
  Eigen::VectorXd gamma_r;  // phi_r^T M L
  Eigen::VectorXd tip_r;    // phi_r at the tip w-DOF
};

inline ModalTerms modal_terms(const AssembledSystem& sys, const ModalBasis& basis) {
  require(basis.circuit == Circuit::short_circuit,
          "FRFs are expanded on the short-circuit basis");
  require(basis.shapes.rows() == sys.size(), "basis does not match system size");
  ModalTerms t;
  const int nm = basis.count();
  t.omega.resize(nm);
  for (int r = 0; r < nm; ++r) t.omega(r) = basis.omega(r);
  t.theta_r = basis.shapes.transpose() * sys.theta;
  t.gamma_r = basis.shapes.transpose() * (sys.M * sys.Lvec);
  t.tip_r = basis.shapes.row(sys.dofs.tip(Dof::w)).transpose();
  return t;
}

inline double conductance(double R_l) {
  require(R_l > 0, "load resistance must be > 0");
  return std::isinf(R_l) ? 0.0 : 1.0 / R_l;
}

struct FrfPoint {
  cdouble voltage;
  cdouble rel_velocity;
};

inline FrfPoint frf_point(const ModalTerms& t, double Cp, double G, double zeta,
                          double f_hz) {
  const double w = 2 * std::numbers::pi * f_hz;
  const cdouble iw(0, w);
  cdouble num = 0;
  cdouble den = G + iw * Cp;
  const int nm = static_cast<int>(t.omega.size());
  std::vector<cdouble> inv_d(nm);
  for (int r = 0; r < nm; ++r) {
    const double wr = t.omega(r);
    inv_d[r] = 1.0 / cdouble(wr * wr - w * w, 2 * zeta * wr * w);
    num += iw * t.theta_r(r) * t.gamma_r(r) * inv_d[r];
    den += iw * t.theta_r(r) * t.theta_r(r) * inv_d[r];
  }
  FrfPoint p;
  p.voltage = num / den;
  cdouble vel = 0;
  for (int r = 0; r < nm; ++r)
    vel += t.tip_r(r) * (-t.gamma_r(r) + t.theta_r(r) * p.voltage) * inv_d[r];
  p.rel_velocity = iw * vel;
  return p;
}

inline FrfResult frf_impl(const AssembledSystem& sys, const ModalBasis& basis,
                          double R_l, std::span<const double> grid, double zeta,
                          bool velocity) {
  const double G = conductance(R_l);
  require(zeta >= 0 && zeta < 1, "zeta must lie in [0, 1)");
  const ModalTerms t = modal_terms(sys, basis);
  FrfResult out;
  out.R_l = R_l;
  out.source_capacitance = sys.Cp;
  out.grid.assign(grid.begin(), grid.end());
  out.H_v.reserve(grid.size());
  for (double f : grid) {
    require(std::isfinite(f) && f >= 0, "frequency grid must be finite and >= 0");
    if (velocity) require(f > 0, "velocity FRF is singular at 0 Hz");
    const FrfPoint p = frf_point(t, sys.Cp, G, zeta, f);
    out.H_v.push_back(p.voltage);
    if (velocity) {
      const double w = 2 * std::numbers::pi * f;
      out.H_vel_rel.push_back(p.rel_velocity);
      out.H_vel.push_back(p.rel_velocity + 1.0 / cdouble(0, w));
    }
  }
  return out;
}

}  // namespace detail

/// Voltage across R_l per unit base acceleration by modal superposition.
/// R_l may be +infinity (open circuit).
inline FrfResult voltage_frf(const AssembledSystem& sys, const ModalBasis& basis_sc,
                             double R_l, std::span<const double> grid, double zeta) {
  return detail::frf_impl(sys, basis_sc, R_l, grid, zeta, false);
}

/// Voltage plus relative and absolute tip velocity FRFs.
inline FrfResult tip_velocity_frf(const AssembledSystem& sys, const ModalBasis& basis_sc,
                                  double R_l, std::span<const double> grid, double zeta) {
  return detail::frf_impl(sys, basis_sc, R_l, grid, zeta, true);
}

/// Frequency of maximum |H_v| in [f_lo, f_hi]: dense scan, then golden-section
/// refinement around the best sample.
inline double voltage_peak_frequency(const AssembledSystem& sys, const ModalBasis& basis_sc,
                                     double R_l, double zeta, double f_lo, double f_hi) {
  detail::require(0 < f_lo && f_lo < f_hi, "peak search needs 0 < f_lo < f_hi");
  const detail::ModalTerms t = detail::modal_terms(sys, basis_sc);
  const double G = detail::conductance(R_l);
  auto mag = [&](double f) { return std::abs(detail::frf_point(t, sys.Cp, G, zeta, f).voltage); };
  const int n = 2001;
  const double step = (f_hi - f_lo) / (n - 1);
  int best = 0;
  double best_val = -1;
  for (int k = 0; k < n; ++k) {
    const double v = mag(f_lo + k * step);
    if (v > best_val) {
      best_val = v;
      best = k;
    }
  }
  double a = f_lo + std::max(best - 1, 0) * step;
  double b = f_lo + std::min(best + 1, n - 1) * step;
  const double gr = (std::sqrt(5.0) - 1) / 2;
  double c = b - gr * (b - a);
  double d = a + gr * (b - a);
  double fc = mag(c), fd = mag(d);
  for (int it = 0; it < 200 && (b - a) > 1e-12 * b; ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = mag(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = mag(d);
    }
  }
  return (a + b) / 2;
}

// ---------------------------------------------------------------------------
// Excitation

/// a(t) = amplitude * cos(2 pi f t).
struct HarmonicExcitation {
  double amplitude = 0;  // [m/s^2]
  double frequency = 0;  // [Hz]
};

/// Uniformly sampled record, linearly interpolated, zero outside its span.
struct SampledExcitation {
  double t0 = 0;
  double dt = 0;
  std::vector<double> accel;  // [m/s^2]

  double fs() const { return 1.0 / dt; }
  double duration() const { return accel.empty() ? 0.0 : dt * (accel.size() - 1); }
  double time(std::size_t k) const { return t0 + dt * static_cast<double>(k); }
};

/// Linear sweep a(t) = amplitude * sin(2 pi (f0 t + (f1 - f0) t^2 / (2 T))), zero after T.
struct ChirpExcitation {
  double f0 = 10;
  double f1 = 2000;
  double duration = 180;
  double amplitude = 0;
};

using Excitation = std::variant<HarmonicExcitation, SampledExcitation, ChirpExcitation>;

inline double base_acceleration(const Excitation& ex, double t) {
  struct Visitor {
    double t;
    double operator()(const HarmonicExcitation& h) const {
      return h.amplitude * std::cos(2 * std::numbers::pi * h.frequency * t);
    }
    double operator()(const SampledExcitation& s) const {
      if (s.accel.empty()) return 0.0;
      const double x = (t - s.t0) / s.dt;
      if (x < 0 || x > static_cast<double>(s.accel.size() - 1)) return 0.0;
      const auto k = static_cast<std::size_t>(std::floor(x));
      if (k + 1 >= s.accel.size()) return s.accel.back();
      const double frac = x - static_cast<double>(k);
      return s.accel[k] + frac * (s.accel[k + 1] - s.accel[k]);
    }
    double operator()(const ChirpExcitation& c) const {
      if (t < 0 || t > c.duration) return 0.0;
      const double phase = c.f0 * t + (c.f1 - c.f0) * t * t / (2 * c.duration);
      return c.amplitude * std::sin(2 * std::numbers::pi * phase);
    }
  };
  return std::visit(Visitor{t}, ex);
}

inline void validate_excitation(const Excitation& ex) {
  if (const auto* s = std::get_if<SampledExcitation>(&ex)) {
    detail::require(s->dt > 0, "sampled excitation needs dt > 0");
    for (double a : s->accel) detail::require(std::isfinite(a), "sampled excitation has non-finite values");
  } else if (const auto* c = std::get_if<ChirpExcitation>(&ex)) {
    detail::require(c->f0 > 0 && c->f1 > 0 && c->duration > 0, "chirp needs positive f0, f1, duration");
  } else {
    const auto& h = std::get<HarmonicExcitation>(ex);
    detail::require(h.frequency > 0 && std::isfinite(h.amplitude), "harmonic needs frequency > 0");
  }
}

// ---------------------------------------------------------------------------
// Time integration

/// Linear resistor across the electrodes; infinity means an open switch.
struct ResistiveLoad {
  double resistance = 100;
};

/// n identical synchronous units in series feeding a full-bridge rectifier and
/// a constant-voltage battery. The chain conducts when |n v_p| exceeds
/// `threshold` (battery + diode drops); `series_resistance` limits the current.
struct RectifierLoad {
  int n_units = 2;
  double threshold = 6.9;          // [V]
  double series_resistance = 10;   // [Ohm]
  double battery_voltage = 4.8;    // [V]

  /// Chain current for per-unit voltage v.
  double current(double v) const {
    const double vc = n_units * v;
    if (vc > threshold) return (vc - threshold) / series_resistance;
    if (vc < -threshold) return (vc + threshold) / series_resistance;
    return 0.0;
  }
};

using ElectricalLoad = std::variant<ResistiveLoad, RectifierLoad>;

struct TimeSimOptions {
  std::optional<Eigen::VectorXd> d0;  // initial displacement, default zero
  std::optional<Eigen::VectorXd> v0;  // initial velocity, default zero
  double vp0 = 0;                     // initial voltage
  int record_stride = 1;
  bool check_energy = true;
};

struct TimeSimResult {
  std::vector<double> t;
  std::vector<double> v_p;          // voltage across the load of one unit [V]
  std::vector<double> tip_disp;     // relative to the base [m]
  std::vector<double> tip_vel;      // relative to the base [m/s]
  std::vector<double> tip_vel_abs;  // in the fixed frame [m/s]
  std::vector<double> current;      // load current [A]
  std::vector<double> power;        // instantaneous power into the load [W]
  std::vector<double> energy;       // stored mechanical + capacitive [J]
  double R_l = 0;
  int n_units = 1;
  double source_capacitance = 0;
  double input_work = 0;            // work done by base inertia forces [J]
  double dissipated = 0;            // damping + load [J]
};

namespace detail {

inline Eigen::SparseMatrix<double> to_sparse(const Eigen::MatrixXd& A) {
  return A.sparseView(1.0, 1e-300);
}

/// Solves a*v + b + h*g(v) = 0 for v with g the load current characteristic.
inline double solve_circuit(const ElectricalLoad& load, double a, double b, double h) {
  if (const auto* r = std::get_if<ResistiveLoad>(&load)) {
    const double G = conductance(r->resistance);
    return -b / (a + h * G);
  }
  const auto& rec = std::get<RectifierLoad>(load);
  const double n = rec.n_units;
  double v = -b / a;
  if (std::abs(n * v) <= rec.threshold) return v;
  const double k = h * n / rec.series_resistance;
  const double off = h * rec.threshold / rec.series_resistance;
  v = (-b + off) / (a + k);
  if (n * v > rec.threshold) return v;
  return (-b - off) / (a + k);
}

inline double load_current(const ElectricalLoad& load, double v) {
  if (const auto* r = std::get_if<ResistiveLoad>(&load)) return v * conductance(r->resistance);
  return std::get<RectifierLoad>(load).current(v);
}

inline double load_power(const ElectricalLoad& load, double v) {
  if (const auto* r = std::get_if<ResistiveLoad>(&load)) return v * v * conductance(r->resistance);
  const auto& rec = std::get<RectifierLoad>(load);
  return rec.battery_voltage * std::abs(rec.current(v));
}

}  // namespace detail

/// Monolithic implicit integration of the coupled equations
///   M d'' + C d' + K d - Theta v = -M L a_g(t)
///   Theta^T d' + Cp v' + i(v) = 0
/// Mechanical rows use constant-average-acceleration Newmark, the circuit row
/// the trapezoidal rule over the same step. The step is solved exactly: the
/// mechanical unknowns are condensed onto the scalar voltage.
inline TimeSimResult time_integrate(const AssembledSystem& sys, const ElectricalLoad& load,
                                    const Excitation& excitation, double dt, double T,
                                    const TimeSimOptions& opts = {}) {
  using detail::require;
  require(dt > 0 && std::isfinite(dt), "time step must be > 0");
  require(T >= 0 && std::isfinite(T), "duration must be >= 0");
  require(opts.record_stride >= 1, "record stride must be >= 1");
  validate_excitation(excitation);
  if (const auto* r = std::get_if<ResistiveLoad>(&load)) detail::conductance(r->resistance);
  if (const auto* r = std::get_if<RectifierLoad>(&load))
    require(r->n_units >= 1 && r->threshold >= 0 && r->series_resistance > 0,
            "rectifier load needs n_units >= 1, threshold >= 0, series resistance > 0");

  const int n = sys.size();
  const Eigen::SparseMatrix<double> M = detail::to_sparse(sys.M);
  const Eigen::SparseMatrix<double> K = detail::to_sparse(sys.K);
  const Eigen::SparseMatrix<double> C = detail::to_sparse(sys.C);
  const Eigen::VectorXd ML = sys.M * sys.Lvec;
  const Eigen::VectorXd& theta = sys.theta;
  const double Cp = sys.Cp;

  const double c0 = 4 / (dt * dt), c1 = 4 / dt, c2 = 2 / dt;
  Eigen::SparseMatrix<double> Keff = K + c0 * M + c2 * C;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> keff(Keff);
  if (keff.info() != Eigen::Success) throw SingularSystemError("effective stiffness factorization failed");
  const Eigen::VectorXd s = keff.solve(theta);
  const double a_coef = theta.dot(s) + Cp;

  Eigen::VectorXd d = opts.d0.value_or(Eigen::VectorXd::Zero(n));
  Eigen::VectorXd vel = opts.v0.value_or(Eigen::VectorXd::Zero(n));
  require(d.size() == n && vel.size() == n, "initial state size mismatch");
  double v = opts.vp0;

  double ag = base_acceleration(excitation, 0.0);
  Eigen::VectorXd F = -ag * ML;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> mass(M);
  Eigen::VectorXd acc = mass.solve(F - C * vel - K * d + theta * v);
  double i_load = detail::load_current(load, v);

  auto energy = [&](const Eigen::VectorXd& dd, const Eigen::VectorXd& vv, double volt) {
    return 0.5 * vv.dot(M * vv) + 0.5 * dd.dot(K * dd) + 0.5 * Cp * volt * volt;
  };

  const auto steps = static_cast<long>(std::llround(std::floor(T / dt + 1e-9)));
  TimeSimResult out;
  if (const auto* r = std::get_if<ResistiveLoad>(&load)) {
    out.R_l = r->resistance;
  } else {
    out.R_l = std::numeric_limits<double>::quiet_NaN();
  }
  out.source_capacitance = Cp;
  const std::size_t expected = static_cast<std::size_t>(steps / opts.record_stride + 1);
  for (auto* vec : {&out.t, &out.v_p, &out.tip_disp, &out.tip_vel, &out.tip_vel_abs,
                    &out.current, &out.power, &out.energy})
    vec->reserve(expected);

  const int tip = sys.dofs.tip(Dof::w);
  double base_vel = 0;
  const double E0 = energy(d, vel, v);
  double E = E0;
  double work_abs = 0;

  auto record = [&](double t) {
    out.t.push_back(t);
    out.v_p.push_back(v);
    out.tip_disp.push_back(d(tip));
    out.tip_vel.push_back(vel(tip));
    out.tip_vel_abs.push_back(vel(tip) + base_vel);
    out.current.push_back(i_load);
    out.power.push_back(detail::load_power(load, v));
    out.energy.push_back(E);
  };
  record(0.0);

  Eigen::VectorXd rhs(n), d_new(n), vel_new(n), acc_new(n);
  for (long k = 1; k <= steps; ++k) {
    const double t = k * dt;
    const double ag_new = base_acceleration(excitation, t);
    const Eigen::VectorXd F_new = -ag_new * ML;
    rhs = F_new + M * (c0 * d + c1 * vel + acc) + C * (c2 * d + vel);
    const Eigen::VectorXd dp = keff.solve(rhs);
    const double b = theta.dot(dp - d) - Cp * v + 0.5 * dt * i_load;
    const double v_new = detail::solve_circuit(load, a_coef, b, 0.5 * dt);
    d_new = dp + s * v_new;
    vel_new = c2 * (d_new - d) - vel;
    acc_new = c0 * (d_new - d) - c1 * vel - acc;
    const double i_new = detail::load_current(load, v_new);

    const Eigen::VectorXd dd = d_new - d;
    const double dW = 0.5 * (F + F_new).dot(dd);
    out.input_work += dW;
    work_abs += std::abs(dW);
    const Eigen::VectorXd vmid = 0.5 * (vel + vel_new);
    out.dissipated += dt * vmid.dot(C * vmid) + 0.25 * dt * (v + v_new) * (i_load + i_new);

    base_vel += 0.5 * dt * (ag + ag_new);
    d.swap(d_new);
    vel.swap(vel_new);
    acc.swap(acc_new);
    F = F_new;
    ag = ag_new;
    v = v_new;
    i_load = i_new;
    const double E_new = energy(d, vel, v);
    if (!std::isfinite(E_new))
      throw DivergenceError("non-finite state at t = " + std::to_string(t) + " s");
    if (opts.check_energy && E_new > (1 + 1e-6) * (E0 + work_abs) + 1e-30)
      throw DivergenceError("stored energy " + std::to_string(E_new) + " J exceeds initial energy plus input work " +
                            std::to_string(E0 + work_abs) + " J at t = " + std::to_string(t) + " s");
    E = E_new;
    if (k % opts.record_stride == 0) record(t);
  }
  return out;
}

/// Default step: forty steps per fundamental period.
inline double default_time_step(const AssembledSystem& sys) {
  return 1.0 / (40.0 * short_circuit_modes(sys, 1).frequencies.front());
}

/// Assembles the harvester with Rayleigh damping anchored at its first two
/// short-circuit modes (the time-domain counterpart of uniform modal zeta).
inline AssembledSystem damped_system(const HarvesterSpec& spec,
                                     const std::optional<TipMass>& tip = std::nullopt) {
  AssembledSystem sys = assemble(spec, tip);
  const RayleighDamping damping = anchored_damping(sys, spec.zeta);
  return with_damping(std::move(sys), damping);
}

/// Least-squares x(t) ~ Re(X e^{i 2 pi f t}) + c over samples with t >= t_from.
inline cdouble fit_harmonic(std::span<const double> t, std::span<const double> x,
                            double frequency, double t_from) {
  detail::require(t.size() == x.size(), "fit_harmonic: size mismatch");
  Eigen::Matrix3d A = Eigen::Matrix3d::Zero();
  Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
  const double w = 2 * std::numbers::pi * frequency;
  std::size_t used = 0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (t[k] < t_from) continue;
    const Eigen::Vector3d row(std::cos(w * t[k]), std::sin(w * t[k]), 1.0);
    A += row * row.transpose();
    rhs += row * x[k];
    ++used;
  }
  detail::require(used >= 3, "fit_harmonic: not enough samples in window");
  const Eigen::Vector3d c = A.ldlt().solve(rhs);
  return cdouble(c(0), -c(1));
}

/// Mean instantaneous power over [t0, t1] (trapezoidal in time).
inline double average_power(const TimeSimResult& sim, double t0, double t1) {
  detail::require(t1 > t0, "power window must have t1 > t0");
  detail::require(!sim.t.empty() && t0 >= sim.t.front() - 1e-12 && t1 <= sim.t.back() + 1e-9,
                  "power window lies outside the simulated span");
  const double eps = 1e-9 * std::max(1.0, std::abs(t1));
  double acc = 0, t_first = 0, t_last = 0;
  bool have = false;
  double prev_t = 0, prev_p = 0;
  for (std::size_t k = 0; k < sim.t.size(); ++k) {
    if (sim.t[k] < t0 - eps || sim.t[k] > t1 + eps) continue;
    if (have) {
      acc += 0.5 * (sim.power[k] + prev_p) * (sim.t[k] - prev_t);
    } else {
      t_first = sim.t[k];
      have = true;
    }
    prev_t = t_last = sim.t[k];
    prev_p = sim.power[k];
  }
  detail::require(have && t_last > t_first, "power window contains fewer than two samples");
  return acc / (t_last - t_first);
}

/// n identical, synchronous units in series. Voltages add; each unit keeps its
/// own R_l, so the chain drives n R_l and the source capacitance is Cp / n.
inline FrfResult series_chain(const FrfResult& unit, int n_units) {
  detail::require(n_units >= 1, "series chain needs n_units >= 1");
  FrfResult out = unit;
  for (auto& h : out.H_v) h *= static_cast<double>(n_units);
  out.R_l = unit.R_l * n_units;
  out.n_units = unit.n_units * n_units;
  out.source_capacitance = unit.source_capacitance / n_units;
  return out;
}

inline TimeSimResult series_chain(const TimeSimResult& unit, int n_units) {
  detail::require(n_units >= 1, "series chain needs n_units >= 1");
  TimeSimResult out = unit;
  const double n = n_units;
  for (auto& v : out.v_p) v *= n;
  for (auto& p : out.power) p *= n;
  for (auto& e : out.energy) e *= n;
  out.input_work *= n;
  out.dissipated *= n;
  out.R_l = unit.R_l * n;
  out.n_units = unit.n_units * n_units;
  out.source_capacitance = unit.source_capacitance / n;
  return out;
}

struct TipTuning {
  TipMass tip;
  double achieved_frequency = 0;  // [Hz]
  int iterations = 0;
};

/// Bisection on M_t (block geometry from `shape`) until the fundamental is
/// within `tolerance` of target. f1 decreases monotonically with M_t.
inline TipTuning tune_tip_mass(const HarvesterSpec& spec, double target_f,
                               double mass_lo, double mass_hi,
                               const TipMass& shape = TipMass{}, double tolerance = 0.01) {
  detail::require(target_f > 0, "target frequency must be > 0");
  detail::require(0 <= mass_lo && mass_lo < mass_hi, "mass bounds must satisfy 0 <= lo < hi");
  auto f1 = [&](double m) {
    TipMass t = shape;
    t.mass = m;
    return fundamental_frequency(spec, t);
  };
  TipTuning res;
  res.tip = shape;
  double lo = mass_lo, hi = mass_hi;
  double f_lo = f1(lo), f_hi = f1(hi);
  if (std::abs(f_lo - target_f) < tolerance) {
    res.tip.mass = lo;
    res.achieved_frequency = f_lo;
    return res;
  }
  if (std::abs(f_hi - target_f) < tolerance) {
    res.tip.mass = hi;
    res.achieved_frequency = f_hi;
    return res;
  }
  if (!(f_hi < target_f && target_f < f_lo))
    throw NotBracketedError("target " + std::to_string(target_f) + " Hz not bracketed by f1 in [" +
                            std::to_string(f_hi) + ", " + std::to_string(f_lo) + "] Hz");
  for (int it = 1; it <= 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f1(mid);
    res.iterations = it;
    if (std::abs(fm - target_f) < tolerance) {
      res.tip.mass = mid;
      res.achieved_frequency = fm;
      return res;
    }
    if (fm > target_f) lo = mid; else hi = mid;
  }
  throw ConvergenceError("tip-mass bisection did not converge");
}

}  // namespace piezowim
