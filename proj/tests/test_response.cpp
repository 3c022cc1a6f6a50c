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

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "piezowim/response.hpp"

using namespace piezowim;
using cd = std::complex<double>;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Direct {
  cd voltage;
  cd tip_rel_velocity;
};

// Dense solve of the full coupled harmonic system per unit base acceleration.
Direct direct_solve(const AssembledSystem& sys, double R_l, double f) {
  const int n = sys.size();
  const double w = 2 * std::numbers::pi * f;
  const cd iw(0, w);
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(n + 1, n + 1);
  A.topLeftCorner(n, n) = (sys.K - w * w * sys.M).cast<cd>() + iw * sys.C.cast<cd>();
  A.block(0, n, n, 1) = -sys.theta.cast<cd>();
  A.block(n, 0, 1, n) = iw * sys.theta.transpose().cast<cd>();
  A(n, n) = (std::isinf(R_l) ? 0.0 : 1.0 / R_l) + iw * sys.Cp;
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n + 1);
  rhs.head(n) = -(sys.M * sys.Lvec).cast<cd>();
  const Eigen::VectorXcd x = A.partialPivLu().solve(rhs);
  return {x(n), iw * x(sys.dofs.tip(Dof::w))};
}

AssembledSystem coarse(double zeta = 0.0069) {
  HarvesterSpec s = reference_harvester();
  s.n_elements = 12;
  s.zeta = zeta;
  return assemble(s);
}

}  // namespace

TEST(Frf, FullModalSumEqualsDirectSolveUndamped) {
  const AssembledSystem sys = coarse(0);
  const ModalBasis all = short_circuit_modes(sys, sys.size());
  const std::vector<double> grid{5, 40, 70, 90, 300, 1000, 3000};
  for (double R : {100.0, 1e4, 1e6, kInf}) {
    const FrfResult r = tip_velocity_frf(sys, all, R, grid, 0.0);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const Direct d = direct_solve(sys, R, grid[k]);
      EXPECT_LT(std::abs(r.H_v[k] - d.voltage), 1e-8 * std::abs(d.voltage)) << R << " " << grid[k];
      EXPECT_LT(std::abs(r.H_vel_rel[k] - d.tip_rel_velocity), 1e-8 * std::abs(d.tip_rel_velocity));
      EXPECT_LT(std::abs(r.H_vel[k] - (d.tip_rel_velocity + 1.0 / cd(0, 2 * std::numbers::pi * grid[k]))),
                1e-8 * std::abs(r.H_vel[k]));
    }
  }
}

TEST(Frf, ModalDampingMatchesRayleighNearResonance) {
  HarvesterSpec s = reference_harvester();
  const AssembledSystem sys = with_damping(assemble(s), anchored_damping(assemble(s), s.zeta));
  const ModalBasis sc = short_circuit_modes(sys, 5);
  for (double f : {0.98 * sc.frequencies[0], sc.frequencies[0], 1.02 * sc.frequencies[0]}) {
    const std::vector<double> g{f};
    const FrfResult r = voltage_frf(sys, sc, 1e4, g, s.zeta);
    const Direct d = direct_solve(sys, 1e4, f);
    EXPECT_NEAR(std::abs(r.H_v[0]) / std::abs(d.voltage), 1.0, 5e-3);
    EXPECT_NEAR(std::arg(r.H_v[0] / d.voltage), 0.0, 0.01);
  }
}

TEST(Frf, TruncationFiveVersusTenModes) {
  const AssembledSystem sys = assemble(reference_harvester());
  const ModalBasis b5 = short_circuit_modes(sys, 5), b10 = short_circuit_modes(sys, 10);
  const std::vector<double> g{b5.frequencies[0]};
  const double a5 = std::abs(voltage_frf(sys, b5, 100, g, 0.0069).H_v[0]);
  const double a10 = std::abs(voltage_frf(sys, b10, 100, g, 0.0069).H_v[0]);
  EXPECT_LT(std::abs(a5 - a10) / a10, 5e-3);
}

TEST(Frf, LimitsShortAndOpen) {
  const AssembledSystem sys = coarse();
  const ModalBasis sc = short_circuit_modes(sys, 5);
  const std::vector<double> g{50};
  EXPECT_LT(std::abs(voltage_frf(sys, sc, 1e-9, g, 0.0069).H_v[0]), 1e-9);
  const cd open = voltage_frf(sys, sc, kInf, g, 0.0069).H_v[0];
  const cd big = voltage_frf(sys, sc, 1e15, g, 0.0069).H_v[0];
  EXPECT_LT(std::abs(open - big), 1e-6 * std::abs(open));
}

TEST(Frf, VelocityRejectsZeroFrequency) {
  const AssembledSystem sys = coarse();
  const ModalBasis sc = short_circuit_modes(sys, 3);
  const std::vector<double> g{0.0};
  EXPECT_THROW(tip_velocity_frf(sys, sc, 100, g, 0.0069), ValidationError);
}

TEST(Frf, PeakBetweenShortAndOpenAndMonotoneInLoad) {
  const AssembledSystem sys = assemble(reference_harvester(), bracket_tip_mass(78e-3));
  const ModalBasis sc = short_circuit_modes(sys, 5), oc = open_circuit_modes(sys, 1);
  const double lo = sc.frequencies[0], hi = oc.frequencies[0];
  double prev = 0;
  for (double R = 10; R <= 1e8; R *= 3) {
    const double p = voltage_peak_frequency(sys, sc, R, 0.0069, 0.8 * lo, 1.2 * hi);
    EXPECT_GT(p, lo * (1 - 1e-6)) << R;
    EXPECT_LT(p, hi * (1 + 1e-6)) << R;
    EXPECT_GE(p, prev - 1e-9) << R;
    prev = p;
  }
}

TEST(Frf, SeriesChain) {
  const AssembledSystem sys = coarse();
  const ModalBasis sc = short_circuit_modes(sys, 3);
  const std::vector<double> g{60};
  const FrfResult u = voltage_frf(sys, sc, 100, g, 0.0069);
  const FrfResult c = series_chain(u, 2);
  EXPECT_EQ(c.H_v[0], 2.0 * u.H_v[0]);
  EXPECT_EQ(c.R_l, 200);
  EXPECT_EQ(c.source_capacitance, u.source_capacitance / 2);
}

TEST(TimeSim, LinearityScaling) {
  const AssembledSystem sys = damped_system(reference_harvester(), bracket_tip_mass(0.05));
  const double dt = default_time_step(sys);
  const TimeSimResult a = time_integrate(sys, ResistiveLoad{1e4}, HarmonicExcitation{1.0, 14}, dt, 1.0);
  const TimeSimResult b = time_integrate(sys, ResistiveLoad{1e4}, HarmonicExcitation{2.0, 14}, dt, 1.0);
  double vmax = 0;
  for (double v : a.v_p) vmax = std::max(vmax, std::abs(v));
  for (std::size_t k = 0; k < a.v_p.size(); ++k)
    EXPECT_LE(std::abs(b.v_p[k] - 2 * a.v_p[k]), 1e-10 * vmax);
}

TEST(TimeSim, HarmonicSteadyStateMatchesFrf) {
  const HarvesterSpec s = reference_harvester();
  const AssembledSystem sys = damped_system(s, bracket_tip_mass(78e-3));
  const ModalBasis sc = short_circuit_modes(sys, 5);
  const double f = sc.frequencies[0];
  const double T = 1 / f;
  const TimeSimResult r =
      time_integrate(sys, ResistiveLoad{1e4}, HarmonicExcitation{1.0, f}, T / 200, 400 * T);
  const cd X = fit_harmonic(r.t, r.v_p, f, 380 * T);
  const std::vector<double> g{f};
  const cd H = voltage_frf(sys, sc, 1e4, g, s.zeta).H_v[0];
  EXPECT_NEAR(std::abs(X) / std::abs(H), 1.0, 0.01);
  EXPECT_NEAR(std::arg(X / H) * 180 / std::numbers::pi, 0.0, 2.0);
}

TEST(TimeSim, UndampedOpenCircuitConservesEnergy) {
  HarvesterSpec s = reference_harvester();
  s.zeta = 0;
  const AssembledSystem sys = assemble(s);
  const ModalBasis oc = open_circuit_modes(sys, 1);
  TimeSimOptions opt;
  opt.d0 = Eigen::VectorXd(1e-4 * oc.shapes.col(0) / std::abs(tip_deflection(sys, oc, 0)));
  // Uncharged electrodes: Theta^T d + Cp v = 0.
  opt.vp0 = -sys.theta.dot(*opt.d0) / sys.Cp;
  const double T = 1 / oc.frequencies[0];
  const TimeSimResult r = time_integrate(sys, ResistiveLoad{kInf}, HarmonicExcitation{0, 1}, T / 50, 100 * T, opt);
  const double E0 = r.energy.front();
  for (double E : r.energy) EXPECT_NEAR(E / E0, 1.0, 1e-3);
}

TEST(TimeSim, RejectsBadInputs) {
  const AssembledSystem sys = coarse();
  EXPECT_THROW(time_integrate(sys, ResistiveLoad{100}, HarmonicExcitation{1, 10}, 0, 1), ValidationError);
  EXPECT_THROW(time_integrate(sys, ResistiveLoad{-1}, HarmonicExcitation{1, 10}, 1e-3, 1), ValidationError);
  EXPECT_THROW(time_integrate(sys, ResistiveLoad{100}, HarmonicExcitation{1, 0}, 1e-3, 1), ValidationError);
  SampledExcitation bad;
  bad.dt = 0;
  EXPECT_THROW(time_integrate(sys, ResistiveLoad{100}, bad, 1e-3, 1), ValidationError);
}

TEST(TimeSim, SampledExcitationInterpolates) {
  SampledExcitation s;
  s.t0 = 1;
  s.dt = 0.5;
  s.accel = {0, 2, 4};
  EXPECT_DOUBLE_EQ(base_acceleration(s, 1.25), 1.0);
  EXPECT_DOUBLE_EQ(base_acceleration(s, 2.0), 4.0);
  EXPECT_DOUBLE_EQ(base_acceleration(s, 0.5), 0.0);
  EXPECT_DOUBLE_EQ(base_acceleration(s, 2.5), 0.0);
  EXPECT_DOUBLE_EQ(s.fs(), 2.0);
  EXPECT_DOUBLE_EQ(s.duration(), 1.0);
}

TEST(TimeSim, RectifierBlocksBelowThreshold) {
  const AssembledSystem sys = damped_system(reference_harvester(), bracket_tip_mass(78e-3));
  RectifierLoad load;
  load.threshold = 1e6;
  const TimeSimResult r = time_integrate(sys, load, HarmonicExcitation{1.0, 11}, 1e-3, 0.5);
  for (double i : r.current) EXPECT_EQ(i, 0);
  for (double p : r.power) EXPECT_EQ(p, 0);
}

TEST(TimeSim, RectifierCircuitSolveIsConsistent) {
  RectifierLoad load;
  load.n_units = 2;
  load.threshold = 6.9;
  load.series_resistance = 10;
  const ElectricalLoad l = load;
  for (double b : {-20.0, -3.0, 0.0, 2.0, 7.0, 50.0}) {
    const double a = 1e-7, h = 1e-4;
    const double v = detail::solve_circuit(l, a, b * a, h);
    EXPECT_NEAR(a * v + b * a + h * load.current(v), 0, 1e-12 * std::max(1.0, std::abs(b * a)));
  }
}

TEST(TimeSim, EnergyAuditBalances) {
  const AssembledSystem sys = damped_system(reference_harvester(), bracket_tip_mass(0.05));
  const TimeSimResult r = time_integrate(sys, ResistiveLoad{1e4}, HarmonicExcitation{2.0, 13}, 1e-3, 3.0);
  const double stored = r.energy.back() - r.energy.front();
  EXPECT_NEAR(r.input_work - r.dissipated, stored, 1e-6 * std::abs(r.input_work));
}

TEST(TimeSim, DefaultStepIsFortyPerPeriod) {
  const AssembledSystem sys = assemble(reference_harvester());
  EXPECT_NEAR(default_time_step(sys) * 40 * fundamental_frequency(reference_harvester()), 1.0, 1e-12);
}

TEST(TimeSim, FitHarmonicRecoversPhasor) {
  std::vector<double> t, x;
  for (int k = 0; k < 2000; ++k) {
    t.push_back(k * 1e-3);
    x.push_back(0.3 + 2.0 * std::cos(2 * std::numbers::pi * 7 * t.back() + 0.4));
  }
  const cd X = fit_harmonic(t, x, 7, 0);
  EXPECT_NEAR(std::abs(X), 2.0, 1e-10);
  EXPECT_NEAR(std::arg(X), 0.4, 1e-10);
}

TEST(TimeSim, AveragePowerOfConstant) {
  TimeSimResult r;
  for (int k = 0; k <= 10; ++k) {
    r.t.push_back(0.1 * k);
    r.power.push_back(3.0);
  }
  EXPECT_NEAR(average_power(r, 0.2, 0.8), 3.0, 1e-14);
  EXPECT_THROW(average_power(r, 0.8, 0.2), ValidationError);
}

TEST(TuneMass, ReachesTargetFundamental) {
  const HarvesterSpec s = reference_harvester();
  const TipTuning r = tune_tip_mass(s, 11.20, 0, 0.1);
  EXPECT_NEAR(r.achieved_frequency, 11.20, 0.01);
  EXPECT_NEAR(r.tip.mass, 0.078, 0.1 * 0.078);
  const TipTuning r13 = tune_tip_mass(s, 25.84, 0, 0.1);
  EXPECT_NEAR(r13.tip.mass, 0.013, 0.15 * 0.013);
}

TEST(TuneMass, BareTargetAndBracketing) {
  const HarvesterSpec s = reference_harvester();
  const TipTuning r = tune_tip_mass(s, fundamental_frequency(s), 0, 0.1);
  EXPECT_EQ(r.tip.mass, 0);
  EXPECT_THROW(tune_tip_mass(s, 200, 0, 0.1), NotBracketedError);
  EXPECT_THROW(tune_tip_mass(s, 2, 0, 0.1), NotBracketedError);
}
