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

// Electromechanical finite-element model of a series-connected symmetric
// bimorph cantilever: homogenized section, two-node Euler-Bernoulli elements
// (linear axial, cubic Hermite bending), tip mass and Rayleigh damping.

#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <string>

#include "piezowim/errors.hpp"

namespace piezowim {

using Matrix6 = Eigen::Matrix<double, 6, 6>;
using Vector6 = Eigen::Matrix<double, 6, 1>;

/// Bimorph geometry and constitutive constants, strict SI.
struct HarvesterSpec {
  double length = 0;        // L [m]
  double width = 0;         // b [m]
  double h_s = 0;           // substrate thickness [m]
  double h_p = 0;           // one piezo layer [m]
  double Y_s = 0;           // substrate modulus [Pa]
  double rho_s = 0;         // [kg/m^3]
  double c11 = 0;           // piezo modulus at constant field [Pa]
  double rho_p = 0;         // [kg/m^3]
  double e31 = 0;           // [C/m^2], sign carries poling
  double eps33 = 0;         // permittivity at constant strain [F/m]
  double zeta = 0.0069;     // uniform modal damping ratio
  int n_elements = 40;

  void validate() const {
    using detail::require;
    require(length > 0 && width > 0 && h_s > 0 && h_p > 0,
            "harvester geometry must be strictly positive");
    require(Y_s > 0 && c11 > 0, "elastic moduli must be strictly positive");
    require(rho_s > 0 && rho_p > 0, "densities must be strictly positive");
    require(eps33 > 0, "permittivity must be strictly positive");
    require(std::isfinite(e31), "e31 must be finite");
    require(zeta >= 0 && zeta < 1, "zeta must lie in [0, 1)");
    require(n_elements >= 1, "n_elements must be >= 1");
  }

  bool operator==(const HarvesterSpec&) const = default;
};

/// Q220-A4BR-2513YB bender constants.
inline HarvesterSpec reference_harvester() {
  HarvesterSpec s;
  s.length = 57.7e-3;
  s.width = 31.8e-3;
  s.h_s = 0.17e-3;
  s.h_p = 0.19e-3;
  s.Y_s = 100e9;
  s.rho_s = 8400;
  s.c11 = 66e9;
  s.rho_p = 8000;
  s.e31 = -5.4;
  s.eps33 = 7.96e-9;
  s.zeta = 0.0069;
  s.n_elements = 40;
  return s;
}

/// How the rotary inertia of the prismatic tip block is evaluated. Both use
/// I_t = M_t [(la^2+lb^2)/12 + d^2] with d = (l + h_s)/2 + h_p; they differ in l.
///  - width_offset takes l = b, the beam width (reproduces the tuned ladder).
///  - block_centroid takes l = l_b, the parallel-axis offset to the block centroid.
enum class TipInertiaModel { width_offset, block_centroid };

struct TipMass {
  double mass = 0;       // M_t [kg]
  double l_a = 14e-3;    // block depth along beam axis [m]
  double l_b = 2e-3;     // block height [m]
  TipInertiaModel model = TipInertiaModel::width_offset;

  void validate() const {
    detail::require(mass >= 0 && std::isfinite(mass), "tip mass must be >= 0");
    if (mass > 0)
      detail::require(l_a > 0 && l_b > 0,
                      "tip block dimensions must be positive when M_t > 0");
  }

  bool operator==(const TipMass&) const = default;
};

/// Stack of 13 g brackets, 14 x 2 mm cross-section.
inline TipMass bracket_tip_mass(double mass_kg) {
  TipMass t;
  t.mass = mass_kg;
  return t;
}

struct SectionProperties {
  double rho_h = 0;  // homogenized density [kg/m^3]
  double A_h = 0;    // modulus-weighted area [m^2]
  double I2_h = 0;   // modulus-weighted second moment [m^4]
  double A_p = 0;    // one piezo layer area [m^2]
  double I1_p = 0;   // first moment of one piezo layer about mid-plane [m^3]

  double mass_per_length() const { return rho_h * A_h; }
};

/// Homogenized (piezo-modulus-referenced) section from the standard
/// layered-section formulas.
inline SectionProperties homogenized_section(const HarvesterSpec& spec) {
  spec.validate();
  const double n = spec.Y_s / spec.c11;
  const double b = spec.width;
  const double hs = spec.h_s;
  const double hp = spec.h_p;
  SectionProperties s;
  s.A_h = b * (n * hs + 2 * hp);
  s.rho_h = b * (hs * spec.rho_s + 2 * hp * spec.rho_p) / s.A_h;
  const double outer = std::pow(hs / 2 + hp, 3);
  const double inner = std::pow(hs / 2, 3);
  s.I2_h = n * b * hs * hs * hs / 12 + (2 * b / 3) * (outer - inner);
  s.A_p = b * hp;
  s.I1_p = s.A_p * (hs + hp) / 2;
  return s;
}

/// Element matrices in local DOF order (u1, w1, theta1, u2, w2, theta2).
struct ElementMatrices {
  Matrix6 M = Matrix6::Zero();
  Matrix6 K = Matrix6::Zero();
  Vector6 theta = Vector6::Zero();  // coupling [C/m scale]
  double Cp = 0;                    // [F]
  double l_e = 0;                   // [m]
};

inline ElementMatrices element_matrices(const HarvesterSpec& spec, double l_e) {
  detail::require(l_e > 0 && std::isfinite(l_e), "element length must be > 0");
  const SectionProperties sec = homogenized_section(spec);
  const double l = l_e;
  const double l2 = l * l;

  ElementMatrices em;
  em.l_e = l;

  const int iu[2] = {0, 3};
  const int iw[4] = {1, 2, 4, 5};

  // Axial: linear Lagrange.
  const double m_axial = sec.rho_h * sec.A_h * l / 6;
  const double k_axial = spec.c11 * sec.A_h / l;
  for (int a = 0; a < 2; ++a)
    for (int c = 0; c < 2; ++c) {
      em.M(iu[a], iu[c]) = m_axial * (a == c ? 2.0 : 1.0);
      em.K(iu[a], iu[c]) = k_axial * (a == c ? 1.0 : -1.0);
    }

  // Bending: cubic Hermite, translational + rotary inertia.
  Eigen::Matrix4d mw;
  mw << 156, 22 * l, 54, -13 * l,
        22 * l, 4 * l2, 13 * l, -3 * l2,
        54, 13 * l, 156, -22 * l,
        -13 * l, -3 * l2, -22 * l, 4 * l2;
  mw *= sec.rho_h * sec.A_h * l / 420;
  Eigen::Matrix4d mr;
  mr << 36, 3 * l, -36, 3 * l,
        3 * l, 4 * l2, -3 * l, -l2,
        -36, -3 * l, 36, -3 * l,
        3 * l, -l2, -3 * l, 4 * l2;
  mr *= sec.rho_h * sec.I2_h / (30 * l);
  Eigen::Matrix4d kw;
  kw << 12, 6 * l, -12, 6 * l,
        6 * l, 4 * l2, -6 * l, 2 * l2,
        -12, -6 * l, 12, -6 * l,
        6 * l, 2 * l2, -6 * l, 4 * l2;
  kw *= spec.c11 * sec.I2_h / (l2 * l);
  for (int a = 0; a < 4; ++a)
    for (int c = 0; c < 4; ++c) {
      em.M(iw[a], iw[c]) = mw(a, c) + mr(a, c);
      em.K(iw[a], iw[c]) = kw(a, c);
    }

  // Coupling: integral of B^T e31 [A_p, -I1_p] / (2 h_p) per layer. The two
  // layers carry opposite e31 and sit at opposite z, so the axial (A_p) parts
  // cancel and the bending parts add. The curvature row integrates to
  // theta2 - theta1.
  const double bending = -2.0 * spec.e31 * sec.I1_p / (2.0 * spec.h_p);
  em.theta(2) = -bending;
  em.theta(5) = bending;

  em.Cp = spec.eps33 * spec.width * l / (2 * spec.h_p);
  return em;
}

/// Rotary inertia of the tip block about the bimorph mid-plane axis.
inline double tip_mass_inertia(const TipMass& tip, const HarvesterSpec& spec) {
  tip.validate();
  if (tip.mass == 0) return 0;
  const double block = (tip.l_a * tip.l_a + tip.l_b * tip.l_b) / 12;
  const double lever = tip.model == TipInertiaModel::width_offset
                           ? spec.width
                           : tip.l_b;
  const double offset = (lever + spec.h_s) / 2 + spec.h_p;
  return tip.mass * (block + offset * offset);
}

enum class Dof { u = 0, w = 1, theta = 2 };

/// Node/DOF bookkeeping after clamping node 0. Free node k (1-based mesh node)
/// owns global equations 3(k-1) .. 3(k-1)+2.
struct DofMap {
  int n_nodes = 0;  // mesh nodes including the clamped one

  int free_nodes() const { return n_nodes - 1; }
  int size() const { return 3 * free_nodes(); }
  /// Equation index, or -1 for a clamped DOF.
  int index(int node, Dof d) const {
    if (node <= 0) return -1;
    return 3 * (node - 1) + static_cast<int>(d);
  }
  int tip(Dof d) const { return index(n_nodes - 1, d); }
};

struct AssembledSystem {
  HarvesterSpec spec;
  TipMass tip;
  Eigen::MatrixXd M;
  Eigen::MatrixXd K;
  Eigen::MatrixXd C;      // zero until a damping model is applied
  Eigen::VectorXd theta;  // collapsed single-voltage coupling
  double Cp = 0;          // total capacitance [F]
  Eigen::VectorXd Lvec;   // ones at w DOFs
  DofMap dofs;

  int size() const { return static_cast<int>(M.rows()); }
};

inline AssembledSystem assemble(const HarvesterSpec& spec,
                                const std::optional<TipMass>& tip = std::nullopt) {
  spec.validate();
  const int ne = spec.n_elements;
  const double le = spec.length / ne;
  const ElementMatrices em = element_matrices(spec, le);

  const int n_all = 3 * (ne + 1);
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n_all, n_all);
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n_all, n_all);
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(n_all);
  double Cp = 0;
  for (int e = 0; e < ne; ++e) {
    const int o = 3 * e;
    M.block<6, 6>(o, o) += em.M;
    K.block<6, 6>(o, o) += em.K;
    theta.segment<6>(o) += em.theta;
    Cp += em.Cp;
  }

  AssembledSystem sys;
  sys.spec = spec;
  sys.tip = tip.value_or(TipMass{});
  sys.dofs.n_nodes = ne + 1;
  const int n = sys.dofs.size();
  sys.M = M.bottomRightCorner(n, n);
  sys.K = K.bottomRightCorner(n, n);
  sys.theta = theta.tail(n);
  sys.C = Eigen::MatrixXd::Zero(n, n);
  sys.Cp = Cp;

  if (tip && tip->mass > 0) {
    const double It = tip_mass_inertia(*tip, spec);
    sys.M(sys.dofs.tip(Dof::u), sys.dofs.tip(Dof::u)) += tip->mass;
    sys.M(sys.dofs.tip(Dof::w), sys.dofs.tip(Dof::w)) += tip->mass;
    sys.M(sys.dofs.tip(Dof::theta), sys.dofs.tip(Dof::theta)) += It;
  } else if (tip) {
    tip->validate();
  }

  sys.Lvec = Eigen::VectorXd::Zero(n);
  for (int node = 1; node < sys.dofs.n_nodes; ++node)
    sys.Lvec(sys.dofs.index(node, Dof::w)) = 1.0;

  Eigen::LLT<Eigen::MatrixXd> llt(sys.K);
  if (llt.info() != Eigen::Success)
    throw SingularSystemError("stiffness matrix is not positive definite after clamping");
  return sys;
}

/// C = alpha M + beta K matched to one damping ratio at two anchor frequencies.
struct RayleighDamping {
  double alpha = 0;  // [1/s]
  double beta = 0;   // [s]
  Eigen::MatrixXd C;

  /// Modal damping ratio the Rayleigh curve assigns at omega [rad/s].
  double ratio_at(double omega) const { return alpha / (2 * omega) + beta * omega / 2; }
};

inline RayleighDamping damping_matrix(const AssembledSystem& sys, double zeta,
                                      double omega_a, double omega_b) {
  detail::require(zeta >= 0 && zeta < 1, "zeta must lie in [0, 1)");
  detail::require(omega_a > 0 && omega_b > omega_a,
                  "anchor frequencies must satisfy 0 < omega_a < omega_b");
  RayleighDamping r;
  r.alpha = 2 * zeta * omega_a * omega_b / (omega_a + omega_b);
  r.beta = 2 * zeta / (omega_a + omega_b);
  r.C = r.alpha * sys.M + r.beta * sys.K;
  return r;
}

inline AssembledSystem with_damping(AssembledSystem sys, const RayleighDamping& d) {
  sys.C = d.C;
  return sys;
}

}  // namespace piezowim
