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

#pragma once

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "piezowim/beam_fem.hpp"

namespace piezowim {

enum class Circuit { short_circuit, open_circuit };

inline const char* to_string(Circuit c) {
  return c == Circuit::short_circuit ? "short" : "open";
}

/// Lowest modes of a generalized eigenproblem, mass-normalized.
struct ModalBasis {
  Circuit circuit = Circuit::short_circuit;
  std::vector<double> frequencies;  // ascending [Hz]
  Eigen::MatrixXd shapes;           // n_m x N_m, phi^T M phi = I
  std::vector<std::string> warnings;

  int count() const { return static_cast<int>(frequencies.size()); }
  double omega(int r) const { return 2 * std::numbers::pi * frequencies.at(r); }
};

namespace detail {

inline ModalBasis solve_modes(const Eigen::MatrixXd& K, const Eigen::MatrixXd& M,
                              int n_modes, Circuit circuit) {
  const int n = static_cast<int>(K.rows());
  require(n_modes >= 1 && n_modes <= n, "mode count must lie in [1, n_m]");

  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(
      K, M, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
  if (es.info() != Eigen::Success)
    throw ConvergenceError("generalized eigen-solve did not converge");

  ModalBasis basis;
  basis.circuit = circuit;
  basis.shapes.resize(n, n_modes);
  const Eigen::VectorXd& lam = es.eigenvalues();
  const double k_norm = K.norm(), m_norm = M.norm();
  for (int r = 0; r < n_modes; ++r) {
    if (!(lam(r) > 0))
      throw ConvergenceError("non-positive eigenvalue " + std::to_string(lam(r)) +
                             " in mode " + std::to_string(r + 1));
    Eigen::VectorXd phi = es.eigenvectors().col(r);
    phi /= std::sqrt(phi.dot(M * phi));
    Eigen::Index imax = 0;
    phi.cwiseAbs().maxCoeff(&imax);
    if (phi(imax) < 0) phi = -phi;

    // Normwise backward error of the eigenpair.
    const double resid = (K * phi - lam(r) * (M * phi)).norm() /
                         ((k_norm + lam(r) * m_norm) * phi.norm());
    if (!(resid < 1e-10)) {
      std::ostringstream msg;
      msg << "mode " << r + 1 << " backward error " << resid << " exceeds 1e-10";
      throw ConvergenceError(msg.str());
    }
    basis.shapes.col(r) = phi;
    basis.frequencies.push_back(std::sqrt(lam(r)) / (2 * std::numbers::pi));
  }

  // Eigen returns an orthonormal basis inside clusters already; flag them.
  for (int r = 1; r < n_modes; ++r) {
    const double gap = (lam(r) - lam(r - 1)) / lam(r);
    if (gap < 1e-6)
      basis.warnings.push_back("modes " + std::to_string(r) + " and " +
                               std::to_string(r + 1) + " are nearly repeated");
  }
  return basis;
}

}  // namespace detail

/// Stiffness with the output voltage statically condensed (R_l -> infinity).
inline Eigen::MatrixXd open_circuit_stiffness(const AssembledSystem& sys) {
  return sys.K + sys.theta * sys.theta.transpose() / sys.Cp;
}

inline ModalBasis short_circuit_modes(const AssembledSystem& sys, int n_modes = 5) {
  return detail::solve_modes(sys.K, sys.M, n_modes, Circuit::short_circuit);
}

inline ModalBasis open_circuit_modes(const AssembledSystem& sys, int n_modes = 5) {
  return detail::solve_modes(open_circuit_stiffness(sys), sys.M, n_modes,
                             Circuit::open_circuit);
}

/// Tip transverse entry of mode r.
inline double tip_deflection(const AssembledSystem& sys, const ModalBasis& basis, int r) {
  return basis.shapes(sys.dofs.tip(Dof::w), r);
}

/// First short-circuit natural frequency [Hz].
inline double fundamental_frequency(const HarvesterSpec& spec,
                                    const std::optional<TipMass>& tip = std::nullopt) {
  return short_circuit_modes(assemble(spec, tip), 1).frequencies.front();
}

/// Rayleigh damping anchored at the first two short-circuit modes.
inline RayleighDamping anchored_damping(const AssembledSystem& sys, double zeta) {
  const ModalBasis sc = short_circuit_modes(sys, 2);
  return damping_matrix(sys, zeta, sc.omega(0), sc.omega(1));
}

}  // namespace piezowim
