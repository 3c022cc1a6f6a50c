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

// Modal summary, a voltage FRF and the chain charging power for a tuned unit.
// Usage: harvester_response [config.ini]

#include <cstdio>
#include <exception>
#include <vector>

#include "piezowim/piezowim.hpp"

using namespace piezowim;

int main(int argc, char** argv) try {
  RunConfig cfg;
  if (argc > 1) cfg = load_config(argv[1]).config;
  const auto tip = cfg.tip_mass();
  const AssembledSystem sys = damped_system(cfg.harvester, tip);
  const ModalBasis sc = short_circuit_modes(sys, 3), oc = open_circuit_modes(sys, 3);
  std::printf("tip mass %.1f g, Cp %.3f nF\n", tip ? tip->mass * 1e3 : 0.0, sys.Cp * 1e9);
  for (int r = 0; r < sc.count(); ++r)
    std::printf("mode %d  short %.3f Hz  open %.3f Hz\n", r + 1, sc.frequencies[r], oc.frequencies[r]);

  const double f1 = sc.frequencies[0];
  std::vector<double> grid;
  for (int k = 0; k <= 8; ++k) grid.push_back(f1 * (0.96 + 0.01 * k));
  const FrfResult h = voltage_frf(sys, sc, 1e5, grid, cfg.harvester.zeta);
  std::printf("\n|Hv| at 100 kOhm [V/g]\n");
  for (std::size_t k = 0; k < grid.size(); ++k)
    std::printf("  %8.3f Hz  %10.4f\n", grid[k], std::abs(h.voltage_per_g(k)));

  const RectifierLoad load = rectifier_load(cfg.rectifier, cfg.battery.nominal_V, 2, cfg.series_resistance);
  const ChainCharging c =
      resonant_chain_charging(sys, load, 0.12 * kGravity, f1, oc.frequencies[0]);
  std::printf("\ntwo-unit chain at 0.12 g, %.3f Hz: %.3f mW into the battery\n", c.frequency,
              c.battery_power * 1e3);
  return 0;
} catch (const std::exception& e) {
  std::fprintf(stderr, "error: %s\n", e.what());
  return 1;
}
