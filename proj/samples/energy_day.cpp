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

// One day of duty cycling at several traffic rates.
// Usage: energy_day [harvest_mW]

#include <cstdio>
#include <cstdlib>
#include <exception>

#include "piezowim/piezowim.hpp"

using namespace piezowim;

int main(int argc, char** argv) try {
  const double harvest = (argc > 1 ? std::atof(argv[1]) : 0.53) * 1e-3;
  const DutyCycleSpec duty;
  const BatterySpec batt;
  const BreakEven be = break_even_rate(duty, harvest, batt.charge_eff);
  std::printf("harvest %.3f mW, break-even %.2f events/day\n", harvest * 1e3, be.rate);
  for (double rate : {0.0, 2.0, 5.0, 10.0, 20.0, 40.0}) {
    const DutyCycleResult r =
        simulate_duty_cycle(duty, harvest, batt, 86400, uniform_triggers(rate, 86400));
    std::printf("%5.1f /day  soc %.6f -> %.6f  %s\n", rate, 0.875, r.soc_final,
                r.self_sustaining ? "self-sustaining" : "draining");
  }
  return 0;
} catch (const std::exception& e) {
  std::fprintf(stderr, "error: %s\n", e.what());
  return 1;
}
