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

// Synthesize a noisy slab record from an event list, recover the gauge factor
// and detect the loading events.
// Usage: wim_calibration events.csv [noise_rms_V] [seed]

#include <cstdio>
#include <cstdlib>
#include <exception>

#include "piezowim/piezowim.hpp"

using namespace piezowim;

int main(int argc, char** argv) try {
  if (argc < 2) {
    std::fprintf(stderr, "usage: %s events.csv [noise_rms_V] [seed]\n", argv[0]);
    return 2;
  }
  const auto events = load_events_csv(argv[1]);
  const PavementSpec slab;
  const SensingCircuit circuit;
  WimTraceOptions opt;
  opt.noise_rms = argc > 2 ? std::atof(argv[2]) : 5e-4;
  opt.seed = argc > 3 ? std::strtoull(argv[3], nullptr, 10) : 1;
  opt.visco.tau = 0.3;
  double t_end = 0;
  for (const auto& e : events) t_end = std::max(t_end, e.t_end);
  opt.samples = static_cast<int>((t_end + 3) * circuit.fs);

  const WimTrace tr = synthesize_wim_trace(events, slab, circuit, opt);
  const GaugeFit fit = fit_gauge_factor(tr.strain, tr.dRR);
  std::printf("%zu samples, lambda %.1f (true %.1f), R2 %.4f\n", tr.t.size(), fit.lambda,
              slab.lambda, fit.r2);
  DetectionOptions det;
  det.min_gap = 0.3;
  for (const auto& e : detect_events(tr.R, circuit.fs, slab, det))
    std::printf("event %.1f-%.1f s, peak strain %.2e\n", e.t_start, e.t_end, e.peak_strain);
  return 0;
} catch (const std::exception& e) {
  std::fprintf(stderr, "error: %s\n", e.what());
  return 1;
}
