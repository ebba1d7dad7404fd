// Wall-clock comparison of the OpenMP kernels against their serial references.
//
//   pwbf_bench [repeats]

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>

#include "pwbf/compounding.hpp"
#include "pwbf/engine.hpp"
#include "pwbf/simulator.hpp"

namespace {

using namespace pwbf;

double best_of(int repeats, const std::function<void()>& fn) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

void row(const std::string& kernel, double serial, double parallel) {
  std::printf("%-28s %10.3f %10.3f %8.2fx\n", kernel.c_str(), serial, parallel, serial / parallel);
}

}  // namespace

int main(int argc, char** argv) {
  const int repeats = argc > 1 ? std::max(1, std::atoi(argv[1])) : 3;
  const double fc = 5.2e6;
  const auto probe = ProbeGeometry::linear(64, 1540.0 / fc, fc, 4 * fc, 1540.0);
  const auto ph = make_cyst_phantom({-11e-3, 11e-3, 7e-3, 29e-3}, {{0.0, 18e-3, 3e-3}}, 60e6, 1.0, 1);
  AcquisitionSpec spec;
  spec.probe = probe;
  spec.angles = select_angles(3);
  spec.trace_length = required_trace_length(ph, probe, spec.angles, 0.67);
  spec.channel_noise_std = 0.01;

  std::printf("threads: %d, scatterers: %zu, repeats: %d\n", omp_get_max_threads(),
              ph.scatterers.size(), repeats);
  std::printf("%-28s %10s %10s %9s\n", "kernel", "serial [s]", "omp [s]", "speedup");

  ChannelDataSet data;
  const double sim_ref = best_of(repeats, [&] { data = reference::simulate_channels(ph, spec).data; });
  const double sim_omp = best_of(repeats, [&] { data = simulate_channels(ph, spec).data; });
  row("simulate_channels (3 PW)", sim_ref, sim_omp);

  const auto frame = make_analytic_frame(data, 1);
  const auto grid = ImagingGrid::uniform(-8e-3, 8e-3, 200, 10e-3, 26e-3, 200);
  for (Method m : {Method::kDas, Method::kImap, Method::kWiener, Method::kMv}) {
    MethodConfig cfg;
    cfg.method = m;
    const double ref = best_of(repeats, [&] {
      (void)reference::beamform_frame(frame, probe, 0.0, grid, {}, cfg);
    });
    const double omp = best_of(repeats, [&] { (void)beamform_frame(frame, probe, 0.0, grid, {}, cfg); });
    row("beamform_frame " + cfg.tag() + " 200x200", ref, omp);
  }
  return 0;
}
