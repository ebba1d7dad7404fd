#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pwbf/dataset.hpp"
#include "pwbf/geometry.hpp"

namespace pwbf {

struct Scatterer {
  double x = 0.0;  // [m]
  double z = 0.0;  // [m], > 0
  double amplitude = 0.0;
};

struct Phantom {
  std::vector<Scatterer> scatterers;
  std::string description;
  Annotations annotations;
};

struct Region {
  double x_min = 0.0;
  double x_max = 0.0;
  double z_min = 0.0;
  double z_max = 0.0;
  double area() const { return (x_max - x_min) * (z_max - z_min); }
};

/// Uniform random speckle with Gaussian amplitudes; every scatterer inside a cyst disk
/// is removed. The scatterer count before removal is round(density * area).
Phantom make_cyst_phantom(const Region& region, const std::vector<CystAnnotation>& cysts,
                          double scatterer_density, double amplitude_std, std::uint64_t seed);

/// Isolated unit-amplitude reflectors in an anechoic background.
Phantom make_point_phantom(const std::vector<PointAnnotation>& points, double amplitude = 1.0);

struct AcquisitionSpec {
  ProbeGeometry probe;
  std::vector<double> angles;   // [rad]
  std::size_t trace_length = 0;  // samples
  double start_time = 0.0;
  double channel_noise_std = 0.0;
  double fractional_bandwidth = 0.67;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

/// Trace length that covers the two-way delay of every scatterer for every angle plus the
/// pulse tail.
std::size_t required_trace_length(const Phantom& phantom, const ProbeGeometry& probe,
                                  const std::vector<double>& angles,
                                  double fractional_bandwidth);

struct SimulationResult {
  ChannelDataSet data;
  std::size_t truncated_contributions = 0;  // (scatterer, angle, element) echoes cut by the window
};

/// First-order linear model: each trace is the sum of delayed, scaled pulses plus white
/// Gaussian noise. Parallel over (angle, element); the output does not depend on the
/// number of threads.
SimulationResult simulate_channels(const Phantom& phantom, const AcquisitionSpec& spec);

namespace reference {
/// Serial direct-evaluation simulator used to cross-check `simulate_channels`.
SimulationResult simulate_channels(const Phantom& phantom, const AcquisitionSpec& spec);
}  // namespace reference

/// Seed of the noise stream for one (angle, element) pair.
std::uint64_t noise_stream_seed(std::uint64_t seed, std::size_t angle, std::size_t element);

}  // namespace pwbf
