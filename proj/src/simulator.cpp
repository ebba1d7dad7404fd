#include "pwbf/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "pwbf/dsp.hpp"
#include "pwbf/errors.hpp"

namespace pwbf {
namespace {

// Pulse support is truncated at this many envelope standard deviations (about -108 dB).
constexpr double kPulseSupportSigmas = 5.0;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

bool inside_any(const std::vector<CystAnnotation>& cysts, double x, double z) {
  for (const auto& c : cysts) {
    const double dx = x - c.x;
    const double dz = z - c.z;
    if (dx * dx + dz * dz <= c.radius * c.radius) return true;
  }
  return false;
}

double echo_delay(const Scatterer& s, double angle, double element_x, double c) {
  const Pixel p{s.x, s.z};
  return plane_wave_tx_delay(p, angle, c) + rx_delay(p, element_x, c);
}

ChannelDataSet empty_dataset(const Phantom& phantom, const AcquisitionSpec& spec) {
  ChannelDataSet data;
  data.probe = spec.probe;
  data.angles = spec.angles;
  data.sample_count = spec.trace_length;
  data.start_time = spec.start_time;
  data.traces.assign(spec.angles.size() * spec.probe.element_count * spec.trace_length, 0.0F);
  data.provenance = "simulator seed=" + std::to_string(spec.rng_seed) +
                    (phantom.description.empty() ? "" : " phantom=" + phantom.description);
  data.annotations = phantom.annotations;
  return data;
}

void add_noise(std::span<float> trace, const AcquisitionSpec& spec, std::size_t angle,
               std::size_t element) {
  if (spec.channel_noise_std <= 0.0) return;
  std::mt19937_64 rng(noise_stream_seed(spec.rng_seed, angle, element));
  std::normal_distribution<double> noise(0.0, spec.channel_noise_std);
  for (auto& v : trace) v += static_cast<float>(noise(rng));
}

// Sample index range [first, last] covered by a pulse centred at `delay`, unclipped.
struct Support {
  long long first;
  long long last;
};

Support pulse_support(double delay, double half_width, const AcquisitionSpec& spec) {
  const double fs = spec.probe.sampling_frequency;
  return {static_cast<long long>(std::ceil((delay - half_width - spec.start_time) * fs)),
          static_cast<long long>(std::floor((delay + half_width - spec.start_time) * fs))};
}

}  // namespace

std::uint64_t noise_stream_seed(std::uint64_t seed, std::size_t angle, std::size_t element) {
  return splitmix64(splitmix64(splitmix64(seed) ^ angle) ^ (element + 0x51ed27ULL));
}

Phantom make_cyst_phantom(const Region& region, const std::vector<CystAnnotation>& cysts,
                          double scatterer_density, double amplitude_std, std::uint64_t seed) {
  if (!(region.x_max > region.x_min) || !(region.z_max > region.z_min)) {
    throw ConfigError("cyst phantom: degenerate region");
  }
  if (!(region.z_min > 0.0)) throw ConfigError("cyst phantom: region must lie below z = 0");
  if (!(scatterer_density > 0.0)) throw ConfigError("cyst phantom: density must be positive");
  for (const auto& c : cysts) {
    if (!(c.radius > 0.0)) throw ConfigError("cyst phantom: cyst radius must be positive");
  }

  const auto count = static_cast<std::size_t>(std::llround(scatterer_density * region.area()));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(region.x_min, region.x_max);
  std::uniform_real_distribution<double> uz(region.z_min, region.z_max);
  std::normal_distribution<double> amp(0.0, amplitude_std);

  Phantom phantom;
  phantom.description = "cyst";
  phantom.annotations.cysts = cysts;
  phantom.scatterers.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    // Draw all three values unconditionally so the stream is independent of the cysts.
    const double x = ux(rng);
    const double z = uz(rng);
    const double a = amp(rng);
    if (!inside_any(cysts, x, z)) phantom.scatterers.push_back({x, z, a});
  }
  return phantom;
}

Phantom make_point_phantom(const std::vector<PointAnnotation>& points, double amplitude) {
  Phantom phantom;
  phantom.description = "points";
  phantom.annotations.points = points;
  for (const auto& p : points) {
    if (!(p.z > 0.0)) throw ConfigError("point phantom: targets must lie below z = 0");
    phantom.scatterers.push_back({p.x, p.z, amplitude});
  }
  return phantom;
}

void AcquisitionSpec::validate() const {
  probe.validate();
  if (angles.empty()) throw ConfigError("acquisition: at least one angle required");
  if (trace_length < 2) throw ConfigError("acquisition: trace length must be at least 2");
  if (channel_noise_std < 0.0) throw ConfigError("acquisition: noise std must be >= 0");
  if (!(fractional_bandwidth > 0.0 && fractional_bandwidth < 2.0)) {
    throw ConfigError("acquisition: fractional bandwidth must lie in (0, 2)");
  }
}

std::size_t required_trace_length(const Phantom& phantom, const ProbeGeometry& probe,
                                  const std::vector<double>& angles,
                                  double fractional_bandwidth) {
  double latest = 0.0;
  for (const auto& s : phantom.scatterers) {
    for (double a : angles) {
      for (double ex : {probe.element_x.front(), probe.element_x.back()}) {
        latest = std::max(latest, echo_delay(s, a, ex, probe.sound_speed));
      }
    }
  }
  const double tail =
      kPulseSupportSigmas * pulse_sigma(probe.center_frequency, fractional_bandwidth);
  return static_cast<std::size_t>(std::ceil((latest + tail) * probe.sampling_frequency)) + 2;
}

SimulationResult simulate_channels(const Phantom& phantom, const AcquisitionSpec& spec) {
  spec.validate();
  SimulationResult result{empty_dataset(phantom, spec), 0};
  const auto& probe = spec.probe;
  const double fs = probe.sampling_frequency;
  const double dt = 1.0 / fs;
  const double sigma = pulse_sigma(probe.center_frequency, spec.fractional_bandwidth);
  const double half_width = kPulseSupportSigmas * sigma;
  const double omega = 2.0 * std::numbers::pi * probe.center_frequency;
  const double inv_two_var = 1.0 / (2.0 * sigma * sigma);
  const std::complex<double> rotation = std::polar(1.0, omega * dt);
  const double ratio_step = std::exp(-dt * dt / (sigma * sigma));
  const auto n_samples = static_cast<long long>(spec.trace_length);
  const std::size_t n_elem = probe.element_count;
  const auto n_pairs = static_cast<long long>(spec.angles.size() * n_elem);

  std::size_t truncated = 0;
#pragma omp parallel for schedule(dynamic) reduction(+ : truncated)
  for (long long pair = 0; pair < n_pairs; ++pair) {
    const auto angle_idx = static_cast<std::size_t>(pair) / n_elem;
    const auto elem = static_cast<std::size_t>(pair) % n_elem;
    const double angle = spec.angles[angle_idx];
    const double ex = probe.element_x[elem];
    auto trace = result.data.trace(angle_idx, elem);

    for (const auto& s : phantom.scatterers) {
      const double delay = echo_delay(s, angle, ex, probe.sound_speed);
      const auto sup = pulse_support(delay, half_width, spec);
      const long long first = std::max(sup.first, 0LL);
      const long long last = std::min(sup.last, n_samples - 1);
      if (first != sup.first || last != sup.last) ++truncated;
      if (first > last) continue;

      // Carrier and Gaussian envelope advanced by recurrence from the first sample.
      const double t0 = spec.start_time + static_cast<double>(first) * dt - delay;
      std::complex<double> carrier = std::polar(1.0, omega * t0);
      double envelope = std::exp(-t0 * t0 * inv_two_var);
      double ratio = std::exp(-(2.0 * t0 * dt + dt * dt) * inv_two_var);
      for (long long n = first; n <= last; ++n) {
        trace[static_cast<std::size_t>(n)] +=
            static_cast<float>(s.amplitude * envelope * carrier.real());
        carrier *= rotation;
        envelope *= ratio;
        ratio *= ratio_step;
      }
    }
    add_noise(trace, spec, angle_idx, elem);
  }
  result.truncated_contributions = truncated;
  return result;
}

namespace reference {

SimulationResult simulate_channels(const Phantom& phantom, const AcquisitionSpec& spec) {
  spec.validate();
  SimulationResult result{empty_dataset(phantom, spec), 0};
  const auto& probe = spec.probe;
  const double fs = probe.sampling_frequency;
  const double half_width =
      kPulseSupportSigmas * pulse_sigma(probe.center_frequency, spec.fractional_bandwidth);
  const auto n_samples = static_cast<long long>(spec.trace_length);

  for (std::size_t a = 0; a < spec.angles.size(); ++a) {
    for (std::size_t m = 0; m < probe.element_count; ++m) {
      auto trace = result.data.trace(a, m);
      for (const auto& s : phantom.scatterers) {
        const double delay = echo_delay(s, spec.angles[a], probe.element_x[m], probe.sound_speed);
        const auto sup = pulse_support(delay, half_width, spec);
        if (sup.first < 0 || sup.last >= n_samples) ++result.truncated_contributions;
        for (long long n = std::max(sup.first, 0LL); n <= std::min(sup.last, n_samples - 1);
             ++n) {
          const double t = spec.start_time + static_cast<double>(n) / fs - delay;
          trace[static_cast<std::size_t>(n)] += static_cast<float>(
              s.amplitude *
              gaussian_pulse(t, probe.center_frequency, spec.fractional_bandwidth));
        }
      }
      add_noise(trace, spec, a, m);
    }
  }
  return result;
}

}  // namespace reference
}  // namespace pwbf
