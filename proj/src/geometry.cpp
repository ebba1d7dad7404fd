#include "pwbf/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pwbf/errors.hpp"

namespace pwbf {

ProbeGeometry ProbeGeometry::linear(std::size_t count, double pitch, double center_frequency,
                                    double sampling_frequency, double sound_speed) {
  ProbeGeometry probe;
  probe.element_count = count;
  probe.pitch = pitch;
  probe.center_frequency = center_frequency;
  probe.sampling_frequency = sampling_frequency;
  probe.sound_speed = sound_speed;
  probe.element_x.resize(count);
  const double centre = 0.5 * static_cast<double>(count - 1);
  for (std::size_t m = 0; m < count; ++m) {
    probe.element_x[m] = (static_cast<double>(m) - centre) * pitch;
  }
  probe.validate();
  return probe;
}

void ProbeGeometry::validate() const {
  if (element_count == 0) throw ConfigError("probe: element_count must be positive");
  if (element_x.size() != element_count) {
    throw ConfigError("probe: element_x length differs from element_count");
  }
  for (std::size_t m = 1; m < element_x.size(); ++m) {
    if (!(element_x[m] > element_x[m - 1])) {
      throw ConfigError("probe: element positions must be strictly increasing");
    }
  }
  if (!(pitch > 0.0)) throw ConfigError("probe: pitch must be positive");
  if (!(center_frequency > 0.0) || !(sampling_frequency > 0.0)) {
    throw ConfigError("probe: frequencies must be positive");
  }
  if (!(sound_speed > 0.0)) throw ConfigError("probe: sound speed must be positive");
}

ImagingGrid ImagingGrid::uniform(double x0, double x1, std::size_t nx, double z0, double z1,
                                 std::size_t nz) {
  if (nx == 0 || nz == 0) throw ConfigError("grid: dimensions must be positive");
  ImagingGrid grid;
  grid.lateral.resize(nx);
  grid.axial.resize(nz);
  const double dx = nx > 1 ? (x1 - x0) / static_cast<double>(nx - 1) : 0.0;
  const double dz = nz > 1 ? (z1 - z0) / static_cast<double>(nz - 1) : 0.0;
  for (std::size_t i = 0; i < nx; ++i) grid.lateral[i] = x0 + dx * static_cast<double>(i);
  for (std::size_t i = 0; i < nz; ++i) grid.axial[i] = z0 + dz * static_cast<double>(i);
  grid.validate();
  return grid;
}

void ImagingGrid::validate() const {
  if (lateral.empty() || axial.empty()) throw ConfigError("grid: empty axis");
  for (double z : axial) {
    if (!(z > 0.0)) throw ConfigError("grid: axial positions must be strictly positive");
  }
  auto monotone = [](const std::vector<double>& v) {
    return std::is_sorted(v.begin(), v.end()) ||
           std::is_sorted(v.begin(), v.end(), std::greater<>());
  };
  if (!monotone(lateral) || !monotone(axial)) throw ConfigError("grid: axes must be monotone");
}

double plane_wave_tx_delay(Pixel p, double angle, double sound_speed) {
  return (p.z * std::cos(angle) + p.x * std::sin(angle)) / sound_speed;
}

double rx_delay(Pixel p, double element_x, double sound_speed) {
  const double dx = p.x - element_x;
  return std::sqrt(p.z * p.z + dx * dx) / sound_speed;
}

ElementRange active_aperture(Pixel p, const ProbeGeometry& probe, double f_number,
                             bool* fallback) {
  const auto& ex = probe.element_x;
  // Relative slack so that elements lying exactly on the gate edge are kept.
  const double half = p.z / (2.0 * f_number) * (1.0 + 1e-12);
  const auto lo = std::lower_bound(ex.begin(), ex.end(), p.x - half);
  const auto hi = std::upper_bound(ex.begin(), ex.end(), p.x + half);
  if (lo < hi) {
    if (fallback) *fallback = false;
    return {static_cast<std::size_t>(lo - ex.begin()),
            static_cast<std::size_t>(hi - ex.begin()) - 1};
  }
  if (fallback) *fallback = true;
  std::size_t nearest = 0;
  double best = std::abs(ex[0] - p.x);
  for (std::size_t m = 1; m < ex.size(); ++m) {
    const double d = std::abs(ex[m] - p.x);
    if (d < best) {
      best = d;
      nearest = m;
    }
  }
  return {nearest, nearest};
}

FocusingPlan plan_focus(Pixel p, const ProbeGeometry& probe, double angle, double f_number,
                        double start_time) {
  FocusingPlan plan;
  plan.angle = angle;
  plan.elements = active_aperture(p, probe, f_number, &plan.fallback_aperture);
  plan.delay_samples.resize(plan.elements.count());
  const double tx = plane_wave_tx_delay(p, angle, probe.sound_speed);
  for (std::size_t k = 0; k < plan.delay_samples.size(); ++k) {
    const double rx = rx_delay(p, probe.element_x[plan.elements.first + k], probe.sound_speed);
    plan.delay_samples[k] = (tx + rx - start_time) * probe.sampling_frequency;
  }
  return plan;
}

std::optional<ApertureVector> gather_aperture(const AnalyticFrame& frame,
                                              const FocusingPlan& plan) {
  ApertureVector y;
  y.samples.resize(plan.elements.count());
  for (std::size_t k = 0; k < y.samples.size(); ++k) {
    const double s = plan.delay_samples[k];
    auto v = interpolate(frame.trace(plan.elements.first + k), s);
    if (!v) {
      y.samples[k] = 0.0;
      ++y.out_of_data;
      continue;
    }
    if (frame.demodulation_frequency != 0.0) {
      const double t = frame.start_time + s / frame.sampling_frequency;
      *v *= std::polar(1.0, 2.0 * std::numbers::pi * frame.demodulation_frequency * t);
    }
    y.samples[k] = *v;
  }
  if (y.out_of_data == y.samples.size()) return std::nullopt;
  return y;
}

}  // namespace pwbf
