#include <doctest.h>

#include <omp.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "pwbf/errors.hpp"
#include "pwbf/simulator.hpp"
#include "support.hpp"

using namespace pwbf;

namespace {

AcquisitionSpec spec_for(const Phantom& ph, std::vector<double> angles, std::size_t elements = 16) {
  AcquisitionSpec s;
  s.probe = test::small_probe(elements);
  s.angles = std::move(angles);
  s.trace_length = required_trace_length(ph, s.probe, s.angles, s.fractional_bandwidth);
  return s;
}

}  // namespace

TEST_CASE("empty phantom without noise gives zero traces") {
  Phantom empty;
  auto spec = spec_for(make_point_phantom({{0.0, 0.02}}), {0.0});
  const auto r = simulate_channels(empty, spec);
  CHECK(std::all_of(r.data.traces.begin(), r.data.traces.end(), [](float v) { return v == 0.0F; }));
  CHECK(r.data.traces.size() == spec.trace_length * 16);
  CHECK_NOTHROW(r.data.validate());
}

TEST_CASE("single scatterer echo peaks at the two-way delay") {
  const double z0 = 0.02;
  const auto ph = make_point_phantom({{0.0, z0}});
  auto spec = spec_for(ph, {0.0});
  const auto r = simulate_channels(ph, spec);
  const double fs = spec.probe.sampling_frequency;
  for (std::size_t m = 0; m < spec.probe.element_count; ++m) {
    const auto tr = r.data.trace(0, m);
    const auto peak = std::max_element(tr.begin(), tr.end(),
                                       [](float a, float b) { return std::abs(a) < std::abs(b); });
    const double expected =
        (z0 + std::hypot(z0, spec.probe.element_x[m])) / spec.probe.sound_speed * fs;
    CHECK(std::abs(static_cast<double>(peak - tr.begin()) - expected) <= 1.0);
  }
  CHECK(r.truncated_contributions == 0);
}

TEST_CASE("superposition of two scatterers is exact") {
  const Phantom a = make_point_phantom({{1e-3, 0.015}});
  const Phantom b = make_point_phantom({{-2e-3, 0.018}}, -0.7);
  Phantom both = a;
  both.scatterers.push_back(b.scatterers[0]);
  auto spec = spec_for(both, {0.0, 0.1});
  const auto ra = simulate_channels(a, spec), rb = simulate_channels(b, spec),
             rab = simulate_channels(both, spec);
  for (std::size_t i = 0; i < rab.data.traces.size(); ++i) {
    CHECK(rab.data.traces[i] == ra.data.traces[i] + rb.data.traces[i]);
  }
}

TEST_CASE("amplitude linearity") {
  const auto ph = make_cyst_phantom({-3e-3, 3e-3, 10e-3, 14e-3}, {}, 5e6, 1.0, 9);
  auto spec = spec_for(ph, {0.05});
  const auto base = simulate_channels(ph, spec);
  for (double k : {2.0, 0.25}) {
    Phantom scaled = ph;
    for (auto& s : scaled.scatterers) s.amplitude *= k;
    const auto r = simulate_channels(scaled, spec);
    for (std::size_t i = 0; i < r.data.traces.size(); ++i) {
      CHECK(r.data.traces[i] == static_cast<float>(k) * base.data.traces[i]);
    }
  }
}

TEST_CASE("fast simulator agrees with the direct reference") {
  const auto ph = make_cyst_phantom({-4e-3, 4e-3, 10e-3, 16e-3}, {}, 3e6, 1.0, 4);
  auto spec = spec_for(ph, {-0.2, 0.0, 0.2});
  spec.channel_noise_std = 0.1;
  spec.rng_seed = 77;
  const auto fast = simulate_channels(ph, spec);
  const auto ref = reference::simulate_channels(ph, spec);
  const float peak = *std::max_element(ref.data.traces.begin(), ref.data.traces.end());
  double worst = 0.0;
  for (std::size_t i = 0; i < ref.data.traces.size(); ++i) {
    worst = std::max(worst, static_cast<double>(std::abs(fast.data.traces[i] - ref.data.traces[i])));
  }
  CHECK(worst < 1e-4 * peak);
  CHECK(fast.truncated_contributions == ref.truncated_contributions);
}

TEST_CASE("simulation is deterministic and thread-count independent") {
  const auto ph = make_cyst_phantom({-4e-3, 4e-3, 10e-3, 16e-3}, {}, 2e6, 1.0, 1);
  auto spec = spec_for(ph, {0.0, 0.1});
  spec.channel_noise_std = 0.05;
  spec.rng_seed = 5;
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const auto one = simulate_channels(ph, spec);
  omp_set_num_threads(4);
  const auto four = simulate_channels(ph, spec);
  omp_set_num_threads(saved);
  CHECK(one.data == four.data);
  CHECK(simulate_channels(ph, spec).data == one.data);
}

TEST_CASE("channel noise statistics and stream independence") {
  Phantom empty;
  auto spec = spec_for(make_point_phantom({{0.0, 0.02}}), {0.0, 0.1}, 8);
  spec.trace_length = 20000;
  spec.channel_noise_std = 0.5;
  spec.rng_seed = 11;
  const auto r = simulate_channels(empty, spec);
  const auto t = r.data.trace(1, 3);
  const double mean = std::accumulate(t.begin(), t.end(), 0.0) / t.size();
  double var = 0.0;
  for (float v : t) var += (v - mean) * (v - mean);
  var /= t.size();
  CHECK(std::abs(mean) < 4 * 0.5 / std::sqrt(20000.0));
  CHECK(std::sqrt(var) == doctest::Approx(0.5).epsilon(0.03));
  CHECK(noise_stream_seed(11, 0, 3) != noise_stream_seed(11, 3, 0));
  CHECK(noise_stream_seed(11, 1, 3) != noise_stream_seed(12, 1, 3));
  // Different (angle, element) streams are uncorrelated.
  const auto u = r.data.trace(0, 3);
  double cross = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) cross += t[i] * u[i];
  CHECK(std::abs(cross / t.size() / 0.25) < 0.04);
}

TEST_CASE("trace window truncation is counted") {
  const auto ph = make_point_phantom({{0.0, 0.02}});
  auto spec = spec_for(ph, {0.0}, 4);
  spec.trace_length = 200;  // far too short for 2 cm
  CHECK(simulate_channels(ph, spec).truncated_contributions == 4);
}

TEST_CASE("cyst phantom counts") {
  const Region region{-5e-3, 5e-3, 10e-3, 20e-3};
  const double density = 20e6;  // 20 per mm^2
  SUBCASE("no cysts keeps round(density * area) scatterers") {
    const auto ph = make_cyst_phantom(region, {}, density, 1.0, 3);
    CHECK(ph.scatterers.size() == 2000);
  }
  SUBCASE("a cyst covering the region empties it") {
    const auto ph = make_cyst_phantom(region, {{0.0, 15e-3, 20e-3}}, density, 1.0, 3);
    CHECK(ph.scatterers.empty());
  }
  SUBCASE("cyst interior is empty and the exterior density is unchanged") {
    const CystAnnotation cyst{0.0, 15e-3, 2e-3};
    // Counts in four exterior quadrant boxes must match the uniform expectation.
    const auto ph = make_cyst_phantom(region, {cyst}, density, 1.0, 21);
    std::array<double, 4> counts{};
    for (const auto& s : ph.scatterers) {
      CHECK(std::hypot(s.x - cyst.x, s.z - cyst.z) > cyst.radius);
      counts[(s.x > 0 ? 1 : 0) + (s.z > 15e-3 ? 2 : 0)] += 1;
    }
    const double pi = 3.14159265358979323846;
    const double expected = density * (region.area() - pi * cyst.radius * cyst.radius) / 4.0;
    double chi2 = 0.0;
    for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
    CHECK(chi2 < 11.34);  // chi-square, 3 dof, p = 0.01
  }
  SUBCASE("amplitudes are zero-mean Gaussian") {
    const auto ph = make_cyst_phantom(region, {}, density, 2.0, 8);
    double s1 = 0.0, s2 = 0.0;
    for (const auto& s : ph.scatterers) {
      s1 += s.amplitude;
      s2 += s.amplitude * s.amplitude;
    }
    const double n = static_cast<double>(ph.scatterers.size());
    CHECK(std::abs(s1 / n) < 4 * 2.0 / std::sqrt(n));
    CHECK(std::sqrt(s2 / n) == doctest::Approx(2.0).epsilon(0.06));
  }
  CHECK_THROWS_AS(make_cyst_phantom({0, 0, 1e-3, 2e-3}, {}, density, 1.0, 1), ConfigError);
  CHECK_THROWS_AS(make_point_phantom({{0.0, -1e-3}}), ConfigError);
}

TEST_CASE("acquisition validation") {
  AcquisitionSpec s;
  s.probe = test::small_probe(4);
  s.trace_length = 100;
  CHECK_THROWS_AS(s.validate(), ConfigError);  // no angles
  s.angles = {0.0};
  CHECK_NOTHROW(s.validate());
  s.fractional_bandwidth = 2.5;
  CHECK_THROWS_AS(s.validate(), ConfigError);
}
