#include <doctest.h>

#include <omp.h>

#include <cmath>
#include <numbers>

#include "pwbf/compounding.hpp"
#include "pwbf/engine.hpp"
#include "pwbf/errors.hpp"
#include "pwbf/simulator.hpp"
#include "support.hpp"

using namespace pwbf;

namespace {

struct Scene {
  ChannelDataSet data;
  ImagingGrid grid;
};

Scene speckle_scene() {
  const auto ph = make_cyst_phantom({-4e-3, 4e-3, 8e-3, 16e-3}, {{0.0, 12e-3, 1.5e-3}}, 8e6, 1.0, 3);
  AcquisitionSpec spec;
  spec.probe = test::small_probe(24);
  spec.angles = {-0.1, 0.0, 0.15};
  spec.trace_length = required_trace_length(ph, spec.probe, spec.angles, 0.67);
  spec.channel_noise_std = 0.01;
  spec.rng_seed = 2;
  return {simulate_channels(ph, spec).data, ImagingGrid::uniform(-3e-3, 3e-3, 31, 9e-3, 15e-3, 37)};
}

std::vector<MethodConfig> all_methods() {
  std::vector<MethodConfig> out;
  for (Method m : {Method::kDas, Method::kImap, Method::kCf, Method::kWiener, Method::kScw,
                   Method::kMv}) {
    MethodConfig c;
    c.method = m;
    out.push_back(c);
  }
  MethodConfig i1;
  i1.method = Method::kImap;
  i1.iterations = 1;
  out.push_back(i1);
  return out;
}

}  // namespace

TEST_CASE("method names and configuration") {
  for (Method m : {Method::kDas, Method::kImap, Method::kCf, Method::kWiener, Method::kScw,
                   Method::kMv}) {
    CHECK(parse_method(method_name(m)) == m);
  }
  CHECK_THROWS_AS(parse_method("capon"), ConfigError);
  MethodConfig c;
  c.method = Method::kImap;
  CHECK(c.tag() == "imap2");
  c.iterations = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.method = Method::kScw;
  c.alpha = -1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("apply_method clamps parameters to the aperture") {
  const std::vector<cplx> one{cplx{0.4, 0.2}};
  MethodConfig w;
  w.method = Method::kWiener;
  CHECK(apply_method(one, w) == one[0]);
  w.subarray = 50;
  const std::vector<cplx> y{1.0, 0.8, 1.3, 0.9};
  CHECK(apply_method(y, w) == bf::wiener_postfilter(y, 3));
  MethodConfig mv;
  mv.method = Method::kMv;
  mv.subarray = 50;
  mv.loading = 0.1;
  CHECK(apply_method(y, mv) == bf::minimum_variance(y, 4, 0.1));
  MethodConfig s;
  s.method = Method::kScw;
  CHECK(apply_method(y, s) == bf::scaled_wiener(y, 2.0));
}

TEST_CASE("ScW with alpha 1 reproduces iMAP1 bit for bit") {
  const auto scene = speckle_scene();
  const auto frame = make_analytic_frame(scene.data, 1);
  MethodConfig scw;
  scw.method = Method::kScw;
  scw.alpha = 1.0;
  MethodConfig i1;
  i1.method = Method::kImap;
  i1.iterations = 1;
  const auto a = beamform_frame(frame, scene.data.probe, 0.0, scene.grid, {}, scw);
  const auto b = beamform_frame(frame, scene.data.probe, 0.0, scene.grid, {}, i1);
  CHECK(a.values == b.values);
}

TEST_CASE("parallel engine matches the serial reference bit for bit") {
  const auto scene = speckle_scene();
  const int saved = omp_get_max_threads();
  for (std::size_t a = 0; a < scene.data.angle_count(); ++a) {
    const auto frame = make_analytic_frame(scene.data, a);
    const double angle = scene.data.angles[a];
    for (const auto& cfg : all_methods()) {
      CAPTURE(cfg.tag());
      const auto ref = reference::beamform_frame(frame, scene.data.probe, angle, scene.grid, {}, cfg);
      omp_set_num_threads(1);
      const auto one = beamform_frame(frame, scene.data.probe, angle, scene.grid, {}, cfg);
      omp_set_num_threads(3);
      const auto three = beamform_frame(frame, scene.data.probe, angle, scene.grid, {}, cfg);
      CHECK(one == ref);
      CHECK(three == ref);
    }
  }
  omp_set_num_threads(saved);
}

TEST_CASE("point target peaks at its pixel for steered plane waves") {
  const double z0 = 14e-3, x0 = 0.6e-3;
  const auto ph = make_point_phantom({{x0, z0}});
  AcquisitionSpec spec;
  spec.probe = test::small_probe(48);
  spec.angles = select_angles(5);
  spec.trace_length = required_trace_length(ph, spec.probe, spec.angles, 0.67);
  const auto data = simulate_channels(ph, spec).data;
  const auto grid = ImagingGrid::uniform(-2e-3, 2e-3, 81, 12e-3, 16e-3, 81);
  const std::size_t col0 = 52, row0 = 40;  // x0 and z0 on the 50 um grid
  REQUIRE(grid.lateral[col0] == doctest::Approx(x0));
  REQUIRE(grid.axial[row0] == doctest::Approx(z0));
  for (std::size_t a = 0; a < data.angle_count(); ++a) {
    CAPTURE(a);
    const auto frame = make_analytic_frame(data, a);
    const auto g = beamform_frame(frame, data.probe, data.angles[a], grid, {}, {});
    std::size_t best = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (std::abs(g.values[i]) > std::abs(g.values[best])) best = i;
    }
    CHECK(std::abs(static_cast<long>(best / grid.cols()) - static_cast<long>(row0)) <= 1);
    CHECK(std::abs(static_cast<long>(best % grid.cols()) - static_cast<long>(col0)) <= 1);

    // Aperture focused on the scatterer is phase-aligned.
    const auto plan = plan_focus({x0, z0}, data.probe, data.angles[a], 1.75, data.start_time);
    const auto y = gather_aperture(frame, plan);
    REQUIRE(y.has_value());
    cplx sum = 0.0;
    double mag = 0.0;
    for (const auto& v : y->samples) {
      sum += v;
      mag += std::abs(v);
    }
    CHECK(std::abs(sum) >= (1.0 - 1e-2) * mag);
    double spread = 0.0;
    for (const auto& v : y->samples) spread = std::max(spread, std::abs(std::arg(v / sum)));
    CHECK(spread < 0.1);
  }
}

TEST_CASE("stacked and element-compounded modes reduce to per-angle for one transmit") {
  const auto scene = speckle_scene();
  const std::vector<AnalyticFrame> frames{make_analytic_frame(scene.data, 1)};
  const std::vector<double> angles{scene.data.angles[1]};
  for (const auto& cfg : all_methods()) {
    CAPTURE(cfg.tag());
    const auto single = beamform_frame(frames[0], scene.data.probe, angles[0], scene.grid, {}, cfg);
    const auto stacked = beamform_stacked(frames, angles, scene.data.probe, scene.grid, {}, cfg);
    const auto ec = beamform_element_compounded(frames, angles, scene.data.probe, scene.grid, {}, cfg);
    for (std::size_t i = 0; i < single.size(); ++i) {
      CHECK(test::rel_err(stacked.values[i], single.values[i]) < 1e-12);
      CHECK(test::rel_err(ec.values[i], single.values[i]) < 1e-12);
    }
  }
}

TEST_CASE("DAS is linear across combination modes") {
  const auto scene = speckle_scene();
  std::vector<AnalyticFrame> frames;
  CompoundAccumulator acc;
  for (std::size_t a = 0; a < scene.data.angle_count(); ++a) {
    frames.push_back(make_analytic_frame(scene.data, a));
    acc.add(beamform_frame(frames.back(), scene.data.probe, scene.data.angles[a], scene.grid, {}, {}));
  }
  const auto per_angle = acc.result();
  const auto stacked = beamform_stacked(frames, scene.data.angles, scene.data.probe, scene.grid, {}, {});
  const auto ec = beamform_element_compounded(frames, scene.data.angles, scene.data.probe, scene.grid, {}, {});
  for (std::size_t i = 0; i < per_angle.size(); ++i) {
    CHECK(test::rel_err(stacked.values[i], per_angle.values[i]) < 1e-12);
    CHECK(test::rel_err(ec.values[i], per_angle.values[i]) < 1e-12);
  }
}

TEST_CASE("pixels outside the recorded window are invalid and zero") {
  const auto scene = speckle_scene();
  const auto frame = make_analytic_frame(scene.data, 0);
  const auto deep = ImagingGrid::uniform(-1e-3, 1e-3, 3, 60e-3, 61e-3, 2);
  const auto g = beamform_frame(frame, scene.data.probe, 0.0, deep, {}, {});
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(g.valid[i] == 0);
    CHECK(g.values[i] == cplx{0.0, 0.0});
  }
}

TEST_CASE("numerical errors carry pixel context") {
  const auto scene = speckle_scene();
  const auto frame = make_analytic_frame(scene.data, 0);
  MethodConfig mv;
  mv.method = Method::kMv;
  mv.loading = 0.0;
  mv.subarray = 24;
  // A full-length subarray gives a rank-one sample covariance.
  try {
    beamform_frame(frame, scene.data.probe, 0.0, scene.grid, {}, mv);
    FAIL("expected a numerical error");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("pixel") != std::string::npos);
  }
}

TEST_CASE("analytic frame keeps the RF as its real part without demodulation") {
  const auto scene = speckle_scene();
  const auto raw = make_analytic_frame(scene.data, 2, false);
  const auto tr = scene.data.trace(2, 5);
  for (std::size_t i = 0; i < tr.size(); ++i) CHECK(raw.trace(5)[i].real() == doctest::Approx(tr[i]));
  const auto bb = make_analytic_frame(scene.data, 2, true);
  CHECK(bb.demodulation_frequency == scene.data.probe.center_frequency);
  for (std::size_t i = 0; i < tr.size(); i += 17) {
    CHECK(std::abs(bb.trace(5)[i]) == doctest::Approx(std::abs(raw.trace(5)[i])));
  }
}
